"""Dual-branch Siamese LSTM scorer with hand-implemented gradients.

Branch a encodes the contextual vector (a length-1 sequence); branch b
encodes the word2vec token sequence.  The two encodings feed a feature
block (elementwise product, absolute difference, cosine distance, cosine
similarity) and a dense/dropout/sigmoid head.  Training is plain
reverse-mode: BPTT through both branches, binary cross-entropy, Adam.

All math runs in float64; checkpoints store float32, which round-trips
exactly.  Everything is deterministic for a fixed seed on one thread.
"""

from __future__ import annotations

import copy
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Split

logger = logging.getLogger(__name__)

SIAM_MAGIC = b"SIAM"
SIAM_VERSION = 1
SCORE_EPS = 1e-7
GATES = "ifoc"
_ACT_CODES = {"relu": 0, "sigmoid": 1}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


class DimensionError(ValueError):
    pass


class ConfigurationError(Exception):
    pass


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class HeadLayer:
    out_dim: int
    in_dim: int
    activation: str  # relu | sigmoid


@dataclass
class SiameseModel:
    input_dim: int
    hidden_dim: int
    head: list[HeadLayer]
    dropout_rate: float
    shared: bool
    seed: int
    params: dict[str, np.ndarray]

    def branch_prefixes(self) -> list[str]:
        return ["a"] if self.shared else ["a", "b"]

    def param_names(self) -> list[str]:
        names = []
        for prefix in self.branch_prefixes():
            for gate in GATES:
                names += [f"{prefix}.W{gate}", f"{prefix}.U{gate}", f"{prefix}.b{gate}"]
        for i in range(len(self.head)):
            names += [f"head{i}.W", f"head{i}.b"]
        return names

    def branch_params(self, which: str) -> dict[str, np.ndarray]:
        prefix = "a" if self.shared else which
        return {
            key: self.params[f"{prefix}.{key}"]
            for gate in GATES
            for key in (f"W{gate}", f"U{gate}", f"b{gate}")
        }


def init_model(
    input_dim: int,
    hidden_dim: int,
    head_hidden: Sequence[int] = (32,),
    dropout_rate: float = 0.3,
    seed: int = 0,
    shared: bool = False,
) -> SiameseModel:
    """Fresh model: uniform +/-1/sqrt(fan_in) weights, zero biases except the
    forget gate bias, which starts at 1 so the cell state carries early on."""
    if not 0.0 <= dropout_rate < 1.0:
        raise ConfigurationError(f"dropout_rate must be in [0, 1), got {dropout_rate}")
    rng = np.random.default_rng(seed)
    feature_dim = 2 * hidden_dim + 2
    sizes = [feature_dim, *head_hidden, 1]
    head = [
        HeadLayer(
            out_dim=sizes[i + 1],
            in_dim=sizes[i],
            activation="sigmoid" if i == len(sizes) - 2 else "relu",
        )
        for i in range(len(sizes) - 1)
    ]
    model = SiameseModel(
        input_dim=input_dim,
        hidden_dim=hidden_dim,
        head=head,
        dropout_rate=dropout_rate,
        shared=shared,
        seed=seed,
        params={},
    )
    for prefix in model.branch_prefixes():
        for gate in GATES:
            model.params[f"{prefix}.W{gate}"] = rng.uniform(
                -1, 1, (hidden_dim, input_dim)
            ) / np.sqrt(input_dim)
            model.params[f"{prefix}.U{gate}"] = rng.uniform(
                -1, 1, (hidden_dim, hidden_dim)
            ) / np.sqrt(hidden_dim)
            bias = np.zeros(hidden_dim)
            if gate == "f":
                bias[:] = 1.0
            model.params[f"{prefix}.b{gate}"] = bias
    for i, layer in enumerate(model.head):
        model.params[f"head{i}.W"] = rng.uniform(
            -1, 1, (layer.out_dim, layer.in_dim)
        ) / np.sqrt(layer.in_dim)
        model.params[f"head{i}.b"] = np.zeros(layer.out_dim)
    return model


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def lstm_step(
    x: np.ndarray, state: LstmState, p: dict[str, np.ndarray]
) -> tuple[LstmState, dict]:
    """One gated update; returns the new state and the step cache."""
    if p["Wi"].shape[1] != x.shape[0] or p["Ui"].shape[1] != state.h.shape[0]:
        raise DimensionError(
            f"lstm_step: input {x.shape} / state {state.h.shape} do not match "
            f"weights {p['Wi'].shape} / {p['Ui'].shape}"
        )
    i = _sigmoid(p["Wi"] @ x + p["Ui"] @ state.h + p["bi"])
    f = _sigmoid(p["Wf"] @ x + p["Uf"] @ state.h + p["bf"])
    o = _sigmoid(p["Wo"] @ x + p["Uo"] @ state.h + p["bo"])
    c_tilde = np.tanh(p["Wc"] @ x + p["Uc"] @ state.h + p["bc"])
    c = f * state.c + i * c_tilde
    tanh_c = np.tanh(c)
    h = o * tanh_c
    cache = {
        "x": x, "h_prev": state.h, "c_prev": state.c,
        "i": i, "f": f, "o": o, "c_tilde": c_tilde, "c": c, "tanh_c": tanh_c,
    }
    return LstmState(h=h, c=c), cache


def branch_forward(
    sequence: np.ndarray | Sequence[np.ndarray], p: dict[str, np.ndarray]
) -> tuple[np.ndarray, dict | None]:
    """Fold the gated update over the sequence from the zero state; the
    encoding is the final hidden state.  An empty sequence encodes to the
    zero vector.

    Input projections for all steps are batched into one matmul per gate;
    only the recurrent terms run step by step (same formulas as lstm_step,
    so results agree to float addition order).
    """
    hidden = p["bi"].shape[0]
    rows = sequence if isinstance(sequence, np.ndarray) else list(sequence)
    if len(rows) == 0:
        return np.zeros(hidden), None
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p["Wi"].shape[1]:
        raise DimensionError(
            f"branch_forward: sequence shape {X.shape} does not match "
            f"input weights {p['Wi'].shape}"
        )
    steps = X.shape[0]
    # gates stacked in GATES order: one projection GEMM for the whole
    # sequence, one recurrent GEMV per step
    w_stack = np.concatenate([p[f"W{g}"] for g in GATES])
    u_stack = np.concatenate([p[f"U{g}"] for g in GATES])
    b_stack = np.concatenate([p[f"b{g}"] for g in GATES])
    wx = X @ w_stack.T + b_stack  # (steps, 4*hidden)
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    H_prev = np.empty((steps, hidden))
    C_prev = np.empty((steps, hidden))
    I = np.empty((steps, hidden))
    F = np.empty((steps, hidden))
    O = np.empty((steps, hidden))
    CT = np.empty((steps, hidden))
    TC = np.empty((steps, hidden))
    for t in range(steps):
        H_prev[t] = h
        C_prev[t] = c
        z = wx[t] + u_stack @ h
        gates = _sigmoid(z[: 3 * hidden])
        i = gates[:hidden]
        f = gates[hidden : 2 * hidden]
        o = gates[2 * hidden :]
        c_tilde = np.tanh(z[3 * hidden :])
        c = f * c + i * c_tilde
        tanh_c = np.tanh(c)
        h = o * tanh_c
        I[t], F[t], O[t], CT[t], TC[t] = i, f, o, c_tilde, tanh_c
    cache = {"X": X, "H_prev": H_prev, "C_prev": C_prev, "u_stack": u_stack,
             "i": I, "f": F, "o": O, "c_tilde": CT, "tanh_c": TC}
    return h, cache


def _branch_backward(
    dh_last: np.ndarray, cache: dict | None, p: dict[str, np.ndarray]
) -> dict[str, np.ndarray]:
    """BPTT from the gradient of the final hidden state.

    The recurrent sweep is sequential; weight gradients are accumulated in
    one matmul per gate at the end.
    """
    if cache is None:
        return {key: np.zeros_like(value) for key, value in p.items()}
    steps, hidden = cache["i"].shape
    u_stack_t = cache["u_stack"].T
    dz = np.empty((steps, 4 * hidden))
    dh = dh_last
    dc = np.zeros_like(dh_last)
    for t in reversed(range(steps)):
        i, f, o = cache["i"][t], cache["f"][t], cache["o"][t]
        c_tilde, tanh_c = cache["c_tilde"][t], cache["tanh_c"][t]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c**2)
        row = dz[t]
        row[:hidden] = dc * c_tilde * i * (1.0 - i)
        row[hidden : 2 * hidden] = dc * cache["C_prev"][t] * f * (1.0 - f)
        row[2 * hidden : 3 * hidden] = do * o * (1.0 - o)
        row[3 * hidden :] = dc * i * (1.0 - c_tilde**2)
        dh = u_stack_t @ row
        dc = dc * f
    grad_w = dz.T @ cache["X"]  # (4*hidden, input_dim)
    grad_u = dz.T @ cache["H_prev"]
    grad_b = dz.sum(axis=0)
    grads = {}
    for gi, gate in enumerate(GATES):
        lo, hi = gi * hidden, (gi + 1) * hidden
        grads[f"W{gate}"] = grad_w[lo:hi]
        grads[f"U{gate}"] = grad_u[lo:hi]
        grads[f"b{gate}"] = grad_b[lo:hi]
    return grads


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - cos(a, b) after L2 normalization, in [0, 2]; defined as 1 when
    either vector is zero (maximal uncertainty, keeps empty reviews NaN-free)."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 1.0
    cos = float(np.clip((a @ b) / (na * nb), -1.0, 1.0))
    return 1.0 - cos


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """(1 + cos) / 2 mapped to [0, 1]; exactly 1 - distance/2."""
    return 1.0 - cosine_distance(a, b) / 2.0


def _head_forward(
    model: SiameseModel,
    features: np.ndarray,
    mode: str,
    rng: np.random.Generator | None,
) -> tuple[float, list[dict]]:
    layer_caches = []
    h = features
    for i, layer in enumerate(model.head):
        W = model.params[f"head{i}.W"]
        b = model.params[f"head{i}.b"]
        if W.shape[1] != h.shape[0]:
            raise DimensionError(
                f"head layer {i} expects input {W.shape[1]}, got {h.shape[0]}"
            )
        z = W @ h + b
        if layer.activation == "relu":
            out = np.maximum(z, 0.0)
        else:
            out = _sigmoid(z)
        cache = {"input": h, "z": z, "out": out, "mask": None}
        last = i == len(model.head) - 1
        if not last and model.dropout_rate > 0.0 and mode == "train":
            if rng is None:
                raise ConfigurationError("train-mode forward needs an rng for dropout")
            keep = 1.0 - model.dropout_rate
            mask = (rng.random(out.shape) < keep) / keep  # inverted dropout
            out = out * mask
            cache["mask"] = mask
        layer_caches.append(cache)
        h = out
    return float(h[0]), layer_caches


def forward(
    model: SiameseModel,
    ctx_seq: np.ndarray | Sequence[np.ndarray],
    w2v_seq: np.ndarray | Sequence[np.ndarray],
    mode: str = "infer",
    rng: np.random.Generator | None = None,
) -> tuple[float, dict]:
    """Score in (0, 1) plus the cache backward() needs.

    Feature block: [a*b, |a-b|, cosine_distance(a,b), similarity(a,b)].
    Dropout only acts in train mode (inverted scaling), so infer mode is
    deterministic.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"unknown mode {mode!r}")
    a, caches_a = branch_forward(ctx_seq, model.branch_params("a"))
    b, caches_b = branch_forward(w2v_seq, model.branch_params("b"))
    dist = cosine_distance(a, b)
    sim = 1.0 - dist / 2.0
    features = np.concatenate([a * b, np.abs(a - b), [dist], [sim]])
    score, layer_caches = _head_forward(model, features, mode, rng)
    cache = {
        "a": a, "b": b, "caches_a": caches_a, "caches_b": caches_b,
        "dist": dist, "features": features, "layers": layer_caches,
        "score": score,
    }
    return score, cache


def bce_loss(score: float, label: int) -> float:
    s = min(max(score, SCORE_EPS), 1.0 - SCORE_EPS)
    return -(label * np.log(s) + (1 - label) * np.log(1.0 - s))


def _cos_grads(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return np.zeros_like(a), np.zeros_like(b)
    cos = (a @ b) / (na * nb)
    dcos_da = b / (na * nb) - cos * a / (na * na)
    dcos_db = a / (na * nb) - cos * b / (nb * nb)
    return dcos_da, dcos_db


def backward(
    model: SiameseModel, cache: dict, label: int, scale: float = 1.0
) -> dict[str, np.ndarray]:
    """Exact reverse-mode gradients of scale * bce_loss(forward(...), label)
    with respect to every parameter, via the train-mode cache."""
    grads: dict[str, np.ndarray] = {}

    # Head: fused sigmoid + BCE at the output unit.
    delta = np.array([scale * (cache["score"] - label)])
    for i in reversed(range(len(model.head))):
        layer_cache = cache["layers"][i]
        if i != len(model.head) - 1:
            if layer_cache["mask"] is not None:
                delta = delta * layer_cache["mask"]
            delta = delta * (layer_cache["z"] > 0.0)  # relu
        grads[f"head{i}.W"] = np.outer(delta, layer_cache["input"])
        grads[f"head{i}.b"] = delta
        delta = model.params[f"head{i}.W"].T @ delta

    # Feature block -> branch encodings.
    h = model.hidden_dim
    a, b = cache["a"], cache["b"]
    g_prod = delta[:h]
    g_absdiff = delta[h : 2 * h]
    g_dist = delta[2 * h]
    g_sim = delta[2 * h + 1]
    sign = np.sign(a - b)
    da = g_prod * b + g_absdiff * sign
    db = g_prod * a - g_absdiff * sign
    # distance = 1 - cos, similarity = 1 - distance/2 = (1 + cos)/2
    dcos_coef = -g_dist + 0.5 * g_sim
    dcos_da, dcos_db = _cos_grads(a, b)
    da = da + dcos_coef * dcos_da
    db = db + dcos_coef * dcos_db

    grads_a = _branch_backward(da, cache["caches_a"], model.branch_params("a"))
    grads_b = _branch_backward(db, cache["caches_b"], model.branch_params("b"))
    for key, value in grads_a.items():
        grads[f"a.{key}"] = value
    if model.shared:
        for key, value in grads_b.items():
            grads[f"a.{key}"] = grads[f"a.{key}"] + value
    else:
        for key, value in grads_b.items():
            grads[f"b.{key}"] = value
    return grads


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_update(
    params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState
) -> None:
    """Canonical bias-corrected Adam, in place; one step per call."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for name, grad in grads.items():
        if name not in state.m:
            state.m[name] = np.zeros_like(grad)
            state.v[name] = np.zeros_like(grad)
        state.m[name] = b1 * state.m[name] + (1 - b1) * grad
        state.v[name] = b2 * state.v[name] + (1 - b2) * grad * grad
        m_hat = state.m[name] / (1 - b1**state.t)
        v_hat = state.v[name] / (1 - b2**state.t)
        params[name] -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


@dataclass(frozen=True)
class Sample:
    # any sized iterable of D-vectors works as a sequence (ndarray or lazy)
    ctx_seq: Sequence[np.ndarray] | np.ndarray
    tok_seq: Sequence[np.ndarray] | np.ndarray
    label: int


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    loss: float

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "loss": self.loss,
        }


@dataclass(frozen=True)
class EpochStats:
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainReport:
    epochs: list[EpochStats]
    stopped_epoch: int
    best_epoch: int

    def to_dict(self) -> dict:
        return {
            "epochs": [
                {
                    "epoch": i + 1,
                    "train_loss": e.train_loss,
                    "train_acc": e.train_acc,
                    "val_loss": e.val_loss,
                    "val_acc": e.val_acc,
                }
                for i, e in enumerate(self.epochs)
            ],
            "stopped_epoch": self.stopped_epoch,
            "best_epoch": self.best_epoch,
        }


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 20
    seed: int = 0


def scores_for(model: SiameseModel, samples: Sequence[Sample]) -> np.ndarray:
    return np.array(
        [forward(model, s.ctx_seq, s.tok_seq, mode="infer")[0] for s in samples]
    )


def metrics_from_scores(
    scores: np.ndarray, labels: np.ndarray, threshold: float = 0.5
) -> Metrics:
    """Standard binary metrics; a score at or above threshold predicts CG."""
    if len(scores) == 0:
        raise ValueError("cannot compute metrics on an empty sample set")
    preds = (np.asarray(scores) >= threshold).astype(int)
    labels = np.asarray(labels)
    tp = int(np.sum((preds == 1) & (labels == 1)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    tn = int(np.sum((preds == 0) & (labels == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2 * precision * recall / (precision + recall) if precision + recall else 0.0
    )
    loss = float(np.mean([bce_loss(s, y) for s, y in zip(scores, labels)]))
    return Metrics(
        accuracy=(tp + tn) / len(scores),
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp, fp=fp, fn=fn, tn=tn,
        loss=loss,
    )


def evaluate(model: SiameseModel, samples: Sequence[Sample]) -> Metrics:
    """Threshold-0.5 metrics with CG (fake) as the positive class."""
    if not samples:
        raise ValueError("cannot evaluate an empty sample set")
    scores = scores_for(model, samples)
    labels = np.array([s.label for s in samples])
    return metrics_from_scores(scores, labels)


def train(
    model: SiameseModel,
    features: dict[int, Sample],
    split: Split,
    config: TrainConfig,
) -> tuple[SiameseModel, TrainReport]:
    """Minibatch Adam with early stopping on validation loss.

    Tolerates up to ``patience`` consecutive non-improving epochs and
    returns the parameters of the best epoch.  ``stopped_epoch`` is the
    last epoch still inside the patience window; the full per-epoch history
    is retained either way.
    """
    train_samples = [features[r.id] for r in split.train]
    val_samples = [features[r.id] for r in split.validation]
    if not train_samples:
        raise ConfigurationError("empty training set")
    if not val_samples:
        raise ConfigurationError("empty validation set")

    adam = AdamState(lr=config.learning_rate)
    dropout_rng = np.random.default_rng(config.seed)
    history: list[EpochStats] = []
    best_loss = np.inf
    best_epoch = 0
    best_params: dict[str, np.ndarray] = {
        name: model.params[name].copy() for name in model.param_names()
    }

    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        order = np.random.default_rng(config.seed + epoch).permutation(
            len(train_samples)
        )
        epoch_loss = 0.0
        epoch_hits = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            grads_sum: dict[str, np.ndarray] | None = None
            for sample_idx in batch:
                sample = train_samples[sample_idx]
                score, cache = forward(
                    model, sample.ctx_seq, sample.tok_seq, mode="train",
                    rng=dropout_rng,
                )
                epoch_loss += bce_loss(score, sample.label)
                epoch_hits += int((score >= 0.5) == bool(sample.label))
                grads = backward(model, cache, sample.label)
                if grads_sum is None:
                    grads_sum = grads
                else:
                    for name in grads_sum:
                        grads_sum[name] += grads[name]
            assert grads_sum is not None
            for name in grads_sum:
                grads_sum[name] /= len(batch)
            adam_update(model.params, grads_sum, adam)

        val = evaluate(model, val_samples)
        stats = EpochStats(
            train_loss=epoch_loss / len(train_samples),
            train_acc=epoch_hits / len(train_samples),
            val_loss=val.loss,
            val_acc=val.accuracy,
        )
        history.append(stats)
        logger.info(
            "epoch %d: train loss %.4f acc %.3f | val loss %.4f acc %.3f",
            epoch, stats.train_loss, stats.train_acc, stats.val_loss, stats.val_acc,
        )
        if val.loss < best_loss:
            best_loss = val.loss
            best_epoch = epoch
            best_params = {name: model.params[name].copy() for name in model.param_names()}
        elif epoch - best_epoch >= max(config.patience, 1):
            break

    model.params = best_params
    report = TrainReport(
        epochs=history,
        stopped_epoch=min(epoch, best_epoch + config.patience),
        best_epoch=best_epoch,
    )
    return model, report


def save_model(model: SiameseModel, path: str | Path) -> None:
    """Checkpoint: magic, version, hyperparameter block, then parameter
    tensors in declared order as little-endian float32."""
    with Path(path).open("wb") as fh:
        fh.write(SIAM_MAGIC)
        fh.write(struct.pack("<I", SIAM_VERSION))
        fh.write(
            struct.pack(
                "<IIB d q I",
                model.input_dim,
                model.hidden_dim,
                1 if model.shared else 0,
                model.dropout_rate,
                model.seed,
                len(model.head),
            )
        )
        for layer in model.head:
            fh.write(
                struct.pack(
                    "<IIB", layer.out_dim, layer.in_dim, _ACT_CODES[layer.activation]
                )
            )
        for name in model.param_names():
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f4").tobytes())


def load_model(path: str | Path) -> SiameseModel:
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != SIAM_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {SIAM_MAGIC!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != SIAM_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        block = struct.Struct("<IIB d q I")
        input_dim, hidden_dim, shared, dropout_rate, seed, n_layers = block.unpack(
            fh.read(block.size)
        )
        head = []
        for _ in range(n_layers):
            out_dim, in_dim, act = struct.unpack("<IIB", fh.read(9))
            head.append(HeadLayer(out_dim=out_dim, in_dim=in_dim, activation=_ACT_NAMES[act]))
        model = SiameseModel(
            input_dim=input_dim,
            hidden_dim=hidden_dim,
            head=head,
            dropout_rate=float(dropout_rate),
            shared=bool(shared),
            seed=seed,
            params={},
        )
        shapes: dict[str, tuple[int, ...]] = {}
        for prefix in model.branch_prefixes():
            for gate in GATES:
                shapes[f"{prefix}.W{gate}"] = (hidden_dim, input_dim)
                shapes[f"{prefix}.U{gate}"] = (hidden_dim, hidden_dim)
                shapes[f"{prefix}.b{gate}"] = (hidden_dim,)
        for i, layer in enumerate(head):
            shapes[f"head{i}.W"] = (layer.out_dim, layer.in_dim)
            shapes[f"head{i}.b"] = (layer.out_dim,)
        for name in model.param_names():
            shape = shapes[name]
            n_bytes = 4 * int(np.prod(shape))
            raw = fh.read(n_bytes)
            if len(raw) < n_bytes:
                raise ValueError(f"{path}: truncated tensor {name}")
            model.params[name] = (
                np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)
            )
        trailing = fh.read(1)
        if trailing:
            raise ValueError(f"{path}: trailing bytes after last tensor")
    return model


def clone_model(model: SiameseModel) -> SiameseModel:
    out = copy.copy(model)
    out.params = {name: value.copy() for name, value in model.params.items()}
    out.head = list(model.head)
    return out
