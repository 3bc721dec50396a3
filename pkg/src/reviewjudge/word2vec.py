"""Skip-gram word embeddings with negative sampling, trained by plain SGD.

Input vectors (the published embedding) start uniform in +/-0.5/dim, output
vectors start at zero.  Training draws a per-center window size uniformly
from [1, window] unless fixed_window is set, and samples negatives from the
unigram distribution raised to 0.75.  With workers=1 and a fixed seed the
whole run is deterministic; more workers trade determinism for speed with
unsynchronized updates, as is conventional for this family of models.
"""

from __future__ import annotations

import logging
import struct
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .preprocess import TokenizedReview

logger = logging.getLogger(__name__)

NEGATIVE_POWER = 0.75
W2V_MAGIC = b"W2V1"


class VocabularyError(Exception):
    pass


@dataclass(frozen=True)
class Vocabulary:
    token_to_index: dict[str, int]
    counts: dict[str, int]
    min_count: int

    def __len__(self) -> int:
        return len(self.token_to_index)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    @property
    def tokens(self) -> list[str]:
        ordered = sorted(self.token_to_index.items(), key=lambda kv: kv[1])
        return [token for token, _ in ordered]

    def index_counts(self) -> np.ndarray:
        out = np.zeros(len(self), dtype=np.float64)
        for token, idx in self.token_to_index.items():
            out[idx] = self.counts[token]
        return out


@dataclass(frozen=True)
class W2VConfig:
    dim: int = 384
    window: int = 5
    min_count: int = 1
    workers: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 1
    fixed_window: bool = False

    def __post_init__(self):
        if self.dim <= 0 or self.window < 1 or self.negatives < 1:
            raise ValueError("dim, window, and negatives must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class EmbeddingMatrix:
    tokens: list[str]
    input_vectors: np.ndarray  # (V, dim), the published embedding
    output_vectors: np.ndarray | None = None  # context side, training only
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def vector(self, vocab: Vocabulary, token: str) -> np.ndarray:
        return self.input_vectors[vocab.token_to_index[token]]


def build_vocab(
    corpus: Iterable[TokenizedReview | Sequence[str]], min_count: int = 1
) -> Vocabulary:
    """Retain tokens with frequency >= min_count, indexed by descending
    frequency with lexicographic tie-break."""
    counts: Counter[str] = Counter()
    for item in corpus:
        tokens = item.tokens if isinstance(item, TokenizedReview) else item
        counts.update(tokens)
    kept = {t: c for t, c in counts.items() if c >= min_count}
    ordered = sorted(kept.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(
        token_to_index={t: i for i, (t, _) in enumerate(ordered)},
        counts=kept,
        min_count=min_count,
    )


def training_pairs(
    indices: Sequence[int],
    window: int,
    rng: np.random.Generator,
    fixed_window: bool = False,
) -> list[tuple[int, int]]:
    """(center, context) position pairs with a per-center dynamic window.

    ``indices`` are vocabulary indices with out-of-vocab tokens already
    dropped.  Pairs are emitted center-position ascending, context left to
    right, boundary-clipped, never self-paired.
    """
    pairs = []
    for t in range(len(indices)):
        w = window if fixed_window else int(rng.integers(1, window + 1))
        for j in range(max(0, t - w), min(len(indices), t + w + 1)):
            if j != t:
                pairs.append((indices[t], indices[j]))
    return pairs


def _noise_distribution(vocab: Vocabulary) -> np.ndarray:
    weights = vocab.index_counts() ** NEGATIVE_POWER
    return weights / weights.sum()


def negative_sample(
    noise: Vocabulary | np.ndarray, rng: np.random.Generator, k: int, exclude: int
) -> np.ndarray:
    """k indices from the 0.75-power unigram distribution, resampling any
    draw that collides with ``exclude``.  Duplicates among the k are fine.

    ``noise`` is a Vocabulary or, for tight loops, a cdf from
    make_noise_cdf so the distribution is not rebuilt per draw."""
    noise_cdf = make_noise_cdf(noise) if isinstance(noise, Vocabulary) else noise
    draws = np.searchsorted(noise_cdf, rng.random(k), side="right")
    while True:
        hits = draws == exclude
        if not hits.any():
            return draws
        draws[hits] = np.searchsorted(noise_cdf, rng.random(int(hits.sum())), side="right")


def make_noise_cdf(vocab: Vocabulary) -> np.ndarray:
    if len(vocab) < 2:
        raise VocabularyError("negative sampling needs a vocabulary of size >= 2")
    return np.cumsum(_noise_distribution(vocab))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def pair_loss(
    v_center: np.ndarray, u_context: np.ndarray, u_negatives: np.ndarray
) -> float:
    """Negative-sampling loss for one (center, context) pair."""
    pos = float(u_context @ v_center)
    neg = u_negatives @ v_center
    eps = 1e-12
    return -np.log(_sigmoid(pos) + eps) - float(np.sum(np.log(_sigmoid(-neg) + eps)))


def pair_gradients(
    v_center: np.ndarray, u_context: np.ndarray, u_negatives: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradients of pair_loss wrt (v_center, u_context, u_negatives)."""
    g_pos = _sigmoid(float(u_context @ v_center)) - 1.0
    g_neg = _sigmoid(u_negatives @ v_center)  # (k,)
    grad_v = g_pos * u_context + g_neg @ u_negatives
    grad_u = g_pos * v_center
    grad_neg = np.outer(g_neg, v_center)
    return grad_v, grad_u, grad_neg


def _corpus_indices(
    corpus: Iterable[TokenizedReview | Sequence[str]], vocab: Vocabulary
) -> list[np.ndarray]:
    t2i = vocab.token_to_index
    sentences = []
    for item in corpus:
        tokens = item.tokens if isinstance(item, TokenizedReview) else item
        idx = [t2i[t] for t in tokens if t in t2i]
        if len(idx) >= 2:
            sentences.append(np.asarray(idx, dtype=np.int64))
    return sentences


def _train_sentences(
    sentences: list[np.ndarray],
    inp: np.ndarray,
    out: np.ndarray,
    config: W2VConfig,
    noise_cdf: np.ndarray,
    rng: np.random.Generator,
    progress: dict,
    total_centers: int,
) -> tuple[float, int]:
    """One pass over ``sentences`` updating inp/out in place (SGD)."""
    loss_sum = 0.0
    n_pairs = 0
    lr0 = config.learning_rate
    k = config.negatives
    # sign template turns -log sig(s0) - sum log sig(-s_neg) into one
    # softplus evaluation: loss = sum logaddexp(0, sign * scores)
    signs = np.ones(k + 1)
    signs[0] = -1.0
    for sentence in sentences:
        for t in range(len(sentence)):
            progress["centers"] += 1
            frac = progress["centers"] / max(1, total_centers)
            lr = lr0 * max(0.1, 1.0 - 0.9 * frac)
            w = (
                config.window
                if config.fixed_window
                else int(rng.integers(1, config.window + 1))
            )
            lo = max(0, t - w)
            hi = min(len(sentence), t + w + 1)
            m = hi - lo - 1
            if m <= 0:
                continue
            # one negative block per center keeps rng consumption deterministic
            neg_block = np.searchsorted(
                noise_cdf, rng.random((m, k)), side="right"
            )
            center = sentence[t]
            v_c = inp[center]
            pair = 0
            rows = np.empty(k + 1, dtype=np.int64)
            for j in range(lo, hi):
                if j == t:
                    continue
                context = sentence[j]
                negs = neg_block[pair]
                pair += 1
                while True:
                    hits = negs == context
                    if not hits.any():
                        break
                    negs[hits] = np.searchsorted(
                        noise_cdf, rng.random(int(hits.sum())), side="right"
                    )
                rows[0] = context
                rows[1:] = negs
                u = out[rows]  # (k+1, dim)
                scores = u @ v_c
                loss_sum += np.logaddexp(0.0, signs * scores).sum()
                n_pairs += 1
                coef = _sigmoid(scores)
                coef[0] -= 1.0  # positive target 1, negatives target 0
                grad_v = coef @ u
                # scatter-add: negatives can repeat within a draw
                np.add.at(out, rows, (-lr * coef)[:, None] * v_c)
                inp[center] = v_c = v_c - lr * grad_v
    return loss_sum, n_pairs


def train_skipgram(
    corpus: Iterable[TokenizedReview | Sequence[str]],
    config: W2VConfig,
    vocab: Vocabulary | None = None,
) -> tuple[EmbeddingMatrix, Vocabulary]:
    """Train embeddings over the corpus; returns the matrix and vocabulary.

    Epoch-averaged losses are kept on the matrix for diagnostics.  Raises
    VocabularyError when nothing survives min_count.
    """
    corpus = list(corpus)
    if vocab is None:
        vocab = build_vocab(corpus, config.min_count)
    if len(vocab) == 0:
        raise VocabularyError("empty vocabulary: nothing to train")

    rng = np.random.default_rng(config.seed)
    dim = config.dim
    inp = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(vocab), dim))
    out = np.zeros((len(vocab), dim))
    matrix = EmbeddingMatrix(tokens=vocab.tokens, input_vectors=inp, output_vectors=out)
    if config.epochs == 0 or len(vocab) < 2:
        return matrix, vocab

    sentences = _corpus_indices(corpus, vocab)
    if not sentences:
        return matrix, vocab
    noise_cdf = make_noise_cdf(vocab)
    total_centers = sum(len(s) for s in sentences) * config.epochs
    progress = {"centers": 0}

    workers = max(1, config.workers)
    for epoch in range(config.epochs):
        if workers == 1:
            loss_sum, n_pairs = _train_sentences(
                sentences, inp, out, config, noise_cdf, rng, progress, total_centers
            )
        else:
            shards = [sentences[i::workers] for i in range(workers)]
            results: list[tuple[float, int]] = [(0.0, 0)] * workers
            seeds = rng.integers(0, 2**63 - 1, size=workers)

            def run(i: int) -> None:
                results[i] = _train_sentences(
                    shards[i],
                    inp,
                    out,
                    config,
                    noise_cdf,
                    np.random.default_rng(int(seeds[i])),
                    progress,
                    total_centers,
                )

            threads = [threading.Thread(target=run, args=(i,)) for i in range(workers)]
            for th in threads:
                th.start()
            for th in threads:
                th.join()
            loss_sum = sum(r[0] for r in results)
            n_pairs = sum(r[1] for r in results)

        if not (np.isfinite(inp).all() and np.isfinite(out).all()):
            raise FloatingPointError(f"non-finite embedding after epoch {epoch}")
        matrix.epoch_losses.append(loss_sum / max(1, n_pairs))
        logger.info(
            "w2v epoch %d/%d: mean pair loss %.4f",
            epoch + 1,
            config.epochs,
            matrix.epoch_losses[-1],
        )
    return matrix, vocab


def embed_tokens(
    review: TokenizedReview | Sequence[str], matrix: EmbeddingMatrix, vocab: Vocabulary
) -> np.ndarray:
    """Ordered in-vocabulary token vectors, shape (n, dim); OOV skipped."""
    tokens = review.tokens if isinstance(review, TokenizedReview) else review
    rows = [vocab.token_to_index[t] for t in tokens if t in vocab]
    if not rows:
        return np.empty((0, matrix.dim))
    return matrix.input_vectors[rows]


def nearest_neighbors(
    token: str, k: int, matrix: EmbeddingMatrix, vocab: Vocabulary
) -> list[tuple[str, float]]:
    """k most cosine-similar vocabulary tokens, query excluded."""
    if token not in vocab:
        raise KeyError(f"token {token!r} not in vocabulary")
    if k <= 0:
        return []
    idx = vocab.token_to_index[token]
    vectors = matrix.input_vectors
    norms = np.linalg.norm(vectors, axis=1)
    norms[norms == 0] = 1.0
    sims = (vectors @ vectors[idx]) / (norms * max(norms[idx], 1e-30))
    order = sorted(range(len(vocab)), key=lambda i: (-sims[i], matrix.tokens[i]))
    out = []
    for i in order:
        if i == idx:
            continue
        out.append((matrix.tokens[i], float(sims[i])))
        if len(out) == k:
            break
    return out


def save_embeddings(path: str | Path, matrix: EmbeddingMatrix) -> None:
    """Binary format: magic, u32 V, u32 dim, then per token a u16 byte
    length, UTF-8 token, and dim little-endian f32 values."""
    vecs = np.ascontiguousarray(matrix.input_vectors, dtype="<f4")
    with Path(path).open("wb") as fh:
        fh.write(W2V_MAGIC)
        fh.write(struct.pack("<II", len(matrix.tokens), matrix.dim))
        for token, row in zip(matrix.tokens, vecs):
            raw = token.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(row.tobytes())


def load_embeddings(path: str | Path) -> tuple[EmbeddingMatrix, Vocabulary]:
    """Read the binary format back; counts are not stored, so the returned
    vocabulary carries zero counts and is for lookup only."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != W2V_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {W2V_MAGIC!r}")
        header = fh.read(8)
        if len(header) < 8:
            raise ValueError(f"{path}: truncated header")
        count, dim = struct.unpack("<II", header)
        tokens = []
        vectors = np.empty((count, dim), dtype="<f4")
        for i in range(count):
            raw_len = fh.read(2)
            if len(raw_len) < 2:
                raise ValueError(f"{path}: truncated at record {i}")
            (token_len,) = struct.unpack("<H", raw_len)
            token = fh.read(token_len).decode("utf-8")
            data = fh.read(4 * dim)
            if len(data) < 4 * dim:
                raise ValueError(f"{path}: truncated vector at record {i}")
            tokens.append(token)
            vectors[i] = np.frombuffer(data, dtype="<f4")
    matrix = EmbeddingMatrix(tokens=tokens, input_vectors=vectors.astype(np.float64))
    vocab = Vocabulary(
        token_to_index={t: i for i, t in enumerate(tokens)},
        counts={t: 0 for t in tokens},
        min_count=0,
    )
    return matrix, vocab


def save_embeddings_text(path: str | Path, matrix: EmbeddingMatrix) -> None:
    """Interop text format: token then space-separated float values."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for token, row in zip(matrix.tokens, matrix.input_vectors):
            fh.write(token + " " + " ".join(repr(float(x)) for x in row) + "\n")
