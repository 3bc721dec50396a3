"""Pipeline configuration: INI-style file with sections, flags override.

Every stochastic component takes its seed from one top-level value so a
whole run is reproducible from the config alone.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .word2vec import W2VConfig
from .siamese import TrainConfig

DEFAULT_SEED = 42


class ConfigError(Exception):
    pass


@dataclass
class ModelConfig:
    hidden_dim: int = 64
    head_hidden: int = 32
    dropout: float = 0.3
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 20
    max_seq_len: int = 200
    val_fraction: float = 0.3
    shared_weights: bool = False

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=seed,
        )


@dataclass
class PipelineConfig:
    dataset_path: Path | None = None
    stopwords_path: Path | None = None
    w2v: W2VConfig = field(default_factory=W2VConfig)
    context_mode: str = "fallback"  # fallback | store
    context_store: Path | None = None
    model: ModelConfig = field(default_factory=ModelConfig)
    fuzzy_config: Path | None = None
    fuzzy_threshold: float = 0.5
    seed: int | None = None  # resolved by the CLI: flag > config > env > default
    output_dir: Path = Path("out")
    length_unit: str = "chars"
    workers: int | None = None  # flag/[run] override for the w2v worker count

    def validate(self, need_dataset: bool = True) -> None:
        if need_dataset:
            if self.dataset_path is None:
                raise ConfigError("dataset: no dataset path configured")
            if not self.dataset_path.exists():
                raise ConfigError(f"dataset not found: {self.dataset_path}")
        for name, path in (
            ("stopwords", self.stopwords_path),
            ("fuzzy config", self.fuzzy_config),
        ):
            if path is not None and not path.exists():
                raise ConfigError(f"{name} file not found: {path}")
        if self.context_mode not in ("fallback", "store"):
            raise ConfigError(f"context mode must be fallback or store, got {self.context_mode!r}")
        if self.context_mode == "store":
            if self.context_store is None:
                raise ConfigError("context store: mode is 'store' but no path configured")
            if not self.context_store.exists():
                raise ConfigError(f"context store not found: {self.context_store}")
        if self.length_unit not in ("chars", "tokens"):
            raise ConfigError(f"length unit must be chars or tokens, got {self.length_unit!r}")


def _get(parser: configparser.ConfigParser, section: str, option: str, cast, default):
    if not parser.has_option(section, option):
        return default
    raw = parser.get(section, option)
    try:
        if cast is bool:
            return parser.getboolean(section, option)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {option}: bad value {raw!r}") from exc


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read the config file; missing file is an error, missing keys default."""
    cfg = PipelineConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read(path, encoding="utf-8")

    base = path.parent

    def as_path(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else base / p

    if parser.has_option("data", "dataset"):
        cfg.dataset_path = as_path(parser.get("data", "dataset"))
    if parser.has_option("data", "stopwords"):
        cfg.stopwords_path = as_path(parser.get("data", "stopwords"))

    cfg.w2v = W2VConfig(
        dim=_get(parser, "word2vec", "dim", int, 384),
        window=_get(parser, "word2vec", "window", int, 5),
        min_count=_get(parser, "word2vec", "min_count", int, 1),
        workers=_get(parser, "word2vec", "workers", int, 5),
        negatives=_get(parser, "word2vec", "negatives", int, 5),
        epochs=_get(parser, "word2vec", "epochs", int, 5),
        learning_rate=_get(parser, "word2vec", "learning_rate", float, 0.025),
        fixed_window=_get(parser, "word2vec", "fixed_window", bool, False),
    )

    cfg.context_mode = _get(parser, "context", "mode", str, "fallback")
    if parser.has_option("context", "store"):
        cfg.context_store = as_path(parser.get("context", "store"))

    cfg.model = ModelConfig(
        hidden_dim=_get(parser, "model", "hidden_dim", int, 64),
        head_hidden=_get(parser, "model", "head_hidden", int, 32),
        dropout=_get(parser, "model", "dropout", float, 0.3),
        learning_rate=_get(parser, "model", "learning_rate", float, 1e-3),
        batch_size=_get(parser, "model", "batch_size", int, 64),
        max_epochs=_get(parser, "model", "max_epochs", int, 100),
        patience=_get(parser, "model", "patience", int, 20),
        max_seq_len=_get(parser, "model", "max_seq_len", int, 200),
        val_fraction=_get(parser, "model", "val_fraction", float, 0.3),
        shared_weights=_get(parser, "model", "shared_weights", bool, False),
    )

    if parser.has_option("fuzzy", "config"):
        cfg.fuzzy_config = as_path(parser.get("fuzzy", "config"))
    cfg.fuzzy_threshold = _get(parser, "fuzzy", "threshold", float, 0.5)

    cfg.seed = _get(parser, "run", "seed", int, None)
    if parser.has_option("run", "output_dir"):
        cfg.output_dir = as_path(parser.get("run", "output_dir"))
    cfg.length_unit = _get(parser, "run", "length_unit", str, "chars")
    cfg.workers = _get(parser, "run", "workers", int, None)
    return cfg
