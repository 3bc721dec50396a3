"""Corpus loading, category statistics, and train/validation splitting.

The dataset is a CSV of product reviews labeled CG (computer generated,
"fake") or OG (original, user written).  Loading assigns dense integer ids
in row order; everything downstream addresses reviews by that id.
"""

from __future__ import annotations

import csv
import logging
import random
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("category", "rating", "label", "text")

# The published dataset names its text column "text_"; accept it as an alias.
_COLUMN_ALIASES = {"text_": "text"}


class CorpusError(Exception):
    """Base class for corpus problems."""


class SchemaError(CorpusError):
    """The CSV header is missing a required column."""


class RecordError(CorpusError):
    """A data row is malformed (bad label, empty text)."""


class Label(Enum):
    CG = "CG"
    OG = "OG"

    @property
    def target(self) -> int:
        # CG is the positive class: a score of 1 means "fake".
        return 1 if self is Label.CG else 0

    @classmethod
    def parse(cls, raw: str) -> "Label":
        value = raw.strip().upper()
        if value == "CG":
            return cls.CG
        if value == "OG":
            return cls.OG
        raise ValueError(f"unknown label {raw!r} (expected CG or OG)")


@dataclass(frozen=True)
class Review:
    id: int
    category: str
    rating: float
    text: str
    label: Label


@dataclass(frozen=True)
class CategoryStats:
    fake_count: int
    fake_avg_len: float
    real_count: int
    real_avg_len: float


@dataclass(frozen=True)
class CorpusStats:
    per_category: dict[str, CategoryStats]
    fake_total: int
    real_total: int
    length_unit: str

    def to_dict(self) -> dict:
        return {
            "length_unit": self.length_unit,
            "categories": {
                name: {
                    "fake_count": s.fake_count,
                    "fake_avg_len": round(s.fake_avg_len),
                    "real_count": s.real_count,
                    "real_avg_len": round(s.real_avg_len),
                }
                for name, s in self.per_category.items()
            },
            "fake_total": self.fake_total,
            "real_total": self.real_total,
        }


@dataclass(frozen=True)
class Split:
    train: list[Review]
    validation: list[Review]
    fraction: float
    seed: int


def load_reviews(path: str | Path, skip_invalid: bool = False) -> list[Review]:
    """Read the review CSV into Review records.

    Columns are matched by name (order free); ids are assigned in row order
    starting at 0.  Rows with an unparseable label or empty text raise
    RecordError unless ``skip_invalid``, in which case they are logged and
    dropped (dropped rows still do not consume an id).
    """
    path = Path(path)
    # utf-8-sig: a leading BOM must not corrupt the first header name
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, no header row")
        header = {_COLUMN_ALIASES.get(name, name): name for name in reader.fieldnames}
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise SchemaError(f"{path}: missing required column {column!r}")

        reviews: list[Review] = []
        for row_no, row in enumerate(reader, start=2):  # header is line 1
            try:
                text = (row[header["text"]] or "").strip()
                if not text:
                    raise ValueError("empty review text")
                label = Label.parse(row[header["label"]] or "")
                rating = float(row[header["rating"]] or "nan")
            except ValueError as exc:
                if skip_invalid:
                    logger.warning("%s row %d skipped: %s", path.name, row_no, exc)
                    continue
                raise RecordError(f"{path}: row {row_no}: {exc}") from exc
            reviews.append(
                Review(
                    id=len(reviews),
                    category=row[header["category"]].strip(),
                    rating=rating,
                    text=text,
                    label=label,
                )
            )
    return reviews


def _length(text: str, unit: str) -> int:
    if unit == "chars":
        return len(text)
    if unit == "tokens":
        return len(text.split())
    raise ValueError(f"unknown length unit {unit!r} (expected chars or tokens)")


def corpus_stats(reviews: list[Review], length_unit: str = "chars") -> CorpusStats:
    """Per-category counts and average review lengths, split by label."""
    counts: dict[str, dict[Label, list[int]]] = defaultdict(
        lambda: {Label.CG: [], Label.OG: []}
    )
    for review in reviews:
        counts[review.category][review.label].append(_length(review.text, length_unit))

    per_category: dict[str, CategoryStats] = {}
    for category in sorted(counts):
        fake = counts[category][Label.CG]
        real = counts[category][Label.OG]
        per_category[category] = CategoryStats(
            fake_count=len(fake),
            fake_avg_len=sum(fake) / len(fake) if fake else 0.0,
            real_count=len(real),
            real_avg_len=sum(real) / len(real) if real else 0.0,
        )
    return CorpusStats(
        per_category=per_category,
        fake_total=sum(s.fake_count for s in per_category.values()),
        real_total=sum(s.real_count for s in per_category.values()),
        length_unit=length_unit,
    )


def format_stats_table(stats: CorpusStats) -> str:
    """Plain-text table in the dataset-summary layout (counts and lengths)."""
    rows = [
        ("Category", "Fake", "Avg Len", "Real", "Avg Len"),
    ]
    for name, s in stats.per_category.items():
        rows.append(
            (
                name,
                str(s.fake_count),
                str(round(s.fake_avg_len)),
                str(s.real_count),
                str(round(s.real_avg_len)),
            )
        )
    rows.append(("Total Reviews", str(stats.fake_total), "", str(stats.real_total), ""))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = []
    for row in rows:
        lines.append(
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        )
    return "\n".join(lines)


def split_train_validation(
    reviews: list[Review], fraction: float, seed: int
) -> Split:
    """Deterministic stratified split: shuffle per label, then cut.

    The validation size is round(fraction * N) exactly; per-label quotas are
    allocated by largest remainder so both parts keep the corpus label
    balance as closely as the rounding grain allows.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if len(reviews) < 2:
        raise ValueError("need at least 2 reviews to split")

    n_val = round(fraction * len(reviews))
    n_val = max(1, min(len(reviews) - 1, n_val))

    groups: dict[Label, list[Review]] = defaultdict(list)
    for review in reviews:
        groups[review.label].append(review)

    # Largest-remainder allocation of the validation quota across labels.
    ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0].value))
    quotas = {label: fraction * len(members) for label, members in ordered}
    alloc = {label: int(quotas[label]) for label, _ in ordered}
    remainder = n_val - sum(alloc.values())
    by_frac = sorted(
        ordered, key=lambda kv: (alloc[kv[0]] - quotas[kv[0]], kv[0].value)
    )
    for label, members in by_frac:
        if remainder <= 0:
            break
        if alloc[label] < len(members):
            alloc[label] += 1
            remainder -= 1

    rng = random.Random(seed)
    train: list[Review] = []
    validation: list[Review] = []
    for label, members in ordered:
        shuffled = list(members)
        rng.shuffle(shuffled)
        validation.extend(shuffled[: alloc[label]])
        train.extend(shuffled[alloc[label] :])

    train.sort(key=lambda r: r.id)
    validation.sort(key=lambda r: r.id)
    return Split(train=train, validation=validation, fraction=fraction, seed=seed)
