import csv
import os
from pathlib import Path

import numpy as np
import pytest

from reviewjudge.corpus import Label, Review

DATASET_ENV = "REVIEWJUDGE_DATASET"

# Word pools with disjoint vocabulary so a tiny corpus carries real signal.
FAKE_WORDS = ["great", "product", "amazing", "perfect", "awesome",
              "excellent", "wonderful", "fantastic", "superb", "brilliant"]
REAL_WORDS = ["battery", "screen", "arrived", "package", "month",
              "replacement", "warranty", "plastic", "button", "charger"]


def write_csv(path: Path, rows: list[dict]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["category", "rating", "label", "text"])
        writer.writeheader()
        writer.writerows(rows)
    return path


def synthetic_rows(n: int, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        fake = i % 2 == 0
        pool = FAKE_WORDS if fake else REAL_WORDS
        words = [pool[int(k)] for k in rng.integers(0, len(pool), size=8)]
        rows.append(
            {
                "category": "Books_5" if i % 4 < 2 else "Electronics_5",
                "rating": str(1 + i % 5),
                "label": "CG" if fake else "OG",
                "text": " ".join(words),
            }
        )
    return rows


@pytest.fixture
def tiny_csv(tmp_path):
    """Factory: write a small synthetic review CSV and return its path."""

    def make(n: int = 20, seed: int = 0, name: str = "reviews.csv") -> Path:
        return write_csv(tmp_path / name, synthetic_rows(n, seed))

    return make


def make_reviews(n: int, seed: int = 0) -> list[Review]:
    rows = synthetic_rows(n, seed)
    return [
        Review(
            id=i,
            category=row["category"],
            rating=float(row["rating"]),
            text=row["text"],
            label=Label.CG if row["label"] == "CG" else Label.OG,
        )
        for i, row in enumerate(rows)
    ]


@pytest.fixture(scope="session")
def dataset_path():
    """Path to the real 40K dataset, if the operator provided one."""
    candidates = [os.environ.get(DATASET_ENV)]
    candidates += [
        str(Path(__file__).resolve().parent.parent / "data" / name)
        for name in ("fake_reviews_dataset.csv", "fake_reviews.csv")
    ]
    for candidate in candidates:
        if candidate and Path(candidate).exists():
            return Path(candidate)
    pytest.skip(
        f"full dataset not available; set {DATASET_ENV} to the 40K review CSV to run"
    )
