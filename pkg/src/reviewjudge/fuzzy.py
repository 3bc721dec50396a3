"""Fuzzy decision stage: fuzzify, max-aggregate, centroid defuzzify, decide.

Single-input Mamdani setup over the realness axis: 0 means fake, 1 means
real.  Input and output spaces share the same two piecewise-linear
membership sets ("fake", "real"); the rule base is the identity pair, so
the clipped output region is built directly from the two memberships.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Label

GRID_POINTS = 1001
HISTOGRAM_BINS = 50


class MembershipError(ValueError):
    pass


@dataclass(frozen=True)
class MembershipFunction:
    name: str
    points: tuple[tuple[float, float], ...]  # (x, mu), x ascending over [0, 1]

    def __post_init__(self):
        xs = [x for x, _ in self.points]
        mus = [mu for _, mu in self.points]
        if len(xs) < 2:
            raise MembershipError(f"{self.name}: need at least 2 breakpoints")
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise MembershipError(f"{self.name}: breakpoints must span [0, 1]")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise MembershipError(f"{self.name}: x values must be strictly ascending")
        if any(not 0.0 <= mu <= 1.0 for mu in mus):
            raise MembershipError(f"{self.name}: membership values must be in [0, 1]")
        object.__setattr__(self, "_xs", np.array(xs))
        object.__setattr__(self, "_mus", np.array(mus))

    def __call__(self, x: float | np.ndarray) -> float | np.ndarray:
        return np.interp(x, self._xs, self._mus)


@dataclass(frozen=True)
class FuzzySetPair:
    fake: MembershipFunction
    real: MembershipFunction


def check_coverage(sets: FuzzySetPair) -> None:
    """Reject set pairs that leave part of [0, 1] with zero membership.

    Applied when loading a config file; direct construction stays permissive
    so the defuzzification fallback for broken coverage remains reachable.
    """
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    if not np.all(np.maximum(sets.fake(grid), sets.real(grid)) > 0.0):
        raise MembershipError("sets leave part of [0, 1] with zero membership")


def default_sets() -> FuzzySetPair:
    """Mirror-symmetric trapezoids crossing at 0.5: fake covers the low end
    of the realness axis, real the high end."""
    return FuzzySetPair(
        fake=MembershipFunction(
            "fake", ((0.0, 1.0), (0.35, 1.0), (0.65, 0.0), (1.0, 0.0))
        ),
        real=MembershipFunction(
            "real", ((0.0, 0.0), (0.35, 0.0), (0.65, 1.0), (1.0, 1.0))
        ),
    )


@dataclass(frozen=True)
class FuzzyDecision:
    score_in: float
    mu_fake: float
    mu_real: float
    aggregate: float
    crisp: float
    label: Label
    threshold: float
    confidence: float

    def to_dict(self) -> dict:
        return {
            "score_in": self.score_in,
            "mu_fake": self.mu_fake,
            "mu_real": self.mu_real,
            "aggregate": self.aggregate,
            "crisp": self.crisp,
            "label": self.label.value,
            "threshold": self.threshold,
            "confidence": self.confidence,
        }


def fuzzify(score: float, sets: FuzzySetPair) -> tuple[float, float]:
    """Membership degrees (mu_fake, mu_real) for a score in [0, 1]."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score must be in [0, 1], got {score}")
    return float(sets.fake(score)), float(sets.real(score))


def aggregate(mu_fake: float, mu_real: float) -> float:
    if not (0.0 <= mu_fake <= 1.0 and 0.0 <= mu_real <= 1.0):
        raise ValueError("membership degrees must be in [0, 1]")
    return max(mu_fake, mu_real)


def defuzzify(score: float, sets: FuzzySetPair) -> float:
    """Centroid of the clipped output region on a 1001-point grid.

    Output sets are the input sets reused over the output domain, clipped
    at the fuzzified degrees and combined pointwise by max.  A degenerate
    all-zero region falls back to passing the score through unchanged.
    """
    mu_fake, mu_real = fuzzify(score, sets)
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    region = np.maximum(
        np.minimum(sets.fake(grid), mu_fake), np.minimum(sets.real(grid), mu_real)
    )
    total = region.sum()
    if total == 0.0:
        return score
    return float((grid * region).sum() / total)


def decide(crisp: float, threshold: float = 0.5) -> tuple[Label, float]:
    """Crisp value at or above the threshold reads as Real (OG).

    Confidence is the distance from the threshold, normalized by the longer
    side of the split so it reaches 1 at whichever endpoint is farther.
    """
    if not 0.0 <= crisp <= 1.0:
        raise ValueError(f"crisp value must be in [0, 1], got {crisp}")
    label = Label.OG if crisp >= threshold else Label.CG
    confidence = abs(crisp - threshold) / max(threshold, 1.0 - threshold)
    return label, confidence


def classify_score(
    score: float, sets: FuzzySetPair, threshold: float = 0.5
) -> FuzzyDecision:
    mu_fake, mu_real = fuzzify(score, sets)
    crisp = defuzzify(score, sets)
    label, confidence = decide(crisp, threshold)
    return FuzzyDecision(
        score_in=score,
        mu_fake=mu_fake,
        mu_real=mu_real,
        aggregate=aggregate(mu_fake, mu_real),
        crisp=crisp,
        label=label,
        threshold=threshold,
        confidence=confidence,
    )


def classify_batch(
    scores: Sequence[float], sets: FuzzySetPair, threshold: float = 0.5
) -> tuple[list[FuzzyDecision], list[int]]:
    """Per-score decisions plus a 50-bin histogram of crisp values; an empty
    batch yields an empty histogram."""
    decisions = [classify_score(float(s), sets, threshold) for s in scores]
    if not decisions:
        return [], []
    histogram = [0] * HISTOGRAM_BINS
    for d in decisions:
        bin_idx = min(int(d.crisp * HISTOGRAM_BINS), HISTOGRAM_BINS - 1)
        histogram[bin_idx] += 1
    return decisions, histogram


def load_membership_config(path: str | Path) -> tuple[FuzzySetPair, float]:
    """JSON config: {"sets": {"fake": [[x, mu], ...], "real": [...]},
    "threshold": number}; validated against the membership invariants."""
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        fake_points = tuple((float(x), float(mu)) for x, mu in raw["sets"]["fake"])
        real_points = tuple((float(x), float(mu)) for x, mu in raw["sets"]["real"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MembershipError(f"{path}: malformed membership config: {exc}") from exc
    sets = FuzzySetPair(
        fake=MembershipFunction("fake", fake_points),
        real=MembershipFunction("real", real_points),
    )
    check_coverage(sets)
    threshold = float(raw.get("threshold", 0.5))
    if not 0.0 <= threshold <= 1.0:
        raise MembershipError(f"{path}: threshold must be in [0, 1]")
    return sets, threshold
