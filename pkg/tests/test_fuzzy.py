import json

import numpy as np
import pytest

from reviewjudge.corpus import Label
from reviewjudge.fuzzy import (
    FuzzySetPair,
    MembershipError,
    MembershipFunction,
    aggregate,
    check_coverage,
    classify_batch,
    classify_score,
    decide,
    default_sets,
    defuzzify,
    fuzzify,
    load_membership_config,
)


def fine_centroid(mu_fake, mu_real, sets, n=2_000_001):
    """Independent quadrature oracle on a much finer grid (trapezoid rule)."""
    y = np.linspace(0.0, 1.0, n)
    region = np.maximum(
        np.minimum(sets.fake(y), mu_fake), np.minimum(sets.real(y), mu_real)
    )
    denom = np.trapezoid(region, y)
    if denom == 0.0:
        return None
    return float(np.trapezoid(y * region, y) / denom)


def broken_sets():
    """Deliberate coverage hole: both memberships are 0 on (0.4, 0.6)."""
    fake = MembershipFunction("fake", ((0.0, 1.0), (0.4, 0.0), (1.0, 0.0)))
    real = MembershipFunction("real", ((0.0, 0.0), (0.6, 0.0), (1.0, 1.0)))
    return FuzzySetPair(fake=fake, real=real)


class TestMembershipFunction:
    def test_interpolation(self):
        mf = MembershipFunction("m", ((0.0, 0.0), (0.5, 1.0), (1.0, 0.0)))
        assert mf(0.25) == pytest.approx(0.5)
        assert mf(0.5) == 1.0
        assert mf(0.75) == pytest.approx(0.5)

    def test_must_span_unit_interval(self):
        with pytest.raises(MembershipError, match="span"):
            MembershipFunction("m", ((0.1, 1.0), (1.0, 0.0)))

    def test_x_strictly_ascending(self):
        with pytest.raises(MembershipError, match="ascending"):
            MembershipFunction("m", ((0.0, 1.0), (0.5, 1.0), (0.5, 0.0), (1.0, 0.0)))

    def test_mu_in_unit_interval(self):
        with pytest.raises(MembershipError, match="membership"):
            MembershipFunction("m", ((0.0, 1.5), (1.0, 0.0)))


class TestFuzzify:
    def test_midpoint_symmetric(self):
        mu_fake, mu_real = fuzzify(0.5, default_sets())
        assert mu_fake == pytest.approx(mu_real)

    def test_zero_is_fully_fake(self):
        assert fuzzify(0.0, default_sets()) == (1.0, 0.0)

    def test_one_is_fully_real(self):
        assert fuzzify(1.0, default_sets()) == (0.0, 1.0)

    def test_out_of_range_rejected(self):
        for bad in (-0.01, 1.01):
            with pytest.raises(ValueError, match="score"):
                fuzzify(bad, default_sets())


class TestAggregate:
    def test_max(self):
        assert aggregate(0.2, 0.8) == 0.8
        assert aggregate(0.5, 0.5) == 0.5
        assert aggregate(0.0, 0.0) == 0.0

    def test_range_check(self):
        with pytest.raises(ValueError):
            aggregate(1.2, 0.0)


class TestDefuzzify:
    def test_balanced_memberships_give_center(self):
        assert defuzzify(0.5, default_sets()) == pytest.approx(0.5, abs=1e-9)

    def test_fully_real_matches_quadrature_oracle(self):
        # score 1.0 clips the real output set at 1 and the fake set at 0;
        # the centroid of the real trapezoid is 0.7425 analytically
        sets = default_sets()
        crisp = defuzzify(1.0, sets)
        oracle = fine_centroid(0.0, 1.0, sets)
        assert crisp == pytest.approx(oracle, abs=1e-3)
        assert crisp == pytest.approx(0.7425, abs=1e-3)

    def test_fully_fake_mirrors(self):
        sets = default_sets()
        crisp = defuzzify(0.0, sets)
        assert crisp == pytest.approx(1.0 - defuzzify(1.0, sets), abs=1e-9)

    def test_intermediate_scores_match_oracle(self):
        sets = default_sets()
        for score in np.linspace(0.0, 1.0, 21):
            mu_fake, mu_real = fuzzify(float(score), sets)
            oracle = fine_centroid(mu_fake, mu_real, sets)
            assert defuzzify(float(score), sets) == pytest.approx(oracle, abs=1e-3)

    def test_broken_coverage_falls_back_to_score(self):
        sets = broken_sets()
        assert defuzzify(0.5, sets) == 0.5
        assert defuzzify(0.47, sets) == 0.47


class TestDecide:
    def test_high_crisp_reads_real(self):
        label, confidence = decide(0.9, 0.5)
        assert label is Label.OG
        assert confidence == pytest.approx(0.8)

    def test_threshold_tie_reads_real(self):
        label, _ = decide(0.5, 0.5)
        assert label is Label.OG

    def test_low_crisp_reads_fake(self):
        label, _ = decide(0.1, 0.5)
        assert label is Label.CG

    def test_asymmetric_threshold_confidence(self):
        _, confidence = decide(1.0, 0.2)
        assert confidence == pytest.approx(1.0)


class TestClassifyBatch:
    def test_empty_input(self):
        decisions, histogram = classify_batch([], default_sets())
        assert decisions == [] and histogram == []

    def test_all_ones_read_real(self):
        decisions, _ = classify_batch([1.0] * 5, default_sets())
        assert all(d.label is Label.OG for d in decisions)

    def test_batch_matches_elementwise(self):
        scores = [0.0, 0.2, 0.5, 0.8, 1.0]
        batch, histogram = classify_batch(scores, default_sets())
        singles = [classify_score(s, default_sets()) for s in scores]
        assert batch == singles
        assert sum(histogram) == len(scores)
        assert len(histogram) == 50

    def test_decision_record_fields(self):
        (d,), _ = classify_batch([0.9], default_sets())
        assert d.aggregate == max(d.mu_fake, d.mu_real)
        assert 0.0 <= d.crisp <= 1.0
        payload = d.to_dict()
        assert payload["label"] in ("CG", "OG")


class TestProperties:
    def test_monotone_bounded_symmetric(self):
        sets = default_sets()
        scores = np.sort(np.random.default_rng(0).uniform(0.0, 1.0, 10_000))
        crisp = np.array([defuzzify(float(s), sets) for s in scores])
        assert np.all(crisp >= 0.0) and np.all(crisp <= 1.0)
        assert np.all(np.diff(crisp) >= -1e-12)  # monotone in the score
        # mirror symmetry of the default sets
        sample = scores[::100]
        mirrored = np.array([defuzzify(float(1.0 - s), sets) for s in sample])
        direct = np.array([defuzzify(float(s), sets) for s in sample])
        np.testing.assert_allclose(mirrored, 1.0 - direct, atol=1e-9)

    def test_endpoint_agreement(self):
        sets = default_sets()
        for score, expected in ((0.0, Label.CG), (1.0, Label.OG)):
            label, _ = decide(defuzzify(score, sets), 0.5)
            assert label is expected

    def test_raising_score_never_flips_real_to_fake(self):
        sets = default_sets()
        rng = np.random.default_rng(1)
        for _ in range(300):
            a, b = np.sort(rng.uniform(0.0, 1.0, 2))
            la, _ = decide(defuzzify(float(a), sets), 0.5)
            lb, _ = decide(defuzzify(float(b), sets), 0.5)
            if la is Label.OG:
                assert lb is Label.OG


class TestConfig:
    def test_load_valid_config(self, tmp_path):
        payload = {
            "sets": {
                "fake": [[0.0, 1.0], [0.4, 1.0], [0.6, 0.0], [1.0, 0.0]],
                "real": [[0.0, 0.0], [0.4, 0.0], [0.6, 1.0], [1.0, 1.0]],
            },
            "threshold": 0.45,
        }
        path = tmp_path / "fuzzy.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        sets, threshold = load_membership_config(path)
        assert threshold == 0.45
        assert sets.fake(0.0) == 1.0

    def test_malformed_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"sets": {"fake": "oops"}}', encoding="utf-8")
        with pytest.raises(MembershipError, match="malformed"):
            load_membership_config(path)

    def test_coverage_enforced_on_load(self, tmp_path):
        payload = {
            "sets": {
                "fake": [[0.0, 1.0], [0.4, 0.0], [1.0, 0.0]],
                "real": [[0.0, 0.0], [0.6, 0.0], [1.0, 1.0]],
            }
        }
        path = tmp_path / "hole.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(MembershipError, match="zero membership"):
            load_membership_config(path)

    def test_threshold_range_checked(self, tmp_path):
        payload = {
            "sets": {
                "fake": [[0.0, 1.0], [1.0, 0.0]],
                "real": [[0.0, 0.0], [1.0, 1.0]],
            },
            "threshold": 1.5,
        }
        path = tmp_path / "thr.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(MembershipError, match="threshold"):
            load_membership_config(path)

    def test_coverage_check_direct(self):
        check_coverage(default_sets())
        with pytest.raises(MembershipError):
            check_coverage(broken_sets())
