import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from congruence.calibration import (calibration_report, confidence_levels, ece, mean_nll, pit_values,
                                    reliability_curve)
from congruence.distributions import Gaussian, NegativeBinomial, Poisson, cdf
from oracles import ece_loop

pits = st.lists(st.floats(0, 1), min_size=1, max_size=60)


class TestPit:
    def test_median(self):
        ys = [0.3, -2.0, 7.5]
        np.testing.assert_array_equal(pit_values([Gaussian(y, 2.0) for y in ys], ys), 0.5)

    def test_far_below_mass(self):
        assert pit_values([Gaussian(100.0, 1.0), Gaussian(50.0, 4.0)], [0.0, 0.0]).max() < 1e-100

    def test_composition(self):
        dists = [Gaussian(0.0, 1.0), Poisson(3.0), NegativeBinomial(2.0, 0.4)]
        ys = [0.7, 2.0, 5.0]
        np.testing.assert_array_equal(pit_values(dists, ys), [cdf(d, y) for d, y in zip(dists, ys)])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pit_values([Gaussian(0, 1)], [0.0, 1.0])


class TestEce:
    def test_exact_match_is_zero(self):
        # pit_i = i / (q + 1) for i = 1..q+1 makes #{pit <= p_j} / n equal p_j exactly
        q = 99
        pit = np.arange(1, q + 2) / (q + 1)
        curve = reliability_curve(pit, q)
        np.testing.assert_array_equal(curve[:, 0], curve[:, 1])
        assert ece(pit, q) == 0.0

    def test_all_zero_pit(self):
        assert ece(np.zeros(10), 99, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_all_one_pit(self):
        curve = reliability_curve(np.ones(5), 9)
        np.testing.assert_array_equal(curve[:, 1], 0.0)

    def test_uniform_draws(self):
        pit = np.random.default_rng(0).uniform(size=2000)
        assert ece(pit) < 0.02
        curve = reliability_curve(pit)
        assert np.abs(curve[:, 0] - curve[:, 1]).max() < 0.02 + 1.36 / math.sqrt(2000)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    @given(pit=pits, q=st.integers(1, 30))
    def test_matches_loop_oracle(self, pit, q, alpha):
        assert ece(pit, q, alpha) == pytest.approx(ece_loop(pit, q, alpha), abs=1e-14)

    @given(pit=pits, perm_seed=st.integers(0, 1000))
    def test_permutation_invariant(self, pit, perm_seed):
        shuffled = np.random.default_rng(perm_seed).permutation(pit)
        assert ece(shuffled) == ece(pit)

    @given(pit=pits, q=st.integers(1, 50))
    def test_curve_invariants(self, pit, q):
        curve = reliability_curve(pit, q)
        assert curve.shape == (q, 2)
        assert np.all(np.diff(curve[:, 0]) > 0)
        assert np.all(np.diff(curve[:, 1]) >= 0)
        assert 0 <= ece(pit, q) <= 1

    def test_empty(self):
        with pytest.raises(ValueError):
            ece([])

    @pytest.mark.parametrize("q, alpha", [(0, 1.0), (5, 0.0), (5, -1.0)])
    def test_bad_parameters(self, q, alpha):
        with pytest.raises(ValueError):
            ece([0.5], q, alpha)

    def test_levels(self):
        np.testing.assert_allclose(confidence_levels(3), [0.25, 0.5, 0.75])


class TestMeanNll:
    def test_standard_normal(self):
        assert mean_nll([Gaussian(0.0, 1.0)], [0.0]) == pytest.approx(0.918939, abs=1e-6)

    def test_duplicate_idempotent(self):
        d = [Poisson(2.5)]
        assert mean_nll(d * 2, [3, 3]) == pytest.approx(mean_nll(d, [3]), rel=1e-15)

    def test_zero_density_flagged(self):
        assert mean_nll([Poisson(2.0), Poisson(2.0)], [1, 1.5]) == math.inf

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mean_nll([Poisson(2.0)], [])


class TestReport:
    def test_fields_consistent(self):
        rng = np.random.default_rng(3)
        ys = rng.normal(size=300)
        report = calibration_report([Gaussian(0.0, 1.0)] * 300, ys, q=19)
        assert report.levels.size == report.empirical.size == report.weights.size == 19
        assert report.weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert report.ece == ece(report.pit, 19)
        assert set(report.summary()) == {"ece", "mean_nll", "alpha", "q", "n"}

    def test_perfect_gaussian(self):
        rng = np.random.default_rng(0)
        mu = rng.uniform(-3, 3, 2000)
        report = calibration_report([Gaussian(m, 1.0) for m in mu], mu + rng.normal(size=2000))
        assert report.ece < 0.02
