import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from congruence.kernels import (DegenerateOutputs, KernelSpec, cross_gram, gram, kernel_eval,
                                output_bandwidth)
from oracles import kernel_scalar

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)

SPECS = [
    KernelSpec.rbf(1.0),
    KernelSpec.rbf(0.3),
    KernelSpec.laplacian(0.7),
    KernelSpec.polynomial(),
    KernelSpec.polynomial(degree=2, offset=0.5, scale=0.1),
]


def points(max_n=12, max_d=4):
    return st.integers(1, max_d).flatmap(
        lambda d: hnp.arrays(float, st.tuples(st.integers(1, max_n), st.just(d)), elements=finite))


class TestKernelSpec:
    @pytest.mark.parametrize("family", ["rbf", "laplacian"])
    @pytest.mark.parametrize("gamma", [None, 0.0, -1.0])
    def test_bandwidth_required(self, family, gamma):
        with pytest.raises(ValueError):
            KernelSpec(family, gamma=gamma)

    @pytest.mark.parametrize("kwargs", [{"degree": 0}, {"degree": 1.5}, {"scale": 0.0}, {"scale": -2.0}])
    def test_polynomial_constraints(self, kwargs):
        with pytest.raises(ValueError):
            KernelSpec("polynomial", **kwargs)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown kernel"):
            KernelSpec("matern", gamma=1.0)

    def test_default_polynomial_scale_is_inverse_dimension(self):
        assert KernelSpec.polynomial().resolved_scale(4) == 0.25
        assert KernelSpec.polynomial(scale=0.02).resolved_scale(4) == 0.02


class TestKernelEval:
    def test_rbf_zero_distance(self):
        assert kernel_eval(KernelSpec.rbf(1.0), [0.7, -0.2], [0.7, -0.2]) == 1.0

    def test_polynomial_hand_value(self):
        # (1/2 * 2 + 1)^3
        assert kernel_eval(KernelSpec.polynomial(), [1, 1], [1, 1]) == pytest.approx(8.0, abs=1e-12)
        assert kernel_scalar("polynomial", [1, 1], [1, 1]) == pytest.approx(8.0, abs=1e-12)

    def test_rbf_against_arbitrary_precision(self):
        frozen = 0.1353352832366127  # exp(-2) from mpmath at 30 digits
        assert float(mpmath.exp(-2)) == pytest.approx(frozen, rel=1e-15)
        assert kernel_eval(KernelSpec.rbf(0.5), [0.0], [2.0]) == pytest.approx(frozen, rel=1e-14)

    def test_laplacian_uses_l1_norm(self):
        v = kernel_eval(KernelSpec.laplacian(1.0), [0.0, 0.0], [1.0, 2.0])
        assert v == pytest.approx(math.exp(-3.0), rel=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            kernel_eval(KernelSpec.rbf(1.0), [1.0, 2.0], [1.0])

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.describe())
    @given(data=st.data())
    def test_matches_scalar_oracle(self, spec, data):
        d = data.draw(st.integers(1, 5))
        u = data.draw(st.lists(finite, min_size=d, max_size=d))
        v = data.draw(st.lists(finite, min_size=d, max_size=d))
        expected = kernel_scalar(spec.family, u, v, spec.gamma, spec.degree, spec.offset, spec.scale)
        assert kernel_eval(spec, u, v) == pytest.approx(expected, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("spec", SPECS[:3], ids=lambda s: s.describe())
    @given(u=st.lists(finite, min_size=3, max_size=3), v=st.lists(finite, min_size=3, max_size=3))
    def test_stationary_kernels_bounded(self, spec, u, v):
        k = kernel_eval(spec, u, v)
        assert 0.0 <= k <= 1.0
        if u == v:
            assert k == 1.0

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.describe())
    @given(u=st.lists(finite, min_size=4, max_size=4), v=st.lists(finite, min_size=4, max_size=4),
           perm=st.permutations(range(4)))
    def test_permutation_equivariant(self, spec, u, v, perm):
        pu, pv = [u[i] for i in perm], [v[i] for i in perm]
        assert kernel_eval(spec, pu, pv) == pytest.approx(kernel_eval(spec, u, v), rel=1e-12, abs=1e-300)


class TestGram:
    def test_single_point(self):
        g = gram(KernelSpec.rbf(2.0), [[3.0]])
        assert g.symmetric
        np.testing.assert_array_equal(g.entries, [[1.0]])

    def test_two_points_hand(self):
        g = gram(KernelSpec.rbf(1.0), [[0.0], [1.0]])
        np.testing.assert_allclose(g.entries, [[1, math.exp(-1)], [math.exp(-1), 1]], rtol=1e-14)

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            gram(KernelSpec.rbf(1.0), np.zeros((0, 2)))

    def test_ragged_points(self):
        with pytest.raises(ValueError):
            gram(KernelSpec.rbf(1.0), [[0.0, 1.0], [1.0]])

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.describe())
    @given(pts=points(max_n=50))
    def test_symmetric_and_psd(self, spec, pts):
        g = gram(spec, pts).entries
        np.testing.assert_array_equal(g, g.T)
        if spec.family != "polynomial":
            np.testing.assert_array_equal(np.diag(g), 1.0)
        scale = max(1.0, np.abs(g).max())
        assert np.linalg.eigvalsh(g).min() >= -1e-8 * scale

    def test_entries_match_kernel_eval(self, rng):
        pts = rng.normal(size=(6, 3))
        spec = KernelSpec.laplacian(0.4)
        g = gram(spec, pts).entries
        for i in range(6):
            for j in range(6):
                assert g[i, j] == pytest.approx(kernel_eval(spec, pts[i], pts[j]), rel=1e-13)


class TestCrossGram:
    def test_equals_gram_when_same_points(self, rng):
        pts = rng.normal(size=(7, 2))
        spec = KernelSpec.rbf(0.8)
        np.testing.assert_allclose(cross_gram(spec, pts, pts).entries, gram(spec, pts).entries, rtol=1e-14)
        assert not cross_gram(spec, pts, pts).symmetric

    def test_loop_oracle_3x2(self, rng):
        a, b = rng.normal(size=(3, 2)), rng.normal(size=(2, 2))
        for spec in SPECS:
            c = cross_gram(spec, a, b).entries
            assert c.shape == (3, 2)
            for i in range(3):
                for j in range(2):
                    ref = kernel_scalar(spec.family, list(a[i]), list(b[j]), spec.gamma, spec.degree,
                                        spec.offset, spec.scale)
                    assert c[i, j] == pytest.approx(ref, rel=1e-12)

    def test_hand_value(self):
        c = cross_gram(KernelSpec.rbf(1.0), [[0.0]], [[0.0], [3.0]]).entries
        np.testing.assert_allclose(c, [[1.0, math.exp(-9)]], rtol=1e-14)

    @given(a=points(max_d=1), b=points(max_d=1))
    def test_transpose_relation(self, a, b):
        spec = KernelSpec.rbf(1.3)
        np.testing.assert_allclose(cross_gram(spec, a, b).entries, cross_gram(spec, b, a).entries.T,
                                   rtol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            cross_gram(KernelSpec.rbf(1.0), [[0.0, 1.0]], [[0.0]])


class TestOutputBandwidth:
    @pytest.mark.parametrize("ys, gamma", [([0, 2], 0.25), ([0, 1, 2], 0.5)])
    def test_hand_values(self, ys, gamma):
        assert output_bandwidth(ys) == pytest.approx(gamma, rel=1e-14)

    def test_constant_outputs(self):
        with pytest.raises(DegenerateOutputs):
            output_bandwidth([5, 5, 5])

    def test_too_few(self):
        with pytest.raises(ValueError):
            output_bandwidth([1.0])

    @given(ys=st.lists(finite, min_size=2, max_size=30).filter(lambda v: np.ptp(v) > 1e-3))
    def test_unbiased_variance(self, ys):
        from oracles import sample_variance
        assert output_bandwidth(ys) == pytest.approx(1 / (2 * sample_variance(ys)), rel=1e-9)
