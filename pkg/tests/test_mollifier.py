"""Gaussian kernel and Hermite-form derivatives against independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsltlab import MollifierParams, f_eps, f_eps_deriv, hermite_he
from oracles import gh_density_integral, nested_finite_difference

finite_coord = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


class TestKernel:
    def test_center_value_3d(self):
        assert f_eps(np.zeros(3), 0.5) == pytest.approx(math.pi ** -1.5, rel=1e-14)

    def test_normalizing_width_2d(self):
        assert f_eps(np.zeros(2), 1 / (2 * math.pi)) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_integrates_to_one(self, d):
        assert gh_density_integral(0.37, d) == pytest.approx(1.0, abs=1e-10)

    def test_positive_and_peaked(self):
        x = np.array([[0.0, 0.0], [0.5, 0.1], [2.0, -1.0]])
        vals = f_eps(x, 0.8)
        assert np.all(vals > 0)
        assert vals[0] == max(vals)

    def test_underflow_policy(self):
        # |x|^2 / (2 eps) > 745 returns exact zero
        x = np.zeros(2)
        x[0] = math.sqrt(2 * 0.01 * 746)
        assert f_eps(x, 0.01) == 0.0

    def test_domain_error(self):
        with pytest.raises(ValueError):
            f_eps(np.zeros(2), 0.0)
        with pytest.raises(ValueError):
            f_eps_deriv(np.zeros(2), -1.0, (1, 0))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            MollifierParams(eps=0.0, d=2, k=(0, 0))
        with pytest.raises(ValueError):
            MollifierParams(eps=1.0, d=2, k=(1,))


class TestDerivative:
    def test_odd_at_origin(self):
        assert f_eps_deriv(np.zeros(3), 0.3, (1, 0, 0)) == 0.0

    def test_first_partial_closed_form(self):
        # -(x1/eps) f_eps(x) at x = e1, eps = 1, d = 3
        expected = -((2 * math.pi) ** -1.5) * math.exp(-0.5)
        assert f_eps_deriv([1.0, 0.0, 0.0], 1.0, (1, 0, 0)) == pytest.approx(expected, rel=1e-14)

    def test_first_partial_vs_central_difference(self):
        rng = np.random.default_rng(5)
        for _ in range(6):
            x = rng.uniform(-1.5, 1.5, size=3)
            h = 1e-5
            xp, xm = x.copy(), x.copy()
            xp[1] += h
            xm[1] -= h
            fd = (f_eps(xp, 0.5) - f_eps(xm, 0.5)) / (2 * h)
            val = f_eps_deriv(x, 0.5, (0, 1, 0))
            assert val == pytest.approx(fd, rel=1e-6)

    @pytest.mark.parametrize("k", [(1, 0), (2, 0), (1, 1), (3, 0), (2, 1), (0, 3)])
    def test_nested_finite_differences(self, k):
        rng = np.random.default_rng(11)
        for _ in range(3):
            x = rng.uniform(-1.2, 1.2, size=2)
            exact = f_eps_deriv(x, 0.6, k)
            approx = nested_finite_difference(x, 0.6, k)
            assert exact == pytest.approx(approx, rel=1e-4, abs=1e-9)

    def test_third_order_multi_axis(self):
        x = np.array([0.4, -0.7, 0.2])
        exact = f_eps_deriv(x, 0.8, (1, 1, 1))
        approx = nested_finite_difference(x, 0.8, (1, 1, 1))
        assert exact == pytest.approx(approx, rel=1e-4)

    @settings(max_examples=60, deadline=None)
    @given(
        x=st.tuples(finite_coord, finite_coord),
        k=st.tuples(st.integers(0, 3), st.integers(0, 3)),
        eps=st.floats(min_value=0.05, max_value=3.0),
    )
    def test_parity(self, x, k, eps):
        x = np.asarray(x)
        left = f_eps_deriv(-x, eps, k)
        right = (-1.0) ** sum(k) * f_eps_deriv(x, eps, k)
        assert left == right or left == pytest.approx(right, rel=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(
        x=st.tuples(finite_coord, finite_coord, finite_coord),
        c=st.floats(min_value=0.1, max_value=10.0),
        k=st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
    )
    def test_width_scaling(self, x, c, k):
        # f^{(k)} at (x sqrt(c), c eps) = c^{-(d+|k|)/2} f^{(k)}(x, eps)
        x = np.asarray(x)
        eps = 0.7
        d = 3
        left = f_eps_deriv(x * math.sqrt(c), c * eps, k)
        right = c ** (-(d + sum(k)) / 2.0) * f_eps_deriv(x, eps, k)
        assert left == pytest.approx(right, rel=1e-12, abs=1e-300)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(20, 3))
        batch = f_eps_deriv(pts, 0.4, (1, 0, 2))
        singles = [f_eps_deriv(p, 0.4, (1, 0, 2)) for p in pts]
        assert np.allclose(batch, singles, rtol=0, atol=0)


class TestHeatKernel:
    def test_semigroup_by_quadrature(self):
        # f_{e1+e2}(x) equals the convolution of f_{e1} and f_{e2}, d = 2
        from scipy.special import roots_hermitenorm

        e1, e2 = 0.3, 0.45
        nodes, weights = roots_hermitenorm(80)
        rng = np.random.default_rng(21)
        scale = math.sqrt(e2)
        for _ in range(5):
            x = rng.uniform(-1.0, 1.0, size=2)
            Z1, Z2 = np.meshgrid(nodes, nodes, indexing="ij")
            W = np.outer(weights, weights) / (2 * math.pi)
            pts = np.stack([x[0] - scale * Z1, x[1] - scale * Z2], axis=-1)
            conv = float(np.sum(W * f_eps(pts, e1)))
            assert conv == pytest.approx(f_eps(x, e1 + e2), abs=1e-8)


class TestHermite:
    @settings(max_examples=40, deadline=None)
    @given(z=st.floats(min_value=-4, max_value=4), m=st.integers(0, 12))
    def test_matches_numpy(self, z, m):
        coeffs = np.zeros(m + 1)
        coeffs[m] = 1.0
        ref = np.polynomial.hermite_e.hermeval(z, coeffs)
        assert hermite_he(m, z) == pytest.approx(ref, rel=1e-10, abs=1e-10)

    def test_high_order_table_path(self):
        # orders beyond the recurrence cutoff use cached coefficient tables
        z = np.linspace(-2, 2, 7)
        for m in (9, 11, 14):
            coeffs = np.zeros(m + 1)
            coeffs[m] = 1.0
            ref = np.polynomial.hermite_e.hermeval(z, coeffs)
            assert np.allclose(hermite_he(m, z), ref, rtol=1e-9)
