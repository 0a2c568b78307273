"""Low-level numerics: fixed-order inner products, the seeded random
stream, golden-section minimization, and finite differences."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eoslab import data, descent, losses
from eoslab.numerics import Rng, dot, finite_diff_grad, gaussian_vec, minimize_1d

finite_floats = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)


class TestDot:
    def test_coordinate_projection(self):
        assert dot([1.0, 0.2], [0.0, 1.0]) == pytest.approx(0.2, abs=0)

    def test_zero_vector(self):
        assert dot([0.0, 0.0], [3.0, 4.0]) == 0.0

    def test_hand_arithmetic(self):
        # 1*1 + 0.2*0.2 = 1.04
        assert dot([1.0, 0.2], [1.0, 0.2]) == pytest.approx(1.04, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            dot([1.0], [1.0, 2.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            dot([np.nan, 0.0], [1.0, 1.0])

    @given(st.lists(finite_floats, min_size=1, max_size=8),
           st.lists(finite_floats, min_size=1, max_size=8),
           st.lists(finite_floats, min_size=1, max_size=8),
           finite_floats, finite_floats)
    @settings(max_examples=200, deadline=None)
    def test_symmetric_and_bilinear(self, a, b, c, s, t):
        n = min(len(a), len(b), len(c))
        a, b, c = np.array(a[:n]), np.array(b[:n]), np.array(c[:n])
        assert dot(a, b) == pytest.approx(dot(b, a), rel=1e-12, abs=1e-12)
        lhs = dot(a, s * b + t * c)
        rhs = s * dot(a, b) + t * dot(a, c)
        # relative to the accumulated term magnitudes, so cancellation
        # between huge products does not masquerade as a violation
        scale = 1.0 + abs(s) * float(np.abs(a) @ np.abs(b)) \
            + abs(t) * float(np.abs(a) @ np.abs(c))
        assert abs(lhs - rhs) / scale < 1e-12


class TestRng:
    def test_same_seed_same_stream(self):
        v1 = gaussian_vec(Rng(0), 64)
        v2 = gaussian_vec(Rng(0), 64)
        np.testing.assert_array_equal(v1, v2)

    def test_stream_advances(self):
        rng = Rng(0)
        a = gaussian_vec(rng, 2)
        b = gaussian_vec(rng, 2)
        assert not np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = gaussian_vec(Rng(0), 64)
        b = gaussian_vec(Rng(1), 64)
        assert np.any(a != b)

    def test_moments_at_scale(self):
        # 1e5 two-coordinate samples: per-coordinate mean within +/-0.02
        z = gaussian_vec(Rng(123), 200_000).reshape(-1, 2)
        mean = z.mean(axis=0)
        assert np.all(np.abs(mean) <= 0.02)
        assert np.all(np.abs(z.std(axis=0) - 1.0) <= 0.02)

    def test_rademacher_values(self):
        r = Rng(3).rademacher(1000)
        assert set(np.unique(r)) <= {-1.0, 1.0}

    def test_bad_dim(self):
        with pytest.raises(ValueError):
            gaussian_vec(Rng(0), 0)


class TestMinimize1d:
    def test_symmetric_quadratic(self):
        x, fx = minimize_1d(lambda z: z * z, -1.0, 1.0, tol=1e-10)
        assert abs(x) < 1e-9
        assert fx < 1e-18

    def test_shifted_quadratic(self):
        x, _ = minimize_1d(lambda z: (z - 3.0) ** 2, 0.0, 10.0, tol=1e-10)
        assert x == pytest.approx(3.0, abs=1e-8)

    def test_regularization_path_objective(self):
        # lambda = e instance of min_z lambda*l(z) + z^2 for the logistic
        # loss; a dense grid is the independent oracle
        def h(z):
            return math.e * math.log1p(math.exp(-z)) + z * z

        x, fx = minimize_1d(h, -5.0, 20.0, tol=1e-10)
        zs = np.arange(-5.0, 20.0, 1e-4)
        oracle = float(np.min(math.e * np.logaddexp(0.0, -zs) + zs ** 2))
        assert fx <= 2.0
        assert fx == pytest.approx(oracle, abs=1e-6)

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            minimize_1d(lambda z: z * z, 1.0, -1.0)

    def test_random_convex_quadratics(self):
        rng = Rng(11)
        for _ in range(25):
            c = float(10.0 * rng.uniform() - 5.0)
            a = float(rng.uniform()) + 0.1
            x, _ = minimize_1d(lambda z: a * (z - c) ** 2, -10.0, 10.0, tol=1e-9)
            assert x == pytest.approx(c, abs=1e-7)


class TestFiniteDiff:
    def test_linear_function(self):
        c = np.array([2.0, -1.5, 0.25])
        g = finite_diff_grad(lambda w: dot(w, c), np.array([0.3, 0.7, -2.0]), h=1e-5)
        np.testing.assert_allclose(g, c, atol=1e-8)

    def test_half_square_norm(self):
        w = np.array([1.0, -2.0, 0.5])
        g = finite_diff_grad(lambda w_: 0.5 * dot(w_, w_), w, h=1e-5)
        np.testing.assert_allclose(g, w, atol=1e-6)

    def test_matches_analytic_logistic_gradient(self):
        ds = data.toy_dataset()
        loss = losses.logistic()
        w = np.zeros(2)
        fd = finite_diff_grad(lambda v: descent.loss_value(loss, ds, v), w, h=1e-5)
        np.testing.assert_allclose(fd, descent.grad(loss, ds, w), atol=1e-6)

    def test_bad_h(self):
        with pytest.raises(ValueError):
            finite_diff_grad(lambda w: 0.0, np.array([1.0]), h=0.0)
