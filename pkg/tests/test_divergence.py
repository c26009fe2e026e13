import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from credit_divergence import divergence as dv
from credit_divergence.errors import (
    BoundaryError,
    DegenerateDistributionError,
    DivergenceOverflowError,
)

from oracles import gaussian_jeffreys_trapezoid, jeffreys_two_point, kl_two_point

open_unit = st.floats(1e-9, 1 - 1e-9)


class TestKlBernoulli:
    def test_identical(self):
        assert dv.kl_bernoulli(0.3, 0.3) == 0.0

    def test_value(self):
        want = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert dv.kl_bernoulli(0.5, 0.25) == pytest.approx(want, rel=1e-14)
        assert dv.kl_bernoulli(0.5, 0.25) == pytest.approx(0.14384, abs=1e-5)

    def test_asymmetric(self):
        assert dv.kl_bernoulli(0.5, 0.25) != pytest.approx(dv.kl_bernoulli(0.25, 0.5))

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_endpoint_equal(self, p):
        assert dv.kl_bernoulli(p, p) == 0.0

    @pytest.mark.parametrize("p,q", [(0.0, 0.5), (0.5, 1.0), (1.0, 0.0), (1.5, 0.5), (0.5, -0.1)])
    def test_boundary(self, p, q):
        with pytest.raises(BoundaryError):
            dv.kl_bernoulli(p, q)

    @given(open_unit, open_unit)
    def test_against_oracle(self, p, q):
        assert dv.kl_bernoulli(p, q) == pytest.approx(kl_two_point(p, q), rel=1e-9, abs=1e-15)


class TestJeffreysBernoulli:
    def test_value(self):
        v = dv.jeffreys_bernoulli(0.5, 0.25)
        # 0.25 * ln 3; twice kl(0.5, 0.25) would be 0.28768, but kl is not symmetric
        assert v.j == pytest.approx(0.27465307, abs=1e-8)
        assert v.j == pytest.approx(jeffreys_two_point(0.5, 0.25), rel=1e-14)
        assert v.j == v.kl_forward + v.kl_backward

    def test_closed_form(self):
        p, q = 0.5, 0.25
        assert dv.jeffreys_bernoulli(p, q).j == pytest.approx((p - q) * math.log(p * (1 - q) / (q * (1 - p))))

    @given(open_unit)
    def test_self(self, p):
        assert dv.jeffreys_bernoulli(p, p).j == 0.0

    @given(open_unit, open_unit)
    def test_symmetric_and_sum(self, p, q):
        a = dv.jeffreys_bernoulli(p, q)
        b = dv.jeffreys_bernoulli(q, p)
        assert abs(a.j - b.j) <= 1e-12
        assert a.j == pytest.approx(dv.kl_bernoulli(p, q) + dv.kl_bernoulli(q, p), rel=1e-12, abs=1e-15)
        assert a.j >= 0

    def test_triangle_violation(self):
        a, b, c = 0.01, 0.1, 0.5
        j = lambda x, y: dv.jeffreys_bernoulli(x, y).j  # noqa: E731
        assert j(a, c) > j(a, b) + j(b, c)

    # 50-digit reference values; each KL term cancels to second order here
    @pytest.mark.parametrize(
        "p,q,expected",
        [
            (0.625, 0.6278202, 3.3986583113808227e-5),
            (0.3, 0.3000001, 4.7619043086640194e-14),
            (1e-6, 1.0000001e-6, 1.0000009530208289e-20),
            (0.999999, 0.9999991, 1.0536061578111702e-8),
        ],
    )
    def test_near_equal_accuracy(self, p, q, expected):
        assert dv.jeffreys_bernoulli(p, q).j == pytest.approx(expected, rel=1e-14)
        j, _ = dv.jeffreys_bernoulli_array(np.array([p, q]), np.array([q, p]))
        np.testing.assert_allclose(j, expected, rtol=1e-14)


class TestJeffreysArray:
    def test_matches_scalar(self):
        rng = np.random.default_rng(0)
        p = rng.uniform(1e-6, 1 - 1e-6, 500)
        q = rng.uniform(1e-6, 1 - 1e-6, 500)
        j, clamped = dv.jeffreys_bernoulli_array(p, q)
        assert clamped == 0
        want = [dv.jeffreys_bernoulli(a, b).j for a, b in zip(p, q)]
        np.testing.assert_allclose(j, want, rtol=1e-12, atol=1e-15)

    def test_broadcast_scalar(self):
        q = np.array([0.1, 0.2, 0.3])
        j, _ = dv.jeffreys_bernoulli_array(0.2, q)
        assert j.shape == (3,)
        assert j[1] == 0.0

    def test_clamping_counter(self):
        j, clamped = dv.jeffreys_bernoulli_array(np.array([0.0, 1.0, 0.5]), np.array([0.5, 0.5, 1.0]))
        assert clamped == 3
        assert np.all(np.isfinite(j)) and np.all(j > 0)
        # clamped value equals the scalar divergence at the clamp point
        assert j[0] == pytest.approx(dv.jeffreys_bernoulli(1e-15, 0.5).j, rel=1e-12)

    def test_both_at_boundary(self):
        j, clamped = dv.jeffreys_bernoulli_array(np.array([1.0]), np.array([1.0]))
        assert j[0] == 0.0 and clamped == 2


class TestJeffreysNormal:
    def test_identical(self):
        assert dv.jeffreys_normal(0.3, 2.0, 0.3, 2.0).j == 0.0

    def test_unit_shift(self):
        assert dv.jeffreys_normal(0.0, 1.0, 1.0, 1.0).j == pytest.approx(1.0, abs=1e-15)

    def test_variance_ratio(self):
        assert dv.jeffreys_normal(0.0, 1.0, 0.0, 2.0).j == pytest.approx(0.25, abs=1e-15)

    @pytest.mark.parametrize("v1,v2", [(0.0, 1.0), (1.0, -1.0)])
    def test_degenerate(self, v1, v2):
        with pytest.raises(DegenerateDistributionError):
            dv.jeffreys_normal(0.0, v1, 0.0, v2)

    def test_parts_sum(self):
        v = dv.jeffreys_normal(0.2, 0.5, -0.4, 1.7)
        assert v.j == pytest.approx(v.kl_forward + v.kl_backward, rel=1e-14)

    @pytest.mark.parametrize("mu1,var1,mu2,var2", [(0.0, 1.0, 1.0, 1.0), (0.5, 0.3, -1.2, 2.5), (1.5, 0.02, 1.4, 0.05)])
    def test_trapezoid_oracle(self, mu1, var1, mu2, var2):
        want = gaussian_jeffreys_trapezoid(mu1, var1, mu2, var2)
        assert dv.jeffreys_normal(mu1, var1, mu2, var2).j == pytest.approx(want, abs=1e-8)


class TestQuadrature:
    def test_identical(self):
        f = dv.LogNormal(0.0, 1.0)
        assert dv.jeffreys_quadrature(f, f, f.log_breakpoints()) <= 1e-8

    def test_unit_shift(self):
        assert dv.jeffreys_lognormal_quadrature(0.0, 1.0, 1.0, 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_plain_callables(self):
        a, b = dv.LogNormal(0.0, 1.0), dv.LogNormal(0.5, 1.5)
        got = dv.jeffreys_quadrature(a.pdf, b.pdf, breakpoints=a.log_breakpoints())
        assert got == pytest.approx(dv.jeffreys_normal(0.0, 1.0, 0.5, 1.5).j, abs=1e-6)

    def test_overflow_guard(self):
        with pytest.raises(DivergenceOverflowError):
            dv.jeffreys_lognormal_quadrature(0.0, 1e-6, 10.0, 1e-6)

    def test_exponential_callables(self):
        # rates 1 and 2: J = (ln(1/2) + 1) + (ln 2 - 1/2) = 1/2
        f1 = lambda x: math.exp(-x)  # noqa: E731
        f2 = lambda x: 2.0 * math.exp(-2.0 * x)  # noqa: E731
        assert dv.jeffreys_quadrature(f1, f2, breakpoints=[-5.0, 0.0, 2.0]) == pytest.approx(0.5, abs=1e-8)

    def test_zero_density_overlap(self):
        # disjoint supports make the log-ratio infinite
        f1 = lambda x: 1.0 if x < 1 else 0.0  # noqa: E731
        f2 = lambda x: 0.0 if x < 1 else math.exp(1 - x)  # noqa: E731
        with pytest.raises(DivergenceOverflowError):
            dv.jeffreys_quadrature(f1, f2, breakpoints=[0.0])

    def test_lognormal_pdf_integrates_to_one(self):
        from scipy import integrate

        f = dv.LogNormal(0.3, 0.8)
        val, _ = integrate.quad(lambda y: f.pdf(math.exp(y)) * math.exp(y), -40, 40, points=[0.3])
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_invalid_lognormal(self):
        with pytest.raises(DegenerateDistributionError):
            dv.LogNormal(0.0, 0.0)

    def test_random_pairs(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            mu1, mu2 = rng.uniform(-2, 2, 2)
            v1, v2 = rng.uniform(0.01, 4, 2)
            closed = dv.jeffreys_normal(mu1, v1, mu2, v2).j
            assert dv.jeffreys_lognormal_quadrature(mu1, v1, mu2, v2) == pytest.approx(closed, abs=1e-6)
