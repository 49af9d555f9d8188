"""Tests for special functions and sampling primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from pdcoag.errors import DomainError, NumericError
from pdcoag.numerics import (
    RngStream,
    levy_tail,
    levy_tail_inverse,
    log_gamma,
    log_levy_density,
    reg_inc_beta,
    reg_inc_gamma_lower,
    reg_inc_gamma_upper,
    sample_beta,
    sample_gamma,
    sample_small_jump,
)
from pdcoag.stattest import beta_cdf, gamma_cdf, ks_one_sample


class TestRngStream:
    """Tests for reproducible streams."""

    def test_same_key_same_sequence(self):
        """Equal (seed, index) pairs give identical draws."""
        a = RngStream(7, 3).uniform(100)
        b = RngStream(7, 3).uniform(100)
        assert np.array_equal(a, b)

    def test_distinct_index_differs(self):
        """Different stream indices give different draws."""
        a = RngStream(7, 0).uniform(100)
        b = RngStream(7, 1).uniform(100)
        assert not np.array_equal(a, b)

    def test_negative_index_rejected(self):
        """Stream indices are nonnegative."""
        with pytest.raises(DomainError):
            RngStream(7, -1)

    def test_bernoulli_is_binary(self, rng):
        """Bernoulli draws are 0/1 with roughly the right mean."""
        draws = rng.bernoulli(0.25, 20_000)
        assert set(np.unique(draws)) <= {0, 1}
        assert abs(draws.mean() - 0.25) < 0.02

    def test_large_seed_accepted(self):
        """Seeds wider than 64 bits are folded, not rejected."""
        RngStream(2**70 + 5, 0).uniform()


class TestLogGamma:
    """Tests for log_gamma."""

    @pytest.mark.parametrize(
        "x, expected",
        [(1.0, 0.0), (4.0, math.log(6.0)), (0.5, 0.5 * math.log(math.pi))],
    )
    def test_known_values(self, x, expected):
        """Closed forms at 1, 4 and 1/2."""
        assert log_gamma(x) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("inf"), float("nan")])
    def test_domain(self, x):
        """Non-positive or non-finite input is a domain error."""
        with pytest.raises(DomainError):
            log_gamma(x)

    def test_array_input(self):
        """Arrays are evaluated elementwise."""
        out = log_gamma(np.array([1.0, 2.0, 3.0]))
        assert np.allclose(out, [0.0, 0.0, math.log(2.0)])


class TestIncompleteBeta:
    """Tests for reg_inc_beta."""

    def test_known_values(self):
        """Uniform CDF, symmetry and the 1-(1-x)^b closed form."""
        assert reg_inc_beta(1, 1, 0.3) == pytest.approx(0.3, abs=1e-12)
        assert reg_inc_beta(2.7, 2.7, 0.5) == pytest.approx(0.5, abs=1e-12)
        assert reg_inc_beta(1, 2, 0.25) == pytest.approx(0.4375, abs=1e-12)

    def test_endpoints(self):
        """I_0 = 0 and I_1 = 1."""
        assert reg_inc_beta(0.3, 4.0, 0.0) == 0.0
        assert reg_inc_beta(0.3, 4.0, 1.0) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(
        a=st.floats(0.05, 20.0),
        b=st.floats(0.05, 20.0),
        x=st.floats(0.0, 1.0),
    )
    def test_reflection(self, a, b, x):
        """I_x(a, b) + I_{1-x}(b, a) = 1."""
        assert reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("args", [(0, 1, 0.5), (1, -1, 0.5), (1, 1, 1.5), (1, 1, -0.1)])
    def test_domain(self, args):
        """Nonpositive shapes and x outside [0, 1] are rejected."""
        with pytest.raises(DomainError):
            reg_inc_beta(*args)


class TestIncompleteGamma:
    """Tests for the regularized incomplete gamma pair."""

    def test_known_values(self):
        """P(1, ln 2) = 1/2, P(a, 0) = 0, P(1/2, 1) = erf(1)."""
        assert reg_inc_gamma_lower(1, math.log(2)) == pytest.approx(0.5, abs=1e-12)
        assert reg_inc_gamma_lower(3.3, 0.0) == 0.0
        assert reg_inc_gamma_lower(0.5, 1.0) == pytest.approx(math.erf(1.0), abs=1e-10)

    def test_complement(self):
        """P + Q = 1."""
        x = np.linspace(0.0, 30.0, 50)
        assert np.allclose(reg_inc_gamma_lower(2.5, x) + reg_inc_gamma_upper(2.5, x), 1.0)

    def test_domain(self):
        """Nonpositive shape or negative x is rejected."""
        with pytest.raises(DomainError):
            reg_inc_gamma_lower(0.0, 1.0)
        with pytest.raises(DomainError):
            reg_inc_gamma_upper(1.0, -1.0)


class TestLevyTail:
    """Tests for levy_tail and its inverse."""

    def test_gamma_subordinator_value(self):
        """alpha = 0 gives the exponential integral E1."""
        assert levy_tail(0.0, 1.0) == pytest.approx(0.219384, abs=1e-6)

    def test_half_value(self):
        """alpha = 1/2 closed form e^-1 - sqrt(pi) erfc(1)."""
        expected = math.exp(-1.0) - math.sqrt(math.pi) * special.erfc(1.0)
        assert levy_tail(0.5, 1.0) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.9])
    def test_decreasing_and_vanishing(self, alpha):
        """Tail decreases strictly and vanishes at infinity."""
        x = np.logspace(-6, 2.5, 200)
        y = levy_tail(alpha, x)
        assert np.all(np.diff(y) < 0)
        assert y[-1] < 1e-100

    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.9])
    def test_asymptotic_branch_continuous(self, alpha):
        """Direct and asymptotic evaluations agree where they meet."""
        below = levy_tail(alpha, 50.0 - 1e-9)
        above = levy_tail(alpha, 50.0)
        assert above == pytest.approx(below, rel=1e-8)

    def test_matches_density_quadrature(self):
        """Tail equals the integral of the density."""
        from scipy import integrate

        value, _ = integrate.quad(lambda t: math.exp(log_levy_density(0.5, t)), 2.0, np.inf)
        assert levy_tail(0.5, 2.0) == pytest.approx(value, rel=1e-8)

    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.9])
    def test_inverse_round_trip(self, alpha):
        """levy_tail_inverse undoes levy_tail on a log grid over [1e-8, 50]."""
        x = np.logspace(-8, math.log10(50.0), 60)
        back = levy_tail_inverse(alpha, levy_tail(alpha, x))
        assert np.allclose(back, x, rtol=1e-8)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.9])
    def test_inverse_residual(self, alpha):
        """|levy_tail(inverse(y)) - y| <= 1e-10 max(1, y)."""
        y = np.logspace(-200, 2, 80)
        got = levy_tail(alpha, levy_tail_inverse(alpha, y))
        assert np.all(np.abs(got - y) <= 1e-10 * np.maximum(1.0, y))

    def test_inverse_known_point(self):
        """Inverse of E1(1) under alpha = 0 is 1."""
        assert levy_tail_inverse(0.0, special.exp1(1.0)) == pytest.approx(1.0, rel=1e-10)

    def test_inverse_monotone(self):
        """Larger y gives a smaller root."""
        roots = levy_tail_inverse(0.5, np.array([0.01, 0.1, 1.0, 10.0]))
        assert np.all(np.diff(roots) < 0)

    def test_inverse_scalar_in_scalar_out(self):
        """Scalar input returns a float."""
        assert isinstance(levy_tail_inverse(0.3, 2.0), float)

    def test_inverse_underflow(self):
        """A root below the smallest double is a numeric error."""
        with pytest.raises(NumericError):
            levy_tail_inverse(0.0, 1000.0)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        """x <= 0 is rejected."""
        with pytest.raises(DomainError):
            levy_tail(0.5, x)
        with pytest.raises(DomainError):
            levy_tail_inverse(0.5, x)

    def test_alpha_domain(self):
        """alpha outside [0, 1) is rejected."""
        with pytest.raises(DomainError):
            levy_tail(1.0, 1.0)


class TestSamplers:
    """Tests for Beta and Gamma draws."""

    def test_beta_mean(self, rng):
        """Beta(1, 2) has mean 1/3."""
        assert sample_beta(1, 2, rng, 100_000).mean() == pytest.approx(1 / 3, abs=0.005)

    def test_beta_ks(self, rng):
        """Beta(0.5, 0.5) draws pass KS against reg_inc_beta."""
        draws = sample_beta(0.5, 0.5, rng, 20_000)
        assert ks_one_sample(draws, beta_cdf(0.5, 0.5)).passed

    def test_gamma_rate_convention(self, rng):
        """Second parameter is a rate: mean shape / rate."""
        assert sample_gamma(2.0, 4.0, rng, 100_000).mean() == pytest.approx(0.5, abs=0.01)

    def test_gamma_ks(self, rng):
        """Gamma(1.5, 2) draws pass KS against the gamma CDF."""
        draws = sample_gamma(1.5, 2.0, rng, 20_000)
        assert ks_one_sample(draws, gamma_cdf(1.5, 2.0)).passed

    def test_domain(self, rng):
        """Nonpositive parameters are rejected."""
        with pytest.raises(DomainError):
            sample_beta(0.0, 1.0, rng)
        with pytest.raises(DomainError):
            sample_gamma(1.0, 0.0, rng)


class TestSmallJump:
    """Tests for size-biased draws among small subordinator jumps."""

    @pytest.mark.parametrize("alpha, cutoff", [(0.0, 0.5), (0.5, 2.0), (0.9, 0.01)])
    def test_truncated_gamma_law(self, rng, alpha, cutoff):
        """Draws follow Gamma(1 - alpha, 1) conditioned below the cutoff."""
        a = 1.0 - alpha
        draws = sample_small_jump(alpha, cutoff, rng, 20_000)
        cdf = lambda x: reg_inc_gamma_lower(a, np.minimum(x, cutoff)) / reg_inc_gamma_lower(a, cutoff)
        assert np.all((draws > 0) & (draws <= cutoff))
        assert ks_one_sample(draws, cdf).passed

    def test_tiny_cutoff(self, rng):
        """Cutoffs far below one still give positive draws under the cutoff."""
        draws = sample_small_jump(0.5, 1e-300, rng, 100)
        assert np.all((draws > 0) & (draws <= 1e-300))

    def test_scalar(self, rng):
        """No size gives a float."""
        assert isinstance(sample_small_jump(0.3, 1.0, rng), float)

    @pytest.mark.parametrize("cutoff", [0.0, -1.0, float("inf")])
    def test_domain(self, rng, cutoff):
        """The cutoff must be finite and positive."""
        with pytest.raises(DomainError):
            sample_small_jump(0.5, cutoff, rng)
