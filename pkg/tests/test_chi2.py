import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ripbound import chi2
from ripbound.errors import DomainError, TailUnderflowError

mpmath.mp.dps = 40


def mp_survival(x):
    return mpmath.erfc(mpmath.sqrt(mpmath.mpf(x) / 2))


def mp_quantile(alpha):
    # t = (Phi^{-1}(1 - alpha/2))**2, written through erfinv.
    return (mpmath.sqrt(2) * mpmath.erfinv(1 - mpmath.mpf(alpha))) ** 2


def quad_tail_mean(t):
    """E(X | X > t), X ~ chi2(1), by adaptive quadrature in u = sqrt(x)."""
    r = math.sqrt(t)
    g = lambda u: math.exp(-0.5 * u * u)
    num = integrate.quad(lambda u: u * u * g(u), r, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
    den = integrate.quad(g, r, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
    return num / den


class TestSurvival:
    def test_whole_support(self):
        assert chi2.survival(0.0) == 1.0

    def test_at_one(self):
        assert chi2.survival(1.0) == pytest.approx(0.3173105078629141, rel=1e-14)

    def test_at_one_percent_point(self):
        assert chi2.survival(6.634896601021215) == pytest.approx(0.01, rel=1e-13)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            chi2.survival(-1e-9)

    def test_against_series_oracle(self):
        xs = np.concatenate([np.linspace(1e-8, 5, 60), np.geomspace(5, 1300, 80)])
        for x in xs:
            exact = mp_survival(x)
            assert abs(chi2.survival(x) / float(exact) - 1) < 1e-13, x

    def test_strictly_decreasing(self):
        xs = np.linspace(0, 60, 2001)
        vals = [chi2.survival(x) for x in xs]
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestQuantile:
    @pytest.mark.parametrize(
        "alpha, expected",
        [(1.0, 0.0), (0.5, 0.45493642311957275), (0.01, 6.634896601021215)],
    )
    def test_values(self, alpha, expected):
        assert chi2.quantile(alpha).t == pytest.approx(expected, rel=1e-13, abs=0)

    def test_matches_high_precision_normal_quantile(self):
        for alpha in np.geomspace(1e-12, 0.999, 40):
            assert chi2.quantile(alpha).t == pytest.approx(float(mp_quantile(alpha)), rel=1e-11)

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.0000001, float("nan")])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            chi2.quantile(alpha)

    def test_round_trip_log_grid(self):
        for alpha in np.geomspace(1e-8, 1.0, 400):
            t = chi2.quantile(alpha).t
            assert abs(chi2.survival(t) / alpha - 1) <= 1e-12

    def test_extreme_tail(self):
        t = chi2.quantile(1e-200).t
        assert abs(chi2.survival(t) / 1e-200 - 1) <= 1e-12

    def test_monotone_decreasing(self):
        alphas = np.geomspace(1e-6, 1.0, 300)
        ts = [chi2.quantile(a).t for a in alphas]
        assert all(b < a for a, b in zip(ts, ts[1:]))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=1e-15, max_value=1.0, exclude_min=False))
    def test_round_trip_property(self, alpha):
        t = chi2.quantile(alpha).t
        assert abs(chi2.survival(t) / alpha - 1) <= 1e-12


class TestConditionalTailExpectation:
    def test_zero_threshold(self):
        m = chi2.conditional_tail_expectation(0.0)
        assert m.T_squared == 1.0 and m.T == 1.0

    def test_one_percent_level(self):
        m = chi2.conditional_tail_expectation(6.634896601021215)
        # mpmath quadrature at 40 digits: 8.449165962104146...
        assert m.T_squared == pytest.approx(8.449165962104146, rel=1e-12)
        assert m.T == pytest.approx(2.9067449083303038, rel=1e-12)
        assert 0 < m.T_squared - m.t < 3
        assert m.T_squared - m.t == pytest.approx(1.8142693610829309, rel=1e-10)

    def test_closed_form_matches_quadrature(self):
        for t in np.linspace(0, 30, 61):
            closed = chi2.conditional_tail_expectation(t).T_squared
            assert closed == pytest.approx(quad_tail_mean(t), rel=1e-8), t

    def test_strict_dominance(self):
        for t in np.linspace(0.01, 40, 800):
            assert chi2.conditional_tail_expectation(t).T_squared > t

    def test_mean_residual_tends_to_two(self):
        m = chi2.conditional_tail_expectation(600.0)
        assert m.T_squared - m.t == pytest.approx(2.0, rel=1e-2)

    def test_negative(self):
        with pytest.raises(DomainError):
            chi2.conditional_tail_expectation(-1.0)

    def test_underflow_reported(self):
        with pytest.raises(TailUnderflowError) as info:
            chi2.conditional_tail_expectation(1500.0)
        assert info.value.t == 1500.0
        assert isinstance(info.value, OverflowError)


class TestBigT:
    def test_unit_level(self):
        assert chi2.big_T(1.0).T == 1.0

    def test_one_percent(self):
        assert chi2.big_T(0.01).T == pytest.approx(2.9067449083303038, rel=1e-12)

    def test_half(self):
        # 40-digit mpmath pipeline: quantile then quadrature of the tail mean.
        assert chi2.big_T(0.5).T == pytest.approx(1.3628456128672393, rel=1e-12)
        assert chi2.big_T(0.5).T == pytest.approx(math.sqrt(quad_tail_mean(0.45493642311957275)), rel=1e-9)

    def test_monotone(self):
        alphas = np.geomspace(1e-8, 1.0, 100)
        Ts = [chi2.big_T(float(a)).T for a in alphas]
        assert all(b < a for a, b in zip(Ts, Ts[1:]))


class TestAsymptotics:
    def test_values(self):
        assert chi2.asymptotic_t(math.e, 1) == pytest.approx(2.0)
        assert chi2.asymptotic_t(100, 1) == pytest.approx(9.210340371976184)
        assert chi2.asymptotic_T(1000, 10) == pytest.approx(3.0348542587702925)

    def test_domain(self):
        with pytest.raises(DomainError):
            chi2.asymptotic_t(10, 10)

    def test_ratio_approaches_one(self):
        ratios = [chi2.quantile(a).t / chi2.asymptotic_t(1.0, a) for a in (1e-2, 1e-4, 1e-6, 1e-8)]
        gaps = [abs(1 - r) for r in ratios]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert 0.5 <= ratios[-1] <= 1.1
