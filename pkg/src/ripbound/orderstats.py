"""Top-k order statistics of chi-squared(1) samples and their concentration.

``T_k`` is the root-mean of the ``k`` largest of ``n`` i.i.d. chi-squared(1)
draws. It concentrates around ``T = sqrt(E(Y | Y > t))`` where
``P(Y > t) = k / n``:

    P(|T_k - T| > C / sqrt(k ln(n/k)) + eps) <= 2 exp(-k eps**2 / 2)

The constant ``C`` is not pinned down by the theory, so every function that
needs it takes it as a parameter (default 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ripbound import chi2
from ripbound._parallel import ordered_map, trial_rng
from ripbound.errors import DomainError

__all__ = [
    "TopKSum",
    "ConcentrationBound",
    "OrderStatReport",
    "RegimeWarning",
    "top_k_rms",
    "theoretical_T",
    "deviation_bound",
    "relative_entropy",
    "entropy_lower_bound",
    "quantile_concentration_bound",
    "dkw_bound",
    "mc_verify_concentration",
]

LOG_E_OVER_2 = 1.0 - math.log(2.0)
DEFAULT_EPS_GRID = (0.2, 0.326, 0.5)


class RegimeWarning(UserWarning):
    """Parameters fall outside the range where a bound is claimed to hold."""


@dataclass(frozen=True)
class TopKSum:
    k: int
    n: int
    T_k: float


@dataclass(frozen=True)
class ConcentrationBound:
    center: float
    radius_bias: float
    radius_tail: float
    prob_floor: float
    const_C: float

    @property
    def radius(self) -> float:
        return self.radius_bias + self.radius_tail


@dataclass
class OrderStatReport:
    n: int
    k: int
    trials: int
    seed: int
    const_C: float
    T: float
    values: np.ndarray = field(repr=False)
    coverage: dict[float, float] = field(default_factory=dict)
    prob_floor: dict[float, float] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def sd(self) -> float:
        if self.trials < 2:
            return 0.0
        return float(np.std(self.values, ddof=1))

    @property
    def bias(self) -> float:
        return abs(self.mean - self.T)

    @property
    def bias_radius(self) -> float:
        return self.const_C / math.sqrt(self.k * math.log(self.n / self.k))


def top_k_rms(samples, k: int) -> TopKSum:
    """Root-mean of the ``k`` largest values in ``samples``."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if not (1 <= k <= n):
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("samples must be nonnegative")
    if k == n:
        top = x
    else:
        # The sum of the top k does not depend on which of several tied
        # values is picked, so an unstable partition is fine here.
        top = np.partition(x, n - k)[n - k:]
    return TopKSum(k=k, n=n, T_k=math.sqrt(float(np.sum(top)) / k))


def _top_k_rms_fast(x: np.ndarray, k: int) -> float:
    n = x.size
    return math.sqrt(float(np.sum(np.partition(x, n - k)[n - k:])) / k)


def theoretical_T(n: int, k: int) -> chi2.ConditionalMoment:
    """The centre ``T`` for top-``k`` of ``n``; warns when k/n >= 1/5."""
    if not (0 < k <= n):
        raise DomainError(f"need 0 < k <= n, got k={k}, n={n}")
    if 5 * k >= n:
        warnings.warn(
            f"k/n = {k / n:.4g} >= 1/5; concentration bound is not claimed here",
            RegimeWarning,
            stacklevel=2,
        )
    return chi2.big_T(k / n)


def deviation_bound(n: int, k: int, eps: float, C: float = 1.0) -> ConcentrationBound:
    if not (1 <= k < n):
        raise DomainError(f"need 1 <= k < n so that ln(n/k) > 0, got k={k}, n={n}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if not C > 0:
        raise DomainError(f"C must be positive, got {C!r}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        center = theoretical_T(n, k).T
    floor = max(0.0, 1.0 - 2.0 * math.exp(-0.5 * k * eps * eps))
    return ConcentrationBound(
        center=center,
        radius_bias=C / math.sqrt(k * math.log(n / k)),
        radius_tail=eps,
        prob_floor=floor,
        const_C=C,
    )


def relative_entropy(a: float, b: float) -> float:
    """Kullback-Leibler divergence D(Bernoulli(a) || Bernoulli(b))."""
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise DomainError(f"need a, b in (0, 1), got a={a!r}, b={b!r}")
    # With u = (b-a)/a and w = (a-b)/(1-a), a*u + (1-a)*w = 0, so
    # D = a*(u - log1p(u)) + (1-a)*(w - log1p(w)); this avoids cancelling
    # first-order terms when b is close to a.
    u = (b - a) / a
    w = (a - b) / (1.0 - a)
    return a * _x_minus_log1p(u) + (1.0 - a) * _x_minus_log1p(w)


def _x_minus_log1p(x: float) -> float:
    if abs(x) > 1e-2:
        return x - math.log1p(x)
    total, term = 0.0, x
    for j in range(2, 14):
        term *= -x
        total += term / j
    return -total


def entropy_lower_bound(alpha: float, delta: float) -> float:
    """Quadratic lower bound delta**2 (1/alpha + 1/(1-alpha)) ln(e/2)."""
    return delta * delta * (1.0 / alpha + 1.0 / (1.0 - alpha)) * LOG_E_OVER_2


def quantile_concentration_bound(n: int, k: int, delta: float) -> float:
    """One-sided tail bound for the k-th order statistic leaving its quantile band.

    Bounds both P(X_(k+1) <= t_minus) and P(X_(k-1) > t_plus), where the band
    edges sit at upper-tail levels k/n + delta and k/n - delta.
    """
    if not (0 < k < n):
        raise DomainError(f"need 0 < k < n, got k={k}, n={n}")
    alpha = k / n
    if alpha >= 0.5:
        raise DomainError(f"need k/n < 1/2, got {alpha!r}")
    if not (0.0 < delta < min(alpha, 1.0 - alpha)):
        raise DomainError(f"delta must lie in (0, {min(alpha, 1 - alpha)!r}), got {delta!r}")
    return math.exp(-n * entropy_lower_bound(alpha, delta))


def dkw_bound(n: int, eps: float) -> float:
    """Uniform empirical-CDF deviation bound min(1, 2 exp(-2 n eps**2))."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    return min(1.0, 2.0 * math.exp(-2.0 * n * eps * eps))


def mc_verify_concentration(
    n: int,
    k: int,
    trials: int,
    seed: int,
    eps_grid=DEFAULT_EPS_GRID,
    C: float = 1.0,
    workers: int | None = None,
) -> OrderStatReport:
    """Monte Carlo check of the top-k concentration bound.

    Each trial squares ``n`` standard normals and records ``T_k``. The report
    carries, for every ``eps`` in ``eps_grid``, the fraction of trials with
    ``|T_k - T| <= C / sqrt(k ln(n/k)) + eps`` next to the probability floor
    the bound promises.
    """
    if not (1 <= k and 5 * k < n):
        raise DomainError(f"need 1 <= k < n/5, got k={k}, n={n}")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")

    def one_trial(i: int) -> float:
        z = trial_rng(seed, i).standard_normal(n)
        return _top_k_rms_fast(z * z, k)

    values = np.array(ordered_map(one_trial, range(trials), workers), dtype=float)
    T = theoretical_T(n, k).T
    report = OrderStatReport(n=n, k=k, trials=trials, seed=seed, const_C=C, T=T, values=values)
    dev = np.abs(values - T)
    for eps in eps_grid:
        b = deviation_bound(n, k, eps, C)
        report.coverage[eps] = float(np.mean(dev <= b.radius))
        report.prob_floor[eps] = b.prob_floor
    return report
