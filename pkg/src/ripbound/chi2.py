"""Tail primitives for the chi-squared distribution with one degree of freedom.

If ``X`` is standard normal then ``X**2`` is chi-squared(1), so every
quantity here reduces to the complementary error function:

    P(X**2 > x) = erfc(sqrt(x / 2))

The conditional tail mean has the closed form

    E(X**2 | X**2 > t) = 1 + sqrt(2 t / pi) * exp(-t / 2) / P(X**2 > t)

obtained by integrating ``x f(x)`` by parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ripbound.errors import DomainError, TailUnderflowError

__all__ = [
    "TailSpec",
    "ConditionalMoment",
    "survival",
    "density",
    "quantile",
    "conditional_tail_expectation",
    "big_T",
    "asymptotic_t",
    "asymptotic_T",
]

SURVIVAL_FLOOR = 1e-300
_BISECT_RTOL = 1e-6
_MAX_BISECT = 2000
_MAX_NEWTON = 60


@dataclass(frozen=True)
class TailSpec:
    """Upper-tail level ``alpha`` and the threshold ``t`` with P(X > t) = alpha."""

    alpha: float
    t: float


@dataclass(frozen=True)
class ConditionalMoment:
    t: float
    T_squared: float

    @property
    def T(self) -> float:
        return math.sqrt(self.T_squared)


def survival(x: float) -> float:
    """P(X > x) for X ~ chi-squared(1)."""
    if not x >= 0:
        raise DomainError(f"survival requires x >= 0, got {x!r}")
    return math.erfc(math.sqrt(0.5 * x))


def density(x: float) -> float:
    if not x > 0:
        raise DomainError(f"density requires x > 0, got {x!r}")
    return math.exp(-0.5 * x) / math.sqrt(2.0 * math.pi * x)


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"tail probability must lie in (0, 1], got {alpha!r}")


def quantile(alpha: float) -> TailSpec:
    """Return the threshold ``t`` whose upper-tail probability is ``alpha``.

    Bracketing bisection narrows ``t`` to a relative width of 1e-6, then
    Newton steps on ``log survival(t)`` polish it. Working in log space keeps
    the iteration well conditioned far into the tail (alpha ~ 1e-100 and
    below), where the survival function itself is tiny.
    """
    _check_alpha(alpha)
    if alpha == 1.0:
        return TailSpec(alpha=1.0, t=0.0)

    lo, hi = 0.0, 1.0
    while survival(hi) > alpha:
        lo, hi = hi, 2.0 * hi
        if hi > 1e4:
            raise DomainError(f"alpha={alpha!r} is below the representable tail")

    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if survival(mid) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_RTOL * hi:
            break

    log_alpha = math.log(alpha)
    t = 0.5 * (lo + hi)
    for _ in range(_MAX_NEWTON):
        s = survival(t)
        step = (math.log(s) - log_alpha) * s / density(t)
        t_new = t + step
        if not lo <= t_new <= hi:
            # Newton left the bracket; fall back to its midpoint.
            t_new = 0.5 * (lo + hi)
        if survival(t_new) > alpha:
            lo = max(lo, t_new)
        else:
            hi = min(hi, t_new)
        if abs(t_new - t) <= 4.0 * math.ulp(t_new):
            t = t_new
            break
        t = t_new
    return TailSpec(alpha=alpha, t=t)


def conditional_tail_expectation(t: float) -> ConditionalMoment:
    """E(X | X > t) for X ~ chi-squared(1), returned as T**2 together with T.

    Raises TailUnderflowError when survival(t) drops below 1e-300, since the
    closed form divides by it.
    """
    if not t >= 0:
        raise DomainError(f"threshold must be >= 0, got {t!r}")
    if t == 0.0:
        return ConditionalMoment(t=0.0, T_squared=1.0)
    s = survival(t)
    if s < SURVIVAL_FLOOR:
        raise TailUnderflowError(t, s)
    return ConditionalMoment(t=t, T_squared=1.0 + math.sqrt(2.0 * t / math.pi) * math.exp(-0.5 * t) / s)


@lru_cache(maxsize=4096)
def big_T(alpha: float) -> ConditionalMoment:
    """Conditional tail moment at the upper-tail level ``alpha``."""
    return conditional_tail_expectation(quantile(alpha).t)


def _check_ratio(N: float, s: float) -> None:
    if not (0 < s < N):
        raise DomainError(f"need 0 < s < N, got s={s!r}, N={N!r}")


def asymptotic_t(N: float, s: float) -> float:
    """Leading-order threshold 2 ln(N/s) as s/N -> 0."""
    _check_ratio(N, s)
    return 2.0 * math.log(N / s)


def asymptotic_T(N: float, s: float) -> float:
    return math.sqrt(asymptotic_t(N, s))
