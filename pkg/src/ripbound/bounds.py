"""Closed-form bounds on the restricted isometry constants of Gaussian matrices.

All bounds concern ``Phi = A / sqrt(n)`` for an ``n x N`` matrix ``A`` with
i.i.d. standard normal entries, at sparsity ``s`` and ``p = s / n``.
Logarithms are natural throughout. Constants the theory leaves symbolic
(``C``, ``c1``, ``c2``) default to 1 and are echoed back in every report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ripbound import chi2
from ripbound.errors import DomainError, ScanNotFoundError

__all__ = [
    "ProblemDims",
    "BoundReport",
    "CurveRow",
    "Requirement",
    "ALGORITHMS",
    "lower_bound_delta_plus",
    "lower_bound_delta_minus",
    "lower_bound",
    "upper_bound_delta",
    "log_binomial",
    "classical_upper_bound_prob",
    "classical_threshold",
    "eps_for_confidence",
    "min_measurements_sufficient",
    "min_measurements_necessary",
    "algorithm_requirement",
    "curve",
]

DEFAULT_N_MAX = 10**7
PLOT_CLIP = 2.0


@dataclass(frozen=True)
class ProblemDims:
    n: int
    N: int
    s: int

    def __post_init__(self):
        for name in ("n", "N", "s"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise DomainError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not (1 <= self.s < self.N):
            raise DomainError(f"need 1 <= s < N, got s={self.s}, N={self.N}")

    @property
    def p(self) -> float:
        return self.s / self.n

    @property
    def sparsity(self) -> float:
        return self.s / self.N


@dataclass(frozen=True)
class BoundReport:
    """A bound value with the confidence statement it comes with.

    ``value`` is None when the formula cannot be evaluated (negative radicand,
    s = 1 for the lower bounds); ``valid`` is False whenever a regime condition
    fails, and ``reason`` names every failed condition.
    """

    kind: str
    value: float | None
    eps: float
    delta_internal: float | None
    prob_floor: float
    const_C: float
    valid: bool
    reason: str = ""
    T: float | None = None
    level: float | None = None
    flags: tuple[str, ...] = ()

    @property
    def vacuous(self) -> bool:
        return self.value is not None and self.value <= 0.0


def _check_eps(eps: float) -> None:
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")


def _thm1_floor(n: int, eps: float, C: float) -> float:
    return max(0.0, 1.0 - C * math.exp(-n * eps * eps / C))


def _lower(kind: str, dims: ProblemDims, eps: float, C: float) -> BoundReport:
    _check_eps(eps)
    if not C > 0:
        raise DomainError(f"C must be positive, got {C!r}")
    n, N, s = dims.n, dims.N, dims.s
    delta = eps + 1.0 / math.sqrt(n * math.log(N / s))
    floor = _thm1_floor(n, eps, C)
    common = dict(kind=kind, eps=eps, delta_internal=delta, prob_floor=floor, const_C=C)
    if s < 2:
        return BoundReport(value=None, valid=False, reason="s must be >= 2 for the (s-1)/(N-1) level",
                           flags=("s_lt_2",), **common)

    reasons, flags = [], []
    if 5 * s >= N:
        reasons.append("s/N >= 1/5")
        flags.append("sparsity_ge_fifth")
    level = (s - 1) / (N - 1)
    T = chi2.big_T(level).T
    x = math.sqrt(dims.p) * T
    half_pT2 = 0.5 * dims.p * T * T
    if kind == "lower_plus":
        radicand = (1.0 + x) * (1.0 - delta) + half_pT2
    else:
        radicand = 1.0 - x + (1.0 + x) * delta + half_pT2
    if radicand < 0:
        reasons.append("radicand negative")
        flags.append("radicand_negative")
        value = None
    elif kind == "lower_plus":
        value = math.sqrt(radicand) - 1.0
    else:
        value = 1.0 - math.sqrt(radicand)
    return BoundReport(value=value, valid=not reasons, reason="; ".join(reasons), T=T, level=level,
                       flags=tuple(flags), **common)


def lower_bound_delta_plus(dims: ProblemDims, eps: float, C: float = 1.0) -> BoundReport:
    """Probabilistic lower bound on the upper RIP constant delta_s^+.

    Holds with probability at least ``1 - C exp(-n eps**2 / C)``.
    """
    return _lower("lower_plus", dims, eps, C)


def lower_bound_delta_minus(dims: ProblemDims, eps: float, C: float = 1.0) -> BoundReport:
    """Probabilistic lower bound on the lower RIP constant delta_s^-; may be vacuous."""
    return _lower("lower_minus", dims, eps, C)


def lower_bound(dims: ProblemDims, eps: float, C: float = 1.0) -> tuple[float | None, BoundReport, BoundReport]:
    """Lower bound on delta_s = max(delta_s^+, delta_s^-) from whichever sides evaluate."""
    plus = lower_bound_delta_plus(dims, eps, C)
    minus = lower_bound_delta_minus(dims, eps, C)
    values = [r.value for r in (plus, minus) if r.value is not None]
    return (max(values) if values else None), plus, minus


def upper_bound_delta(dims: ProblemDims, eps: float, C: float = 1.0) -> BoundReport:
    """Upper bound on delta_s holding with probability at least 1 - 2 exp(-n eps**2 / 2)."""
    _check_eps(eps)
    if not C >= 0:
        raise DomainError(f"C must be nonnegative, got {C!r}")
    n, N, s = dims.n, dims.N, dims.s
    level = s / N
    T = chi2.big_T(level).T
    value = math.sqrt(dims.p) * T + C / math.sqrt(n * math.log(N / s)) + 0.5 / n + eps
    floor = max(0.0, 1.0 - 2.0 * math.exp(-0.5 * n * eps * eps))
    reasons, flags = [], []
    if 5 * s >= n:
        reasons.append("p = s/n >= 1/5")
        flags.append("p_ge_fifth")
    if 5 * s >= N:
        # Reported next to the p condition, but it does not void the bound.
        flags.append("sparsity_ge_fifth")
    return BoundReport(kind="upper_new", value=value, eps=eps, delta_internal=None, prob_floor=floor,
                       const_C=C, valid=not reasons, reason="; ".join(reasons), T=T, level=level,
                       flags=tuple(flags))


def log_binomial(N: int, s: int) -> float:
    return math.lgamma(N + 1) - math.lgamma(s + 1) - math.lgamma(N - s + 1)


def classical_upper_bound_prob(dims: ProblemDims, delta: float, c1: float = 1.0, c2: float = 1.0) -> float:
    """Classical sub-Gaussian tail bound 2 binom(N, s) exp(-c1 delta**2 n + c2 s), capped at 1."""
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    if not (c1 > 0 and c2 > 0):
        raise DomainError(f"c1 and c2 must be positive, got {c1!r}, {c2!r}")
    exponent = math.log(2.0) + log_binomial(dims.N, dims.s) - c1 * delta * delta * dims.n + c2 * dims.s
    return 1.0 if exponent >= 0 else math.exp(exponent)


def classical_threshold(dims: ProblemDims, confidence: float, c1: float = 1.0, c2: float = 1.0) -> float:
    """Smallest delta whose classical tail bound is at most 1 - confidence.

    Not capped at 1; callers decide how to present thresholds above 1.
    """
    _check_confidence(confidence)
    if not (c1 > 0 and c2 > 0):
        raise DomainError(f"c1 and c2 must be positive, got {c1!r}, {c2!r}")
    num = math.log(2.0) + log_binomial(dims.N, dims.s) + c2 * dims.s - math.log1p(-confidence)
    return math.sqrt(max(num, 0.0) / (c1 * dims.n))


def _check_confidence(confidence: float) -> None:
    if not (0.0 < confidence < 1.0):
        raise DomainError(f"confidence must lie in (0, 1), got {confidence!r}")


def eps_for_confidence(n: int, confidence: float, form: str = "prop2", C: float = 1.0) -> float:
    """Smallest eps whose probability floor reaches ``confidence``.

    ``form="prop2"`` inverts 1 - 2 exp(-n eps**2 / 2) (the upper bound);
    ``form="thm1"`` inverts 1 - C exp(-n eps**2 / C) (the lower bounds).
    """
    _check_confidence(confidence)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    tail = 1.0 - confidence
    if form == "prop2":
        return math.sqrt(2.0 * math.log(2.0 / tail) / n)
    if form == "thm1":
        if not C > tail:
            raise DomainError(f"thm1 form needs C > 1 - confidence, got C={C!r}")
        return math.sqrt(C * math.log(C / tail) / n)
    raise DomainError(f"form must be 'prop2' or 'thm1', got {form!r}")


def _first_true(ok: Callable[[int], bool], lo: int, hi: int) -> int:
    """Smallest n in [lo, hi] with ok(n), for ok monotone False -> True."""
    if not ok(hi):
        raise ScanNotFoundError(f"no n <= {hi} satisfies the target")
    if ok(lo):
        return lo
    # Exponential probe keeps evaluations near the answer when hi is huge.
    step = 1
    while lo + step < hi and not ok(lo + step):
        lo += step
        step *= 2
    hi = min(hi, lo + step)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _assert_nonincreasing(f: Callable[[int], float], lo: int, hi: int, points: int = 64) -> None:
    grid = np.unique(np.geomspace(lo, max(hi, lo + 1), points).round().astype(np.int64))
    values = [f(int(m)) for m in grid]
    for (m1, v1), (m2, v2) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if v2 > v1 + 1e-12 * max(1.0, abs(v1)):
            raise RuntimeError(f"scan objective increases between n={m1} ({v1!r}) and n={m2} ({v2!r})")


def _check_target(delta_target: float) -> None:
    if not (0.0 < delta_target < 1.0):
        raise DomainError(f"delta_target must lie in (0, 1), got {delta_target!r}")


def upper_objective(N: int, s: int, confidence: float, C: float = 1.0) -> Callable[[int], float]:
    """n -> value of the upper bound at the confidence-matched eps (inf when invalid)."""
    def f(n: int) -> float:
        rep = upper_bound_delta(ProblemDims(n, N, s), eps_for_confidence(n, confidence, "prop2"), C)
        return rep.value if rep.valid else math.inf
    return f


def lower_objective(N: int, s: int, confidence: float, C: float = 1.0) -> Callable[[int], float]:
    """n -> max of the evaluable lower bounds at the confidence-matched eps."""
    probe = lower_bound_delta_minus(ProblemDims(1, N, s), 1.0, C)
    if probe.value is None or not probe.valid:
        raise DomainError(f"lower bound unavailable for N={N}, s={s}: {probe.reason}")

    def f(n: int) -> float:
        value, _, _ = lower_bound(ProblemDims(n, N, s), eps_for_confidence(n, confidence, "thm1", C), C)
        return value
    return f


def min_measurements_sufficient(N: int, s: int, delta_target: float, confidence: float = 0.99,
                                C: float = 1.0, n_max: int = DEFAULT_N_MAX) -> int:
    """Smallest n for which the upper bound certifies delta_s <= delta_target."""
    _check_target(delta_target)
    ProblemDims(1, N, s)
    f = upper_objective(N, s, confidence, C)
    n = _first_true(lambda m: f(m) <= delta_target, 1, n_max)
    _assert_nonincreasing(f, 5 * s + 1, min(n_max, 4 * n))
    return n


def min_measurements_necessary(N: int, s: int, delta_target: float, confidence: float = 0.99,
                               C: float = 1.0, n_max: int = DEFAULT_N_MAX) -> int:
    """Smallest n at which the lower bound no longer rules out delta_s <= delta_target.

    For every smaller n the lower bound exceeds the target with the requested
    confidence, so RIP at that level cannot hold there.
    """
    _check_target(delta_target)
    ProblemDims(1, N, s)
    f = lower_objective(N, s, confidence, C)
    n = _first_true(lambda m: f(m) <= delta_target, 1, n_max)
    _assert_nonincreasing(f, 1, min(n_max, 4 * n))
    return n


class Requirement(NamedTuple):
    order: int
    threshold: float
    strict: bool

    def satisfied_by(self, delta: float) -> bool:
        return delta < self.threshold if self.strict else delta <= self.threshold


# id -> (order multiplier, threshold or threshold-as-function-of-s, strict)
ALGORITHMS: dict[str, tuple[int, float | Callable[[int], float], bool]] = {
    "l1": (1, 1.0 / 3.0, True),
    "l1_2s": (2, 4.0 / math.sqrt(41.0), True),
    "omp": (1, lambda s: 1.0 / (1.0 + math.sqrt(s)), True),
    "omp_13s": (13, 1.0 / 6.0, True),
    "cosamp": (4, math.sqrt(math.sqrt(11.0 / 3.0) - 1.0) / 2.0, False),
    "iht": (3, 1.0 / math.sqrt(3.0), True),
    "htp": (3, 1.0 / math.sqrt(3.0), True),
}


def algorithm_requirement(name: str, s: int | None = None) -> Requirement:
    """RIP order multiplier and threshold a recovery algorithm needs.

    ``omp``'s threshold depends on the sparsity, so it needs ``s``.
    """
    try:
        order, threshold, strict = ALGORITHMS[name]
    except KeyError:
        raise DomainError(f"unknown algorithm {name!r}; valid ids: {', '.join(ALGORITHMS)}") from None
    if callable(threshold):
        if s is None or s < 1:
            raise DomainError(f"algorithm {name!r} needs the sparsity s")
        threshold = threshold(s)
    return Requirement(order, threshold, strict)


@dataclass
class CurveRow:
    compression_rate: float
    sparsity_level: float
    n: int
    N: int
    s: int
    lower_bound: float | None
    upper_new: float | None
    upper_classical: float | None
    flags: list[str] = field(default_factory=list)
    lower_plus: float | None = None
    lower_minus: float | None = None

    @property
    def valid(self) -> bool:
        return not any(f.endswith("_invalid") or f == "n_lt_s" for f in self.flags)


def curve(N: int, sparsity_ratio: float, rates: Sequence[float], confidence: float = 0.99, C: float = 1.0,
          c1: float = 1.0, c2: float = 1.0) -> list[CurveRow]:
    """Lower bound, new upper bound and classical upper bound along compression rates N/n.

    Values above the plotting clip of 2 are kept as-is and tagged ``clip_*``.
    """
    _check_confidence(confidence)
    s = round(sparsity_ratio * N)
    if s < 1 or s >= N:
        raise DomainError(f"sparsity {sparsity_ratio!r} gives s={s} at N={N}; need 1 <= s < N")
    rows = []
    for rate in sorted(rates):
        if not rate > 1:
            raise DomainError(f"compression rate must exceed 1, got {rate!r}")
        n = round(N / rate)
        row = CurveRow(compression_rate=float(rate), sparsity_level=float(sparsity_ratio), n=n, N=N, s=s,
                       lower_bound=None, upper_new=None, upper_classical=None)
        rows.append(row)
        if n < s:
            row.flags += ["n_lt_s", "lower_invalid", "upper_new_invalid", "upper_classical_invalid"]
            continue
        dims = ProblemDims(n, N, s)

        lower, plus, minus = lower_bound(dims, eps_for_confidence(n, confidence, "thm1", C), C)
        row.lower_plus, row.lower_minus = plus.value, minus.value
        if lower is None or not (plus.valid or minus.valid):
            row.flags.append("lower_invalid")
        else:
            row.lower_bound = lower
            if lower <= 0:
                row.flags.append("lower_vacuous")

        up = upper_bound_delta(dims, eps_for_confidence(n, confidence, "prop2"), C)
        row.upper_new = up.value
        if not up.valid:
            row.flags.append("upper_new_invalid")
        row.upper_classical = classical_threshold(dims, confidence, c1, c2)

        for name in ("lower_bound", "upper_new", "upper_classical"):
            v = getattr(row, name)
            if v is not None and v > PLOT_CLIP:
                row.flags.append(f"clip_{name}")
    return rows
