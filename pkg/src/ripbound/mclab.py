"""Random measurement matrices, adversarial sparse vectors and exact RIP constants.

The adversarial construction fixes the first coordinate of a unit vector at
1/sqrt(2) and spends the remaining mass on the ``s - 1`` columns most
correlated with the first column. ``||Phi v'||**2 - 1`` is then a certified
lower bound on delta_s^+, and flipping the tail signs gives one on delta_s^-.
For tiny matrices ``exact_rip`` enumerates all supports and reads the
constants off the extreme eigenvalues of the s x s Gram matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ripbound import bounds, chi2
from ripbound._parallel import RNG_METHOD, ordered_map, trial_rng
from ripbound.errors import CapExceededError, DomainError

__all__ = [
    "DenseMatrix",
    "AdversarialCertificate",
    "ExactRip",
    "ExperimentSummary",
    "sample_matrix",
    "adversarial_pair",
    "exact_rip",
    "restricted_singular_values",
    "run_experiment",
]

ENSEMBLES = ("gaussian", "rademacher")
DEFAULT_CAP = 10**6
_CHUNK = 4096


@dataclass(frozen=True)
class DenseMatrix:
    entries: np.ndarray = field(repr=False)
    ensemble: str
    seed: int
    stream: int = 0
    method: str = RNG_METHOD

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def phi(self) -> np.ndarray:
        """The normalised matrix A / sqrt(n)."""
        return self.entries / math.sqrt(self.rows)


def sample_matrix(n: int, N: int, ensemble: str = "gaussian", seed: int = 0, stream: int = 0) -> DenseMatrix:
    """Draw an n x N matrix with i.i.d. zero-mean unit-variance entries.

    ``(ensemble, seed, stream, n, N)`` determines the entries bit for bit.
    """
    if n < 1 or N < 1:
        raise DomainError(f"matrix dimensions must be positive, got {n} x {N}")
    rng = trial_rng(seed, stream)
    if ensemble == "gaussian":
        entries = rng.standard_normal((n, N))
    elif ensemble == "rademacher":
        entries = rng.integers(0, 2, size=(n, N), dtype=np.int8).astype(float) * 2.0 - 1.0
    else:
        raise DomainError(f"ensemble must be one of {ENSEMBLES}, got {ensemble!r}")
    return DenseMatrix(entries=entries, ensemble=ensemble, seed=seed, stream=stream)


def _entries(A) -> np.ndarray:
    a = A.entries if isinstance(A, DenseMatrix) else np.asarray(A, dtype=float)
    if a.ndim != 2:
        raise DomainError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class AdversarialCertificate:
    v_plus: np.ndarray = field(repr=False)
    v_minus: np.ndarray = field(repr=False)
    delta_plus_emp: float
    delta_minus_emp: float
    support: tuple[int, ...]
    degenerate: bool = False

    @property
    def norm_plus_sq(self) -> float:
        """||Phi v'||**2."""
        return 1.0 + self.delta_plus_emp


def adversarial_pair(A, s: int) -> AdversarialCertificate:
    a = _entries(A)
    n, N = a.shape
    if not (2 <= s <= N):
        raise DomainError(f"need 2 <= s <= N, got s={s}, N={N}")
    a1 = a[:, 0]
    norm_a1 = float(np.linalg.norm(a1))
    if norm_a1 == 0.0:
        raise DomainError("first column is zero; the construction is undefined")

    x = (a[:, 1:].T @ a1) / norm_a1
    # Stable sort: among equal |x_i| the lower column index is picked first.
    chosen = np.argsort(-np.abs(x), kind="stable")[: s - 1]
    weights = x[chosen]
    norm_w = float(np.linalg.norm(weights))
    degenerate = norm_w == 0.0
    if degenerate:
        chosen = np.arange(s - 1)
        weights = np.ones(s - 1)
        norm_w = math.sqrt(s - 1)

    half = 1.0 / math.sqrt(2.0)
    cols = np.concatenate(([0], chosen + 1))
    tail = half * weights / norm_w
    v_plus = np.zeros(N)
    v_plus[0] = half
    v_plus[chosen + 1] = tail
    v_minus = -v_plus
    v_minus[0] = half

    sub = a[:, cols]
    scale = 1.0 / n
    norm_plus = float(np.sum((sub @ v_plus[cols]) ** 2)) * scale
    norm_minus = float(np.sum((sub @ v_minus[cols]) ** 2)) * scale
    return AdversarialCertificate(
        v_plus=v_plus,
        v_minus=v_minus,
        delta_plus_emp=norm_plus - 1.0,
        delta_minus_emp=1.0 - norm_minus,
        support=tuple(int(c) for c in np.sort(cols)),
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class ExactRip:
    delta_plus: float
    delta_minus: float
    supports_checked: int
    support_plus: tuple[int, ...] = ()
    support_minus: tuple[int, ...] = ()

    @property
    def delta_s(self) -> float:
        return max(self.delta_plus, self.delta_minus)


def _chunk_extremes(phi: np.ndarray, supports: np.ndarray):
    sub = phi[:, supports]  # (n, m, s)
    gram = np.einsum("imj,imk->mjk", sub, sub)
    eig = np.linalg.eigvalsh(gram)
    lo, hi = eig[:, 0], eig[:, -1]
    i_hi, i_lo = int(np.argmax(hi)), int(np.argmin(lo))
    return float(hi[i_hi]), supports[i_hi], float(lo[i_lo]), supports[i_lo]


def exact_rip(A, s: int, cap: int = DEFAULT_CAP, workers: int | None = None) -> ExactRip:
    """Exact delta_s^+ and delta_s^- of A / sqrt(n) by enumerating every support.

    Supports are visited in lexicographic order; ties for the extreme keep the
    first support reached. Refuses with CapExceededError beyond ``cap`` supports.
    """
    a = _entries(A)
    n, N = a.shape
    if not (1 <= s <= N):
        raise DomainError(f"need 1 <= s <= N, got s={s}, N={N}")
    count = math.comb(N, s)
    if count > cap:
        raise CapExceededError(count, cap)
    phi = a / math.sqrt(n)

    combos = itertools.combinations(range(N), s)
    chunks = []
    while True:
        block = list(itertools.islice(combos, _CHUNK))
        if not block:
            break
        chunks.append(np.array(block, dtype=np.intp))

    results = ordered_map(lambda i: _chunk_extremes(phi, chunks[i]), range(len(chunks)), workers)
    best_hi, sup_hi, best_lo, sup_lo = -math.inf, None, math.inf, None
    for hi, s_hi, lo, s_lo in results:
        if hi > best_hi:
            best_hi, sup_hi = hi, s_hi
        if lo < best_lo:
            best_lo, sup_lo = lo, s_lo
    return ExactRip(
        delta_plus=best_hi - 1.0,
        delta_minus=1.0 - best_lo,
        supports_checked=count,
        support_plus=tuple(int(i) for i in sup_hi),
        support_minus=tuple(int(i) for i in sup_lo),
    )


def restricted_singular_values(A, s: int, cap: int = DEFAULT_CAP) -> tuple[float, float]:
    """(sigma_max^s(A), sigma_min^s(A)) for the unscaled matrix A.

    Since delta_s^+ = sup ||Phi x||**2 - 1, sigma_max^s(A) = sqrt(n (1 + delta_s^+)),
    and likewise for the minimum.
    """
    a = _entries(A)
    n = a.shape[0]
    r = exact_rip(a, s, cap)
    return math.sqrt(n * (1.0 + r.delta_plus)), math.sqrt(n * max(0.0, 1.0 - r.delta_minus))


@dataclass
class ExperimentSummary:
    dims: bounds.ProblemDims
    ensemble: str
    trials: int
    seed: int
    confidence: float
    const_C: float
    eps: float
    delta_plus_emp: np.ndarray = field(repr=False)
    delta_minus_emp: np.ndarray = field(repr=False)
    lower_plus: bounds.BoundReport = None
    lower_minus: bounds.BoundReport = None
    center: float = math.nan
    center_support: float = math.nan
    degenerate: int = 0

    @property
    def mean_norm_plus(self) -> float:
        return float(np.mean(self.delta_plus_emp)) + 1.0

    @property
    def center_gap(self) -> float:
        return abs(self.mean_norm_plus - self.center)

    @property
    def coverage_plus(self) -> float:
        if self.lower_plus.value is None:
            return math.nan
        return float(np.mean(self.delta_plus_emp >= self.lower_plus.value))

    @property
    def coverage_minus(self) -> float:
        if self.lower_minus.value is None:
            return math.nan
        return float(np.mean(self.delta_minus_emp >= self.lower_minus.value))

    def quantiles(self, qs=(0.01, 0.05, 0.5, 0.95, 0.99)) -> dict[str, list[float]]:
        return {
            "delta_plus_emp": [float(v) for v in np.quantile(self.delta_plus_emp, qs)],
            "delta_minus_emp": [float(v) for v in np.quantile(self.delta_minus_emp, qs)],
        }


def run_experiment(dims: bounds.ProblemDims, ensemble: str = "gaussian", trials: int = 1000, seed: int = 0,
                   confidence: float = 0.99, C: float = 1.0, workers: int | None = None) -> ExperimentSummary:
    """Draw ``trials`` matrices and compare adversarial certificates with the lower bounds.

    The summary also carries the deterministic centre 1 + sqrt(p) T + p T**2 / 2
    with T at level (s-1)/(N-1), and ``center_support``, the same expansion with
    the s-1 tail coordinates the construction actually uses plus the -1/(2n)
    correction from the residual quadratic form.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    n, N, s = dims.n, dims.N, dims.s

    def one_trial(i: int):
        cert = adversarial_pair(sample_matrix(n, N, ensemble, seed, stream=i), s)
        return cert.delta_plus_emp, cert.delta_minus_emp, cert.degenerate

    out = ordered_map(one_trial, range(trials), workers)
    eps = bounds.eps_for_confidence(n, confidence, "thm1", C)
    plus = bounds.lower_bound_delta_plus(dims, eps, C)
    minus = bounds.lower_bound_delta_minus(dims, eps, C)
    T = chi2.big_T((s - 1) / (N - 1)).T
    p, q = s / n, (s - 1) / n
    return ExperimentSummary(
        dims=dims,
        ensemble=ensemble,
        trials=trials,
        seed=seed,
        confidence=confidence,
        const_C=C,
        eps=eps,
        delta_plus_emp=np.array([o[0] for o in out]),
        delta_minus_emp=np.array([o[1] for o in out]),
        lower_plus=plus,
        lower_minus=minus,
        center=1.0 + math.sqrt(p) * T + 0.5 * p * T * T,
        center_support=1.0 - 0.5 / n + math.sqrt(q) * T + 0.5 * q * T * T,
        degenerate=sum(1 for o in out if o[2]),
    )
