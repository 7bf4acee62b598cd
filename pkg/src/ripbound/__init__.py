"""Bounds on restricted isometry constants of Gaussian matrices, with Monte Carlo checks."""

__version__ = "0.1.0"

from ripbound.bounds import (  # noqa: E402
    ProblemDims,
    eps_for_confidence,
    lower_bound_delta_minus,
    lower_bound_delta_plus,
    upper_bound_delta,
)
from ripbound.chi2 import big_T, conditional_tail_expectation, quantile, survival  # noqa: E402
from ripbound.errors import CapExceededError, DomainError, ScanNotFoundError, TailUnderflowError  # noqa: E402

__all__ = [
    "ProblemDims",
    "eps_for_confidence",
    "lower_bound_delta_minus",
    "lower_bound_delta_plus",
    "upper_bound_delta",
    "big_T",
    "conditional_tail_expectation",
    "quantile",
    "survival",
    "CapExceededError",
    "DomainError",
    "ScanNotFoundError",
    "TailUnderflowError",
]
