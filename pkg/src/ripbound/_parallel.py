"""Seed derivation and an order-preserving parallel map.

Every Monte Carlo trial gets its own generator keyed on ``(seed, index)``,
so results do not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

from ripbound.errors import DomainError

T = TypeVar("T")

THREADS_ENV = "RIPBOUND_THREADS"
# Recorded in run manifests so fixtures can be regenerated exactly.
RNG_METHOD = "numpy.Generator(Philox) keyed by SeedSequence(seed, spawn_key=(index,)); normals via ziggurat"


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based generator for trial ``index`` of run ``seed``."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return min(8, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def ordered_map(fn: Callable[[int], T], indices: Iterable[int], workers: int | None = None) -> list[T]:
    """``[fn(i) for i in indices]``, possibly evaluated on a thread pool."""
    indices = list(indices)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(indices) <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))
