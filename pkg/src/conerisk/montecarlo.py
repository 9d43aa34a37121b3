"""Seeded replicate loops shared by the statistical-dimension and risk estimators.

Replicate ``r`` of a run with seed ``s`` always draws from the generator
``SeedSequence(s, spawn_key=(r,))``, so its numbers do not depend on how
replicates are scheduled.  Results are reduced in replicate order.  Setting the
environment variable ``CONERISK_THREADS`` to an integer above 1 spreads the
replicates over that many worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from conerisk.errors import InvalidInputError

THREADS_ENV = "CONERISK_THREADS"


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate,)))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidInputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _run_chunk(func: Callable, seed: int, indices: range, args: tuple) -> list[float]:
    return [func(replicate_rng(seed, r), r, *args) for r in indices]


def run_replicates(func: Callable, reps: int, seed: int, *args) -> np.ndarray:
    """Evaluates ``func(rng, replicate_index, *args)`` for every replicate.

    `func` must be a module-level function returning a float so that it can be
    shipped to worker processes.
    """
    workers = min(worker_count(), reps)
    if workers <= 1:
        return np.array(_run_chunk(func, seed, range(reps), args), dtype=float)
    bounds = np.linspace(0, reps, workers + 1).astype(int)
    chunks = [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [func] * workers, [seed] * workers,
                              chunks, [args] * workers))
    return np.array([v for part in parts for v in part], dtype=float)


def mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def check_reps(reps: int) -> int:
    if not isinstance(reps, (int, np.integer)) or reps < 2:
        raise InvalidInputError("reps must be an integer >= 2")
    return int(reps)
