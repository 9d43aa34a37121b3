"""Statistical dimension of cones.

``delta(K) = E ||Pi_K(Z)||^2`` for standard normal Z.  For the isotonic cone it
equals the harmonic number H_n, and also the expected number of distinct levels
of the isotonic fit of Z.  Other cones are handled by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from conerisk.core import ConeSpec
from conerisk.errors import InvalidInputError, NonConvergence
from conerisk.montecarlo import check_reps, mean_and_stderr, run_replicates
from conerisk.projection import pava_blocks, project

DEFAULT_REPS = 10_000


@dataclass(frozen=True)
class StatDimEstimate:
    """A statistical-dimension value, exact or estimated.

    ``method`` is one of ``exact_harmonic``, ``projection_norm``, ``level_count``.
    """

    mean: float
    stderr: float
    reps: int
    seed: Optional[int]
    method: str
    n: int
    cone: str = "isotonic"

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "reps": self.reps,
                "seed": self.seed, "method": self.method, "n": self.n, "cone": self.cone}


def _check_n(n) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInputError("n must be an integer >= 1")
    return int(n)


def harmonic_fraction(n: int) -> Fraction:
    """H_n as an exact rational."""
    n = _check_n(n)
    return sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0))


def delta_isotonic_exact(n: int) -> float:
    """``delta`` of the nondecreasing cone in R^n, which is H_n."""
    n = _check_n(n)
    return math.fsum(1.0 / j for j in range(1, n + 1))


def _projection_norm(rng, replicate, cone, n):
    result = project(rng.standard_normal(n), cone)
    if not result.converged:
        raise NonConvergence(
            f"projection failed in replicate {replicate}", result=result, replicate=replicate)
    return float(result.fitted @ result.fitted)


def _level_count(rng, replicate, n):
    return float(pava_blocks(rng.standard_normal(n))[0].size)


def delta_monte_carlo(cone: ConeSpec, n: int, reps: int = DEFAULT_REPS,
                      seed: int = 0) -> StatDimEstimate:
    """Estimates ``delta`` as the mean squared norm of the projected Gaussian vector.

    Raises:
      NonConvergence: a projection hit its iteration cap; ``replicate`` names it.
    """
    n = _check_n(n)
    reps = check_reps(reps)
    values = run_replicates(_projection_norm, reps, seed, cone, n)
    mean, stderr = mean_and_stderr(values)
    return StatDimEstimate(mean, stderr, reps, seed, "projection_norm", n, str(cone))


def delta_level_count(n: int, reps: int = DEFAULT_REPS, seed: int = 0) -> StatDimEstimate:
    """Estimates ``delta`` of the isotonic cone as the mean number of PAVA blocks."""
    n = _check_n(n)
    reps = check_reps(reps)
    values = run_replicates(_level_count, reps, seed, n)
    mean, stderr = mean_and_stderr(values)
    return StatDimEstimate(mean, stderr, reps, seed, "level_count", n)


def delta_exact_estimate(n: int) -> StatDimEstimate:
    return StatDimEstimate(delta_isotonic_exact(n), 0.0, 0, None, "exact_harmonic", _check_n(n))


class MonteCarloDeltaTable:
    """Callable ``length -> delta(K^length)`` backed by cached Monte Carlo runs.

    Lengths below the cone's width give the whole space, whose dimension is
    returned exactly.  The isotonic cone is answered with H_n.
    """

    def __init__(self, cone: ConeSpec, reps: int = 1000, seed: int = 0):
        self.cone = cone
        self.reps = check_reps(reps)
        self.seed = seed
        self._cache: dict[int, float] = {}

    def __call__(self, length: int) -> float:
        length = _check_n(length)
        if self.cone.n_constraints(length) == 0:
            return float(length)
        if self.cone.is_isotonic:
            return delta_isotonic_exact(length)
        if length not in self._cache:
            est = delta_monte_carlo(self.cone, length, self.reps, self.seed)
            self._cache[length] = est.mean
        return self._cache[length]

    def describe(self) -> str:
        return f"monte_carlo(reps={self.reps}, seed={self.seed})"
