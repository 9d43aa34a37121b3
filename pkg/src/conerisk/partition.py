"""Exact optimization of the variation functionals over interval partitions.

For each block count m the curves report the smallest value of ``V_pi``,
``D_pi^2`` or ``S_pi^2`` over all partitions with exactly m blocks, together
with a partition attaining it.

The span curve uses the fact that the optimum is always a pairwise difference
``theta_j - theta_i``: bisection on the threshold, where every feasible probe
is snapped down to the largest span of its greedy partition, ends on the exact
optimal difference.  The squared-deviation curves come from a dynamic program
over split points whose block costs are tabulated once with Welford updates
(constant blocks cost exactly zero).  :func:`brute_force_curve` enumerates all
compositions and is the reference for small n.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from conerisk.core import IntervalPartition, as_sequence, require_nondecreasing
from conerisk.errors import InvalidInputError

FUNCTIONALS = ("v", "v2", "d2", "s2")
BRUTE_FORCE_MAX_N = 16


@dataclass(frozen=True)
class PartitionCurve:
    """Best value and witness partition for each block count ``m = 1..len``."""

    functional: str
    values: tuple[float, ...]
    witnesses: tuple[IntervalPartition, ...]

    def __len__(self) -> int:
        return len(self.values)

    def best(self, m: int) -> float:
        return self.values[m - 1]

    def witness(self, m: int) -> IntervalPartition:
        return self.witnesses[m - 1]

    def rows(self):
        for m, (value, wit) in enumerate(zip(self.values, self.witnesses), start=1):
            yield m, value, wit


def _greedy(theta: list[float], t: float, limit: int):
    """Fewest blocks with span <= t, built left to right.

    Returns (starts, largest span) or None when more than `limit` blocks are needed.
    """
    n = len(theta)
    starts = []
    span = 0.0
    i = 0
    while i < n:
        if len(starts) == limit:
            return None
        starts.append(i)
        j = bisect.bisect_right(theta, theta[i] + t, i) - 1
        j = min(max(j, i), n - 1)
        while j + 1 < n and theta[j + 1] - theta[i] <= t:
            j += 1
        while theta[j] - theta[i] > t:
            j -= 1
        span = max(span, theta[j] - theta[i])
        i = j + 1
    return starts, span


def _pad_starts(starts: list[int], m: int, n: int) -> IntervalPartition:
    """Adds the leftmost unused split points until there are m blocks."""
    have = set(starts)
    extra = []
    candidate = 1
    while len(starts) + len(extra) < m:
        if candidate not in have:
            extra.append(candidate)
        candidate += 1
    bounds = sorted(starts + extra) + [n]
    return IntervalPartition.from_boundaries(bounds)


def _min_span(theta: list[float], m: int, hi: float) -> tuple[float, list[int]]:
    zero = _greedy(theta, 0.0, m)
    if zero is not None:
        return 0.0, zero[0]
    lo = 0.0
    best = _greedy(theta, hi, m)
    hi = best[1]
    while True:
        mid = lo + (hi - lo) / 2
        if not lo < mid < hi:
            return hi, best[0]
        probe = _greedy(theta, mid, m)
        if probe is None:
            lo = mid
        else:
            best = probe
            hi = probe[1]


def iter_vpi(theta) -> Iterator[tuple[int, float, IntervalPartition]]:
    """Yields ``(m, min V_pi, witness)`` for m = 1, 2, ..., n."""
    theta = require_nondecreasing(theta).tolist()
    n = len(theta)
    hi = theta[-1] - theta[0]
    for m in range(1, n + 1):
        value, starts = _min_span(theta, m, hi)
        hi = value
        yield m, value, _pad_starts(list(starts), m, n)


def _diagonals(theta: np.ndarray, functional: str) -> Iterator[np.ndarray]:
    """Yields, for block length L = 1..n, the costs of ``theta[i:i+L]`` for every i.

    Welford updates in a fixed order, so every caller sees bit-identical costs.
    """
    n = theta.size
    yield np.zeros(n)
    mean = theta.copy()
    m2 = np.zeros(n)
    for length in range(2, n + 1):
        k = n - length + 1
        x = theta[length - 1:]
        mu = mean[:k]
        delta = x - mu
        new_mu = mu + delta / length
        m2[:k] += delta * (x - new_mu)
        mean[:k] = new_mu
        cost = np.maximum(m2[:k], 0.0)
        if functional == "s2":
            cost = cost + length * (new_mu - x) ** 2
        yield cost


def _check_functional(functional: str) -> None:
    if functional not in ("d2", "s2"):
        raise InvalidInputError(f"no block cost for functional {functional!r}")


def cost_table(theta, functional: str) -> np.ndarray:
    """``table[i, j]`` = cost of block ``theta[i:j]``; +inf when ``j <= i``.

    ``"d2"``: sum of squared deviations from the block mean.
    ``"s2"``: sum of squared deviations from the block's last entry.
    """
    theta = as_sequence(theta)
    _check_functional(functional)
    n = theta.size
    table = np.full((n + 1, n + 1), np.inf)
    for length, cost in enumerate(_diagonals(theta, functional), start=1):
        i = np.arange(cost.size)
        table[i, i + length] = cost
    return table


# keep the diagonals in memory up to this n; regenerate them per layer above it
_CACHE_DIAGONALS_MAX_N = 3000


def iter_dp(theta, functional: str) -> Iterator[tuple[int, float, IntervalPartition]]:
    """Yields ``(m, min over m-block partitions of cost / n, witness)`` for m = 1..n.

    Layer m is ``C_m[j] = min_i C_{m-1}[i] + cost(i, j)``; ties go to the smallest i.
    """
    theta = as_sequence(theta)
    _check_functional(functional)
    if functional == "s2":
        theta = require_nondecreasing(theta)
    n = theta.size
    cached = list(_diagonals(theta, functional)) if n <= _CACHE_DIAGONALS_MAX_N else None

    def diagonals():
        return cached if cached is not None else _diagonals(theta, functional)

    layer = np.full(n + 1, np.inf)
    for length, cost in enumerate(diagonals(), start=1):
        if length == n:
            layer[n] = cost[0]
        else:
            layer[length] = cost[0]
    idx = np.arange(n + 1)
    parents: list[np.ndarray] = []
    for m in range(1, n + 1):
        if m > 1:
            best = np.full(n + 1, np.inf)
            arg = np.zeros(n + 1, dtype=int)
            # lengths ascend, so for fixed j the start i descends; "<=" keeps the smallest i
            for length, cost in enumerate(diagonals(), start=1):
                k = cost.size
                cand = layer[:k] + cost
                target = best[length:]
                upd = cand <= target
                target[upd] = cand[upd]
                arg[length:][upd] = idx[:k][upd]
            layer = best
            parents.append(arg)
        bounds = [n]
        for arg in reversed(parents):
            bounds.append(int(arg[bounds[-1]]))
        bounds.append(0)
        yield m, float(layer[n] / n), IntervalPartition.from_boundaries(bounds[::-1])


def _collect(functional, iterator, max_blocks: Optional[int]) -> PartitionCurve:
    values, witnesses = [], []
    for m, value, wit in iterator:
        if max_blocks is not None and m > max_blocks:
            break
        values.append(value)
        witnesses.append(wit)
    return PartitionCurve(functional, tuple(values), tuple(witnesses))


def min_vpi_curve(theta, max_blocks: Optional[int] = None) -> PartitionCurve:
    """Minimal largest block span ``V_pi`` for each block count."""
    return _collect("v", iter_vpi(theta), max_blocks)


def min_dpi2_curve(theta, max_blocks: Optional[int] = None) -> PartitionCurve:
    """Minimal ``D_pi^2`` for each block count."""
    return _collect("d2", iter_dp(theta, "d2"), max_blocks)


def min_spi2_curve(t, max_blocks: Optional[int] = None) -> PartitionCurve:
    """Minimal ``S_pi^2`` for each block count; t must be nondecreasing."""
    return _collect("s2", iter_dp(t, "s2"), max_blocks)


def brute_force_curve(theta, functional: str) -> PartitionCurve:
    """Exhaustive search over all ``2^(n-1)`` compositions (n <= 16).

    `functional` is ``"v2"`` (squared span), ``"d2"`` or ``"s2"``.
    """
    theta = as_sequence(theta)
    n = theta.size
    if n > BRUTE_FORCE_MAX_N:
        raise InvalidInputError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}")
    if functional not in ("v2", "d2", "s2"):
        raise InvalidInputError(f"unknown functional {functional!r}")
    if functional in ("v2", "s2"):
        theta = require_nondecreasing(theta)
    table = cost_table(theta, functional) if functional != "v2" else None
    best = [np.inf] * n
    best_bounds: list[Optional[list[int]]] = [None] * n
    for mask in range(1 << (n - 1)):
        bounds = [0] + [i + 1 for i in range(n - 1) if mask >> i & 1] + [n]
        if functional == "v2":
            span = max(theta[hi - 1] - theta[lo] for lo, hi in zip(bounds[:-1], bounds[1:]))
            value = span * span
        else:
            total = table[bounds[0], bounds[1]]
            for lo, hi in zip(bounds[1:-1], bounds[2:]):
                total = total + table[lo, hi]
            value = total / n
        m = len(bounds) - 1
        if value < best[m - 1]:
            best[m - 1] = value
            best_bounds[m - 1] = bounds
    return PartitionCurve(
        functional,
        tuple(float(v) for v in best),
        tuple(IntervalPartition.from_boundaries(b) for b in best_bounds))
