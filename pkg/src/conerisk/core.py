"""Sequences, shape-restriction cones and interval partitions.

A cone ``K_{r,s}^n`` is described by a :class:`ConeSpec`: all length-``n``
sequences whose sliding weighted sums ``sum_j w_j * theta[t + j]`` are
nonnegative.  Sequences are plain 1-D float numpy arrays validated by
:func:`as_sequence`.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence as SequenceLike

import numpy as np

from conerisk.errors import InvalidInputError, NotInConeError, NotMonotoneError

STRICT_RTOL = 1e-9


def as_sequence(values, name: str = "sequence") -> np.ndarray:
    """Returns `values` as a fresh 1-D float array, rejecting empty or non-finite input."""
    arr = np.array(values, dtype=float).ravel()
    if arr.size < 1:
        raise InvalidInputError(f"{name} must have length n >= 1")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains NaN or infinite entries")
    return arr


def strict_tolerance(theta: np.ndarray) -> float:
    """Threshold above which a cone inequality counts as strict."""
    return STRICT_RTOL * (1.0 + float(np.max(np.abs(theta))))


def parse_sequence(text: str) -> np.ndarray:
    """Parses a JSON array or comma/newline/whitespace separated decimals."""
    text = text.strip()
    if not text:
        raise InvalidInputError("empty sequence input")
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"malformed JSON sequence: {exc}") from exc
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise InvalidInputError("JSON sequence must be an array of numbers")
        return as_sequence(values)
    tokens = [tok for tok in re.split(r"[,\s]+", text) if tok]
    try:
        return as_sequence([float(tok) for tok in tokens])
    except ValueError as exc:
        raise InvalidInputError(f"could not parse sequence: {exc}") from exc


@dataclass(frozen=True)
class ConeSpec:
    """The cone of sequences with ``sum_{j=-r}^{s} w_j theta_{t+j} >= 0``.

    Attributes:
      r: number of look-behind positions (>= 0).
      s: number of look-ahead positions (>= 1).
      weights: ``(w_{-r}, ..., w_s)``; signed weights are accepted.
      name: label used in reports.
    """

    r: int
    s: int
    weights: tuple[float, ...]
    name: str = "custom"

    def __post_init__(self):
        if not isinstance(self.r, int) or self.r < 0:
            raise InvalidInputError("cone requires integer r >= 0")
        if not isinstance(self.s, int) or self.s < 1:
            raise InvalidInputError("cone requires integer s >= 1")
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if len(weights) != self.r + self.s + 1:
            raise InvalidInputError(
                f"cone needs r + s + 1 = {self.r + self.s + 1} weights, got {len(weights)}")
        if not all(math.isfinite(w) for w in weights):
            raise InvalidInputError("cone weights must be finite")
        if not any(w != 0.0 for w in weights):
            raise InvalidInputError("cone weights must not all be zero")

    @classmethod
    def isotonic(cls) -> "ConeSpec":
        return cls(0, 1, (-1.0, 1.0), "isotonic")

    @classmethod
    def convex(cls) -> "ConeSpec":
        return cls(1, 1, (1.0, -2.0, 1.0), "convex")

    @classmethod
    def k_monotone(cls, k: int) -> "ConeSpec":
        """Sequences whose k-th forward differences are nonnegative."""
        if not isinstance(k, int) or k < 1:
            raise InvalidInputError("k-monotone cone needs integer k >= 1")
        weights = tuple(float((-1) ** (k - j) * math.comb(k, j)) for j in range(k + 1))
        return cls(0, k, weights, f"kmono:{k}")

    @classmethod
    def parse(cls, text: str) -> "ConeSpec":
        """Parses ``isotonic``, ``convex``, ``kmono:K`` or ``custom:r,s,w...``."""
        text = text.strip()
        if text == "isotonic":
            return cls.isotonic()
        if text == "convex":
            return cls.convex()
        head, _, tail = text.partition(":")
        try:
            if head == "kmono":
                return cls.k_monotone(int(tail))
            if head == "custom":
                parts = [p for p in tail.split(",") if p.strip()]
                r, s = int(parts[0]), int(parts[1])
                return cls(r, s, tuple(float(p) for p in parts[2:]), text)
        except (ValueError, IndexError) as exc:
            raise InvalidInputError(f"malformed cone spec {text!r}: {exc}") from exc
        raise InvalidInputError(
            f"unknown cone spec {text!r}; expected isotonic, convex, kmono:K or custom:r,s,w...")

    @property
    def is_isotonic(self) -> bool:
        return self.r == 0 and self.s == 1 and self.weights[0] == -self.weights[1] < 0

    @property
    def width(self) -> int:
        return self.r + self.s + 1

    def n_constraints(self, n: int) -> int:
        """Number of inequalities for length-n sequences (0 when the cone is all of R^n)."""
        return max(0, n - self.r - self.s)

    def constraint_values(self, theta) -> np.ndarray:
        """Values ``sum_j w_j theta_{t+j}`` for ``t = 1 + r, ..., n - s``, in order."""
        theta = np.asarray(theta, dtype=float)
        if theta.size < self.width:
            return np.zeros(0)
        return np.correlate(theta, np.asarray(self.weights), mode="valid")

    def matrix(self, n: int) -> np.ndarray:
        """Dense constraint matrix A with the cone equal to ``{theta: A theta >= 0}``."""
        m = self.n_constraints(n)
        a = np.zeros((m, n))
        for q, w in enumerate(self.weights):
            a[np.arange(m), np.arange(m) + q] = w
        return a

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class IntervalPartition:
    """A composition ``(n_1, ..., n_m)`` of n into contiguous blocks."""

    block_lengths: tuple[int, ...]

    def __post_init__(self):
        lengths = tuple(int(b) for b in self.block_lengths)
        object.__setattr__(self, "block_lengths", lengths)
        if len(lengths) < 1:
            raise InvalidInputError("partition needs at least one block")
        if any(b < 1 for b in lengths):
            raise InvalidInputError("partition block lengths must be positive")

    @classmethod
    def parse(cls, text: str) -> "IntervalPartition":
        try:
            return cls(tuple(int(p) for p in text.split(",") if p.strip()))
        except ValueError as exc:
            raise InvalidInputError(f"malformed partition {text!r}") from exc

    @classmethod
    def from_boundaries(cls, boundaries: SequenceLike[int]) -> "IntervalPartition":
        """Builds a partition from cumulative boundaries ``0 = s_0 < ... < s_m = n``."""
        b = np.asarray(boundaries, dtype=int)
        return cls(tuple(int(x) for x in np.diff(b)))

    @property
    def n(self) -> int:
        return sum(self.block_lengths)

    @property
    def m(self) -> int:
        """Number of blocks."""
        return len(self.block_lengths)

    @property
    def k(self) -> int:
        """Number of block boundaries, ``m - 1``."""
        return len(self.block_lengths) - 1

    @property
    def boundaries(self) -> tuple[int, ...]:
        """``(s_0, s_1, ..., s_m)`` with ``s_0 = 0`` and ``s_m = n``."""
        out = [0]
        for b in self.block_lengths:
            out.append(out[-1] + b)
        return tuple(out)

    def slices(self) -> Iterator[slice]:
        bounds = self.boundaries
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            yield slice(lo, hi)

    def check_length(self, n: int) -> None:
        if self.n != n:
            raise InvalidInputError(f"partition covers {self.n} indices but sequence has length {n}")

    def __str__(self) -> str:
        return ",".join(str(b) for b in self.block_lengths)


def membership(theta, cone: ConeSpec) -> bool:
    """True iff theta lies in the cone, up to the strictness tolerance."""
    theta = as_sequence(theta)
    values = cone.constraint_values(theta)
    return bool(values.size == 0 or values.min() >= -strict_tolerance(theta))


def strict_indices(theta, cone: ConeSpec) -> np.ndarray:
    """1-based indices t whose cone inequality holds strictly."""
    theta = as_sequence(theta)
    values = cone.constraint_values(theta)
    return np.flatnonzero(values > strict_tolerance(theta)) + 1 + cone.r


def strict_count(theta, cone: ConeSpec) -> int:
    """Number of cone inequalities that are strict at theta.

    Raises:
      NotInConeError: theta is not in the cone.
    """
    theta = as_sequence(theta)
    if not membership(theta, cone):
        raise NotInConeError(f"sequence is not in the {cone} cone")
    return int(strict_indices(theta, cone).size)


def is_nondecreasing(theta) -> bool:
    theta = np.asarray(theta, dtype=float)
    return bool(theta.size < 2 or np.diff(theta).min() >= -strict_tolerance(theta))


def require_nondecreasing(theta, name: str = "sequence") -> np.ndarray:
    theta = as_sequence(theta, name)
    if not is_nondecreasing(theta):
        raise NotMonotoneError(f"{name} must be nondecreasing")
    return theta


def generated_partition(theta) -> IntervalPartition:
    """Maximal constant blocks of a nondecreasing sequence."""
    theta = require_nondecreasing(theta)
    cuts = np.flatnonzero(np.diff(theta) > strict_tolerance(theta)) + 1
    return IntervalPartition.from_boundaries(np.concatenate(([0], cuts, [theta.size])))


def block_count(t) -> int:
    """Number of constant runs of an arbitrary sequence (exact comparison)."""
    t = as_sequence(t)
    return int(np.count_nonzero(t[1:] != t[:-1])) + 1


def loss(alpha, beta) -> float:
    """Normalized squared distance ``(1/n) * ||alpha - beta||^2``."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.shape != beta.shape:
        raise InvalidInputError("loss arguments must have equal length")
    return float(np.mean((alpha - beta) ** 2))
