"""Least-squares projections onto shape-restriction cones.

Three routes to the same object:

* :func:`pava` -- stack-based pool adjacent violators, exact and O(n), isotonic only.
* :func:`minmax_formula` -- the explicit ``min_{v >= j} max_{u <= j}`` block-mean
  representation, O(n^2); kept as an independent check on PAVA.
* :func:`project_cone` -- any ``K_{r,s}^n``.  The default ``active_set`` method
  writes the cone as lineality space plus the conic hull of its extreme rays and
  solves the resulting nonnegative least squares problem with a Lawson-Hanson
  active set.  ``method="dykstra"`` runs cyclic alternating projection onto the
  halfspaces with correction terms instead.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from conerisk.core import ConeSpec, as_sequence
from conerisk.errors import InvalidInputError, NonConvergence


@dataclass(frozen=True)
class ProjectionResult:
    """Output of a projection.

    Attributes:
      fitted: the projected sequence.
      iterations: solver iterations (0 for exact closed-form routes).
      residual_gap: largest violation ``max(0, -min_t (A fitted)_t)``.
      converged: False when the iteration cap was hit first.
      blocks: PAVA block lengths, when the isotonic route produced the fit.
    """

    fitted: np.ndarray
    iterations: int = 0
    residual_gap: float = 0.0
    converged: bool = True
    blocks: Optional[tuple[int, ...]] = None

    def check(self) -> "ProjectionResult":
        if not self.converged:
            raise NonConvergence(
                f"projection did not converge after {self.iterations} iterations", result=self)
        return self


def _residual_gap(theta: np.ndarray, cone: ConeSpec) -> float:
    values = cone.constraint_values(theta)
    if values.size == 0:
        return 0.0
    return float(max(0.0, -values.min()))


def pava_blocks(y) -> tuple[np.ndarray, np.ndarray]:
    """Pool adjacent violators; returns (block means, block lengths).

    Adjacent blocks with equal means are merged, so the returned means are
    strictly increasing and each block is one distinct fitted level.
    """
    y = as_sequence(y)
    sums: list[float] = []
    counts: list[int] = []
    for value in y.tolist():
        s, c = value, 1
        # prev_mean >= cur_mean, cross-multiplied (counts are positive)
        while sums and sums[-1] * c >= s * counts[-1]:
            s += sums.pop()
            c += counts.pop()
        sums.append(s)
        counts.append(c)
    lengths = np.array(counts, dtype=int)
    return np.array(sums) / lengths, lengths


def pava(y) -> ProjectionResult:
    """Exact projection of y onto the nondecreasing cone."""
    means, lengths = pava_blocks(y)
    return ProjectionResult(
        fitted=np.repeat(means, lengths), blocks=tuple(int(b) for b in lengths))


def minmax_formula(y) -> np.ndarray:
    """Isotonic fit via ``theta_j = min_{v >= j} max_{u <= j} mean(y[u..v])``.

    Builds the full table of interval means, so memory is O(n^2).
    """
    y = as_sequence(y)
    n = y.size
    csum = np.concatenate(([0.0], np.cumsum(y)))
    u = np.arange(n)[:, None]
    v = np.arange(n)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        means = (csum[v + 1] - csum[u]) / (v - u + 1)
    means = np.where(u <= v, means, -np.inf)
    # running max over u <= j, for each right end v
    upper = np.maximum.accumulate(means, axis=0)
    upper = np.where(u <= v, upper, np.inf)  # here u plays the role of j
    return upper.min(axis=1)


def monotone_projection(theta) -> np.ndarray:
    """Nondecreasing projection of an arbitrary sequence (the isotonic fit of theta itself)."""
    return pava(theta).fitted


def _last_nonzero(weights) -> int:
    return max(q for q, w in enumerate(weights) if w != 0.0)


@functools.lru_cache(maxsize=16)
def _cone_basis(cone: ConeSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal lineality basis and normalized extreme-ray directions.

    Every element of the cone is ``L c + G beta`` with ``beta >= 0``, where the
    columns of G solve ``A g_t = e_t``.  Returns ``(Q, M)`` with Q an orthonormal
    basis of the lineality space and M the columns of G projected onto its
    orthogonal complement and scaled to unit norm.
    """
    w = np.asarray(cone.weights)
    m = cone.n_constraints(n)
    lead = _last_nonzero(cone.weights)

    def solve(x, rhs):
        # row u fixes x[u + lead]; weights past `lead` are zero
        for u in range(m):
            acc = w[:lead] @ x[u:u + lead] if lead else 0.0
            x[u + lead] = (rhs[u] - acc) / w[lead]
        return x

    impulse = np.zeros(n)
    rhs = np.zeros(m)
    rhs[0] = 1.0
    impulse = solve(impulse, rhs)
    shift = np.arange(n)[:, None] - np.arange(m)[None, :]
    gens = np.where(shift >= 0, impulse[np.clip(shift, 0, None)], 0.0)

    free = [i for i in range(n) if not (lead <= i < m + lead)]
    lineal = np.zeros((n, len(free)))
    for col, idx in enumerate(free):
        lineal[idx, col] = 1.0
    lineal = solve(lineal, np.zeros((m, len(free))))
    q, _ = np.linalg.qr(lineal)

    gens = gens - q @ (q.T @ gens)
    gens /= np.linalg.norm(gens, axis=0)
    q.setflags(write=False)
    gens.setflags(write=False)
    return q, gens


def _nnls(mat: np.ndarray, b: np.ndarray, tol: float, max_iter: int):
    """Lawson-Hanson active set for ``min ||mat @ x - b||`` subject to ``x >= 0``.

    Returns (x, outer iterations, converged).
    """
    ncols = mat.shape[1]
    x = np.zeros(ncols)
    passive = np.zeros(ncols, dtype=bool)
    blocked = np.zeros(ncols, dtype=bool)
    resid = b.copy()
    threshold = tol * max(1.0, float(np.linalg.norm(b)))
    iterations = 0
    while True:
        grad = mat.T @ resid
        grad[passive | blocked] = -np.inf
        j = int(np.argmax(grad)) if ncols else 0
        if ncols == 0 or grad[j] <= threshold:
            return x, iterations, True
        if iterations >= max_iter:
            return x, iterations, False
        iterations += 1
        passive[j] = True
        first = True
        while True:
            idx = np.flatnonzero(passive)
            z = np.linalg.lstsq(mat[:, idx], b, rcond=None)[0]
            if np.all(z > 0):
                x[:] = 0.0
                x[idx] = z
                blocked[:] = False
                break
            if first and z[np.searchsorted(idx, j)] <= 0:
                # numerically useless direction; skip it until the set changes
                passive[j] = False
                blocked[j] = True
                break
            first = False
            xp = x[idx]
            neg = z <= 0
            ratios = xp[neg] / (xp[neg] - z[neg])
            alpha = ratios.min()
            x[idx] = xp + alpha * (z - xp)
            # always drop the blocking index, even if rounding left it slightly positive
            x[idx[neg][np.argmin(ratios)]] = 0.0
            drop = idx[x[idx] <= 0]
            x[drop] = 0.0
            passive[drop] = False
        resid = b - mat[:, passive] @ x[passive]


def _dykstra(y: np.ndarray, cone: ConeSpec, tol: float, max_iter: int):
    """Cyclic projection onto the halfspaces ``a_t . theta >= 0`` with corrections."""
    w = np.asarray(cone.weights)
    width = w.size
    m = cone.n_constraints(y.size)
    wnorm2 = float(w @ w)
    theta = y.copy()
    lam = np.zeros(m)
    for sweep in range(1, max_iter + 1):
        previous = theta.copy()
        for t in range(m):
            seg = theta[t:t + width]
            new = max(0.0, lam[t] - float(w @ seg) / wnorm2)
            if new != lam[t]:
                theta[t:t + width] = seg + (new - lam[t]) * w
                lam[t] = new
        if np.linalg.norm(theta - previous) < tol:
            return theta, sweep, True
    return theta, max_iter, False


def project_cone(y, cone: ConeSpec, tol: float = 1e-10, max_iter: Optional[int] = None,
                 method: str = "active_set") -> ProjectionResult:
    """Least-squares projection of y onto ``K_{r,s}^n``.

    Args:
      y: sequence to project.
      cone: the cone.
      tol: active set -- relative KKT tolerance on the dual gradient;
        dykstra -- Euclidean movement between sweeps below which iteration stops.
      max_iter: iteration cap; defaults to ``100 * n * m``.
      method: ``"active_set"`` (exact up to rounding) or ``"dykstra"``.

    Returns:
      A ProjectionResult; ``converged`` is False if the cap was reached.
    """
    y = as_sequence(y)
    if not tol > 0:
        raise InvalidInputError("tol must be > 0")
    n = y.size
    m = cone.n_constraints(n)
    if m == 0:
        return ProjectionResult(fitted=y.copy())
    if max_iter is None:
        max_iter = 100 * n * m
    if max_iter < 1:
        raise InvalidInputError("max_iter must be >= 1")
    if cone.constraint_values(y).min() >= 0.0:
        return ProjectionResult(fitted=y.copy())

    if method == "active_set":
        q, gens = _cone_basis(cone, n)
        lineal_part = q @ (q.T @ y)
        coef, iterations, converged = _nnls(gens, y - lineal_part, tol, max_iter)
        support = coef > 0
        theta = lineal_part + gens[:, support] @ coef[support]
    elif method == "dykstra":
        theta, iterations, converged = _dykstra(y, cone, tol, max_iter)
    else:
        raise InvalidInputError(f"unknown projection method {method!r}")
    return ProjectionResult(fitted=theta, iterations=iterations,
                            residual_gap=_residual_gap(theta, cone), converged=converged)


def project(y, cone: ConeSpec) -> ProjectionResult:
    """Fastest exact projection available for the cone (PAVA when isotonic)."""
    if cone.is_isotonic:
        return pava(y)
    return project_cone(y, cone)
