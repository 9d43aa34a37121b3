"""Closed-form risk bounds for the cone least squares estimator.

Block counts are expressed as ``m`` (number of blocks) throughout.  All
logarithms are natural.  Every upper bound is returned as a :class:`BoundReport`
carrying the minimizing partition or parameters, so the value can be replayed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence as SequenceLike

import numpy as np

from conerisk.core import (
    ConeSpec,
    IntervalPartition,
    as_sequence,
    generated_partition,
    loss,
    membership,
    require_nondecreasing,
    strict_indices,
)
from conerisk.errors import HypothesisViolated, InvalidInputError, NotInConeError
from conerisk.partition import cost_table, iter_dp, iter_vpi
from conerisk.projection import _cone_basis, _nnls, monotone_projection
from conerisk.statdim import MonteCarloDeltaTable, delta_isotonic_exact

FORMULAS = ("R", "R_D", "R_S", "R_Z", "AMON", "HH", "ZEN", "MISS",
            "LOWER_OVAL", "LOWER_FANI", "LOCAL_SUP")

# relative slack when checking hypotheses that callers often meet with equality
_HYP_RTOL = 1e-12

# the exact isotonic ZEN program keeps an (n+1)^2 cost table
ZEN_EXACT_MAX_N = 4096


def sequence_digest(theta) -> str:
    """Short content hash used to tie a bound to the sequence it was computed for."""
    arr = np.ascontiguousarray(as_sequence(theta), dtype="<f8")
    return hashlib.sha256(arr.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class BoundReport:
    """A bound value with the evidence needed to reproduce it.

    Attributes:
      value: the bound.
      formula: one of FORMULAS.
      sigma: noise standard deviation.
      n: sequence length.
      witness: minimizing partition, when the bound is an infimum over partitions.
      params: formula-specific details (block count, variation term, conditions...).
      digest: hash of the sequence the bound was evaluated at.
      target: ``truth`` or ``monotone_projection`` (what the bound controls the risk to).
      cone: name of the cone whose estimator the bound applies to.
    """

    value: float
    formula: str
    sigma: float
    n: int
    witness: Optional[IntervalPartition] = None
    params: dict = field(default_factory=dict)
    digest: str = ""
    target: str = "truth"
    cone: str = "isotonic"

    def to_dict(self) -> dict:
        return {
            "formula": self.formula,
            "value": self.value,
            "sigma": self.sigma,
            "n": self.n,
            "witness": None if self.witness is None else list(self.witness.block_lengths),
            "params": self.params,
            "target": self.target,
            "cone": self.cone,
        }


def _check_sigma(sigma) -> float:
    sigma = float(sigma)
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidInputError("sigma must be > 0")
    return sigma


def block_penalty(m: int, n: int, sigma: float) -> float:
    """``sigma^2 m / n * log(e n / m)``; nondecreasing in m on 1..n."""
    return sigma * sigma * m / n * (1.0 + math.log(n / m))


def _minimize_curve(curve, n: int, sigma: float, outer: float, weight: float, square: bool):
    """``outer * min_m [value_m(^2) + weight * penalty(m)]`` over a lazy curve.

    Stops once the penalty alone exceeds the best total; the penalty is
    nondecreasing in m so no later m can do better.
    """
    best, best_m, best_wit, best_var = math.inf, None, None, None
    for m, value, wit in curve:
        pen = weight * block_penalty(m, n, sigma)
        if outer * pen >= best:
            break
        var = value * value if square else value
        total = outer * (var + pen)
        if total < best:
            best, best_m, best_wit, best_var = total, m, wit, var
    return best, best_m, best_wit, best_var


def _curve_bound(theta, sigma, curve, formula, outer, weight, square, target="truth"):
    n = theta.size
    value, m, wit, var = _minimize_curve(curve, n, sigma, outer, weight, square)
    return BoundReport(
        value=float(value), formula=formula, sigma=sigma, n=n, witness=wit,
        params={"m": m, "variation": var, "penalty": weight * block_penalty(m, n, sigma)},
        digest=sequence_digest(theta), target=target)


def bound_R(theta, sigma: float) -> BoundReport:
    """``4 min_m [min V_pi^2 + 4 sigma^2 m/n log(en/m)]``."""
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    return _curve_bound(theta, sigma, iter_vpi(theta), "R", 4.0, 4.0, True)


def bound_R_D(theta, sigma: float) -> BoundReport:
    """As :func:`bound_R` with the within-block deviation ``D_pi^2``; never larger."""
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    return _curve_bound(theta, sigma, iter_dp(theta, "d2"), "R_D", 4.0, 4.0, False)


def bound_R_S(theta_tilde, sigma: float) -> BoundReport:
    """Bound on ``E l^2(theta_tilde, theta_hat)`` under misspecification.

    `theta_tilde` is the monotone projection of the true mean; the bound uses
    the right-endpoint deviation ``S_pi^2``.
    """
    theta_tilde = require_nondecreasing(theta_tilde, "theta_tilde")
    sigma = _check_sigma(sigma)
    return _curve_bound(theta_tilde, sigma, iter_dp(theta_tilde, "s2"), "R_S", 4.0, 4.0,
                        False, target="monotone_projection")


def bound_RZ(theta, sigma: float) -> BoundReport:
    """``(sigma^2 V / n)^(2/3) + sigma^2 log(n) / n`` with ``V = theta_n - theta_1``."""
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    n = theta.size
    v = float(theta[-1] - theta[0])
    value = (sigma * sigma * v / n) ** (2.0 / 3.0) + sigma * sigma * math.log(n) / n
    return BoundReport(value=value, formula="R_Z", sigma=sigma, n=n, params={"V": v},
                       digest=sequence_digest(theta))


def bound_amon(theta, sigma: float) -> BoundReport:
    """``16 sigma^2 m/n log(en/m)`` with m the number of constant blocks of theta."""
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    n = theta.size
    pi = generated_partition(theta)
    value = 16.0 * block_penalty(pi.m, n, sigma)
    return BoundReport(value=value, formula="AMON", sigma=sigma, n=n, witness=pi,
                       params={"m": pi.m}, digest=sequence_digest(theta))


def bound_miss(theta, sigma: float) -> BoundReport:
    """Block-count bound under misspecification, evaluated at the monotone projection.

    ``16 sigma^2 m/n log(en/m)`` with m the number of constant blocks of
    ``monotone_projection(theta)``; theta itself may be arbitrary.
    """
    sigma = _check_sigma(sigma)
    tilde = monotone_projection(theta)
    n = tilde.size
    pi = generated_partition(tilde)
    value = 16.0 * block_penalty(pi.m, n, sigma)
    return BoundReport(value=value, formula="MISS", sigma=sigma, n=n, witness=pi,
                       params={"m": pi.m}, digest=sequence_digest(tilde),
                       target="monotone_projection")


def bound_hh(theta, sigma: float) -> BoundReport:
    """``6 min_m [min_{alpha with <= m blocks} l^2(theta, alpha) + sigma^2 m/n log(en/m)]``.

    The inner minimum is the D_pi^2 curve, so the value is exact.
    """
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    return _curve_bound(theta, sigma, iter_dp(theta, "d2"), "HH", 6.0, 1.0, False)


def tau_isotonic(alpha) -> float:
    """``sum_i H_{n_i}`` over the constant blocks of a nondecreasing alpha."""
    pi = generated_partition(alpha)
    return math.fsum(delta_isotonic_exact(b) for b in pi.block_lengths)


def tau_general(alpha, cone: ConeSpec, delta_lookup: Callable[[int], float]) -> float:
    """Sum of ``delta(K^len)`` over the segments cut at the strict-inequality indices."""
    alpha = as_sequence(alpha)
    n = alpha.size
    ts = [int(t) for t in strict_indices(alpha, cone)]
    if not ts:
        return float(delta_lookup(n))
    lengths = [ts[0] - 1 + cone.s]
    lengths += [b - a for a, b in zip(ts[:-1], ts[1:])]
    lengths.append(n - ts[-1] - cone.s + 1)
    return math.fsum(float(delta_lookup(length)) for length in lengths)


def _zen_isotonic_exact(theta: np.ndarray, sigma: float):
    """``min over partitions of [D_pi^2 + sigma^2/n * sum_i H_{n_i}]`` by dynamic programming.

    For nondecreasing theta the best alpha constant on a partition is the block
    means, and merging equal adjacent levels only lowers the harmonic sum, so
    this equals the infimum over the whole cone.
    """
    n = theta.size
    if n > ZEN_EXACT_MAX_N:
        raise InvalidInputError(f"exact isotonic program is limited to n <= {ZEN_EXACT_MAX_N}")
    table = cost_table(theta, "d2")
    harmonic = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, n + 1))))
    best = np.zeros(n + 1)
    parent = np.zeros(n + 1, dtype=int)
    s2 = sigma * sigma
    for j in range(1, n + 1):
        i = np.arange(j)
        cand = best[:j] + table[:j, j] + s2 * harmonic[j - i]
        a = int(np.argmin(cand))
        best[j] = cand[a]
        parent[j] = a
    bounds = [n]
    while bounds[-1] > 0:
        bounds.append(int(parent[bounds[-1]]))
    return best[n] / n, IntervalPartition.from_boundaries(bounds[::-1])


def _face_candidates(theta: np.ndarray, cone: ConeSpec) -> Iterable[tuple[str, np.ndarray]]:
    """theta itself, then projections of theta onto faces with evenly spaced free knots."""
    yield "theta", theta
    n = theta.size
    m = cone.n_constraints(n)
    if m == 0:
        return
    q, gens = _cone_basis(cone, n)
    lineal = q @ (q.T @ theta)
    resid = theta - lineal
    counts = sorted({0} | {min(m, 2 ** e) for e in range(int(math.log2(m)) + 1)})
    for count in counts:
        if count >= m:
            break
        knots = np.unique(np.linspace(0, m - 1, count + 2)[1:-1].round().astype(int))
        if knots.size == 0:
            yield "knots=0", lineal
            continue
        coef, _, _ = _nnls(gens[:, knots], resid, 1e-10, 100 * n * m)
        yield f"knots={knots.size}", lineal + gens[:, knots] @ coef


def bound_general_cone(theta, cone: ConeSpec, sigma: float,
                       delta_lookup: Optional[Callable[[int], float]] = None,
                       candidates: Optional[SequenceLike] = None,
                       variant: str = "tau") -> BoundReport:
    """``6 inf_alpha [l^2(theta, alpha) + sigma^2/n * tau(alpha)]`` over a candidate family.

    Args:
      theta: a member of the cone.
      cone: the cone.
      sigma: noise standard deviation.
      delta_lookup: ``length -> delta(K^length)``; defaults to H_n for the isotonic
        cone and a cached Monte Carlo table otherwise.
      candidates: explicit list of alphas in the cone.  When omitted, the isotonic
        cone is minimized exactly over all alpha and other cones use theta plus
        its projections onto faces with evenly spaced free knots.
      variant: ``"tau"`` for the segment-wise sum, ``"k"`` for the weaker
        ``(1 + k(alpha)) delta(K^n)`` penalty.

    Every candidate gives a valid bound, so a restricted family still yields an
    upper bound; ``params["family"]`` records which family was used.
    """
    theta = as_sequence(theta)
    sigma = _check_sigma(sigma)
    if not membership(theta, cone):
        raise NotInConeError(f"sequence is not in the {cone} cone")
    if variant not in ("tau", "k"):
        raise InvalidInputError("variant must be 'tau' or 'k'")
    n = theta.size
    exact_default = delta_lookup is None and cone.is_isotonic
    if delta_lookup is None:
        delta_lookup = delta_isotonic_exact if cone.is_isotonic else MonteCarloDeltaTable(cone)
    s2 = sigma * sigma
    witness = None

    if candidates is None and exact_default:
        if variant == "tau" and n <= ZEN_EXACT_MAX_N:
            inner, witness = _zen_isotonic_exact(theta, sigma)
            family, label = "all_isotonic", "exact"
        elif variant == "tau":
            # block means of the best D^2 partitions; each block costs at least sigma^2/n
            harmonic = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, n + 1))))
            best = math.inf
            for m, d2, wit in iter_dp(theta, "d2"):
                if s2 * m / n >= best:
                    break
                total = d2 + s2 / n * math.fsum(harmonic[b] for b in wit.block_lengths)
                if total < best:
                    best, witness = total, wit
            inner, family, label = best, "block_means", "best_partition"
        else:
            h = delta_isotonic_exact(n)
            best = math.inf
            for m, d2, wit in iter_dp(theta, "d2"):
                if s2 * m * h / n >= best:
                    break
                if d2 + s2 * m * h / n < best:
                    best, witness = d2 + s2 * m * h / n, wit
            inner, family, label = best, "all_isotonic", "exact"
        params = {"family": family, "best": label, "variant": variant}
        return BoundReport(value=6.0 * inner, formula="ZEN", sigma=sigma, n=n, witness=witness,
                           params=params, digest=sequence_digest(theta), cone=str(cone))

    if candidates is None:
        family = "theta_and_knot_faces"
        pool = list(_face_candidates(theta, cone))
    else:
        family = "supplied"
        pool = [(f"candidate[{i}]", as_sequence(a)) for i, a in enumerate(candidates)]
    full = float(delta_lookup(n))
    best, best_label = math.inf, None
    for label, alpha in pool:
        if alpha.size != n:
            raise InvalidInputError("candidate length differs from theta")
        if not membership(alpha, cone):
            raise NotInConeError(f"candidate {label} is not in the {cone} cone")
        if variant == "tau":
            pen = tau_general(alpha, cone, delta_lookup)
        else:
            pen = (1 + strict_indices(alpha, cone).size) * full
        total = loss(theta, alpha) + s2 * pen / n
        if total < best:
            best, best_label = total, label
    describe = getattr(delta_lookup, "describe", None)
    params = {"family": family, "best": best_label, "variant": variant,
              "delta": describe() if describe else getattr(delta_lookup, "__name__", "custom")}
    return BoundReport(value=6.0 * best, formula="ZEN", sigma=sigma, n=n, params=params,
                       digest=sequence_digest(theta), cone=str(cone))


def local_sup_bound(theta, sigma: float, c: float) -> float:
    """``2 (1 + 4c) R(n; theta)``: sup risk over an l_inf ball of radius^2 ``c R``."""
    c = float(c)
    if not (math.isfinite(c) and c > 0):
        raise InvalidInputError("c must be > 0")
    return 2.0 * (1.0 + 4.0 * c) * bound_R(theta, sigma).value


# ---------------------------------------------------------------------------
# hypotheses and lower bounds

def _ge(a: float, b: float) -> bool:
    return a >= b - _HYP_RTOL * max(1.0, abs(b))


def _le(a: float, b: float) -> bool:
    return a <= b + _HYP_RTOL * max(1.0, abs(b))


def _require(ok: bool, condition: str, detail: str) -> None:
    if not ok:
        raise HypothesisViolated(condition, detail)


def _check_constants(c1: float, c2: float) -> tuple[float, float]:
    c1, c2 = float(c1), float(c2)
    _require(0 < c1 <= 1, "0 < c1 <= 1", f"c1={c1}")
    _require(c2 >= 1, "c2 >= 1", f"c2={c2}")
    return c1, c2


def beta_squared(k: int, n: int, sigma: float) -> float:
    """``k sigma^2 / n * log(e n / k)``, the separation scale for k levels."""
    return block_penalty(k, n, sigma)


@dataclass(frozen=True)
class PiecewiseSetup:
    """Level structure of a piecewise-constant sequence and the derived scales."""

    k: int
    n: int
    levels: tuple[float, ...]
    lengths: tuple[int, ...]
    beta: float
    l_real: float
    conditions: dict


def piecewise_setup(theta, sigma: float, c1: float, c2: float) -> PiecewiseSetup:
    """Checks block balance, level separation and the size condition.

    Raises:
      HypothesisViolated: naming the first failed condition.
    """
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    c1, c2 = _check_constants(c1, c2)
    n = theta.size
    pi = generated_partition(theta)
    k = pi.m
    starts = np.asarray(pi.boundaries[:-1])
    levels = tuple(float(x) for x in theta[starts])
    beta = math.sqrt(beta_squared(k, n, sigma))
    lengths = pi.block_lengths
    _require(all(_ge(b, c1 * n / k) and _le(b, c2 * n / k) for b in lengths),
             "block balance c1 n/k <= n_i <= c2 n/k",
             f"lengths={list(lengths)}, k={k}, n={n}")
    gap = min((b - a for a, b in zip(levels[:-1], levels[1:])), default=math.inf)
    _require(_ge(gap, beta), "level separation min gap >= beta_n",
             f"gap={gap:.6g}, beta_n={beta:.6g}")
    log_term = 1.0 + math.log(n / k)
    size_need = max((4.0 / c1 ** 2 * log_term) ** (1.0 / 3.0),
                    math.exp((1.0 - 4.0 * c1) / (4.0 * c1)))
    _require(_ge(n / k, size_need), "size condition n/k >= max((4/c1^2 log(en/k))^(1/3), "
             "exp((1-4c1)/(4c1)))", f"n/k={n / k:.6g}, needed={size_need:.6g}")
    l_real = (c1 * n * sigma / (2.0 * k * beta)) ** (2.0 / 3.0)
    conditions = {"block_balance": True, "level_separation": True, "size": True}
    return PiecewiseSetup(k, n, levels, lengths, beta, l_real, conditions)


def lower_bound_values(theta, sigma: float, regime: str, c1: float, c2: float) -> BoundReport:
    """Local minimax lower-bound values for the two structured regimes.

    ``uniform_increments``: increments between ``c1 V/n`` and ``c2 V/n``; value
    ``c1^2 3^(2/3) / (256 c2^(4/3)) (sigma^2 V/n)^(2/3)``.

    ``piecewise_constant``: balanced, well separated levels; value
    ``c1^(7/3) / (2^(31/3) c2^2) R (log(en/k))^(-2/3)``.

    Secondary forms of each chain are reported in ``params``.

    Raises:
      HypothesisViolated: naming the failed condition.
    """
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    n = theta.size
    s2 = sigma * sigma
    if regime == "uniform_increments":
        c1, c2 = _check_constants(c1, c2)
        v = float(theta[-1] - theta[0])
        _require(n >= 2 and v > 0, "strictly increasing with V > 0", f"n={n}, V={v}")
        inc = np.diff(theta)
        _require(_ge(float(inc.min()), c1 * v / n) and _le(float(inc.max()), c2 * v / n),
                 "uniform increments c1 V/n <= theta_i - theta_(i-1) <= c2 V/n",
                 f"min={inc.min():.6g}, max={inc.max():.6g}, V/n={v / n:.6g}")
        need = max(2.0, 24.0 * s2 / v ** 2, 2.0 * c2 * v / sigma)
        _require(_ge(n, need), "n >= max(2, 24 sigma^2/V^2, 2 c2 V/sigma)",
                 f"n={n}, needed={need:.6g}")
        value = c1 ** 2 * 3 ** (2 / 3) / (256 * c2 ** (4 / 3)) * (s2 * v / n) ** (2 / 3)
        r = bound_R(theta, sigma).value
        secondary = c1 ** 2 * 3 ** (2 / 3) / (4096 * c2 ** (4 / 3)) * r / math.log(4 * n)
        params = {"regime": regime, "c1": c1, "c2": c2, "V": v, "R": r,
                  "value_via_R": secondary, "conditions": {"increments": True, "size": True}}
        return BoundReport(value=value, formula="LOWER_OVAL", sigma=sigma, n=n,
                           params=params, digest=sequence_digest(theta))
    if regime == "piecewise_constant":
        setup = piecewise_setup(theta, sigma, c1, c2)
        c1, c2 = float(c1), float(c2)
        k = setup.k
        log_term = 1.0 + math.log(n / k)
        r = bound_R(theta, sigma).value
        value = c1 ** (7 / 3) / (2 ** (31 / 3) * c2 ** 2) * r * log_term ** (-2 / 3)
        direct = c1 ** (7 / 3) / (2 ** (19 / 3) * c2 ** 2) * k * s2 / n * log_term ** (1 / 3)
        l_int = math.ceil(setup.l_real)
        via_l = c1 * k * k * l_int ** 2 * setup.beta ** 2 / (32 * c2 ** 2 * n ** 2)
        params = {"regime": regime, "c1": c1, "c2": c2, "k": k, "R": r,
                  "beta_n": setup.beta, "l_real": setup.l_real, "l": l_int,
                  "value_direct": direct, "value_at_integer_l": via_l,
                  "conditions": setup.conditions}
        return BoundReport(value=value, formula="LOWER_FANI", sigma=sigma, n=n,
                           witness=generated_partition(theta), params=params,
                           digest=sequence_digest(theta))
    raise InvalidInputError(f"unknown regime {regime!r}")


# ---------------------------------------------------------------------------
# deterministic rate sandwiches for R(n; theta)

@dataclass(frozen=True)
class RateCheck:
    """Outcome of comparing R(n; theta) with a closed-form envelope."""

    name: str
    lower: Optional[float]
    value: float
    upper: float
    conditions: dict

    @property
    def holds(self) -> bool:
        return (self.lower is None or self.lower <= self.value) and self.value <= self.upper


def increasing_rate_check(theta, sigma: float) -> RateCheck:
    """``R <= 16 log(4n) (sigma^2 V/n)^(2/3)`` when ``n >= max(2, 8 sigma^2/V^2, V/sigma)``."""
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    n = theta.size
    v = float(theta[-1] - theta[0])
    _require(v > 0, "V > 0", f"V={v}")
    need = max(2.0, 8 * sigma ** 2 / v ** 2, v / sigma)
    _require(n >= need, "n >= max(2, 8 sigma^2/V^2, V/sigma)", f"n={n}, needed={need:.6g}")
    upper = 16 * math.log(4 * n) * (sigma ** 2 * v / n) ** (2 / 3)
    return RateCheck("increasing_rate", None, bound_R(theta, sigma).value, upper, {"size": True})


def strict_increase_sandwich(theta, sigma: float, c1: Optional[float] = None) -> RateCheck:
    """``12 (c1 sigma^2 V/n)^(2/3) <= R <= 16 (sigma^2 V/n)^(2/3) log(4n)``.

    Requires strictly increasing theta with every increment at least ``c1 V/n``
    (``c1 <= 1``; by default the largest such c1) and
    ``n >= max(2, 8 sigma^2/V^2, 2V/sigma)``.
    """
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    n = theta.size
    v = float(theta[-1] - theta[0])
    _require(n >= 2 and v > 0, "strictly increasing with V > 0", f"n={n}, V={v}")
    inc = float(np.diff(theta).min())
    if c1 is None:
        c1 = min(1.0, inc * n / v)
    _require(0 < c1 <= 1, "0 < c1 <= 1", f"c1={c1}")
    _require(inc > 0 and inc >= c1 * v / n, "min increment >= c1 V/n",
             f"min increment={inc:.6g}, c1 V/n={c1 * v / n:.6g}")
    need = max(2.0, 8 * sigma ** 2 / v ** 2, 2 * v / sigma)
    _require(n >= need, "n >= max(2, 8 sigma^2/V^2, 2V/sigma)", f"n={n}, needed={need:.6g}")
    lower = 12 * (c1 * sigma ** 2 * v / n) ** (2 / 3)
    upper = 16 * (sigma ** 2 * v / n) ** (2 / 3) * math.log(4 * n)
    return RateCheck("strict_increase", lower, bound_R(theta, sigma).value, upper,
                     {"increments": True, "size": True, "c1": c1})


def separated_levels_sandwich(theta, sigma: float) -> RateCheck:
    """``sigma^2 k/n log(en/k) <= R <= 16 sigma^2 k/n log(en/k)`` for k separated levels.

    Requires adjacent distinct levels to differ by at least
    ``sqrt(k sigma^2/n log(en/k))``.
    """
    theta = require_nondecreasing(theta)
    sigma = _check_sigma(sigma)
    n = theta.size
    pi = generated_partition(theta)
    k = pi.m
    levels = theta[np.asarray(pi.boundaries[:-1])]
    gap = float(np.diff(levels).min()) if k > 1 else math.inf
    base = block_penalty(k, n, sigma)
    _require(_ge(gap, math.sqrt(base)), "level separation min gap >= sqrt(k sigma^2/n log(en/k))",
             f"gap={gap:.6g}, needed={math.sqrt(base):.6g}")
    return RateCheck("separated_levels", base, bound_R(theta, sigma).value, 16 * base,
                     {"separation": True, "k": k})
