"""Sequence families, Monte Carlo risk of the LSE, and the Assouad hypercube.

Risk is ``E l^2(target, theta_hat)`` with ``theta_hat`` the projection of
``Y = theta + sigma * noise`` onto the cone and ``target`` either theta itself
or, under misspecification, its monotone projection.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from conerisk.bounds import BoundReport, piecewise_setup, sequence_digest
from conerisk.core import ConeSpec, as_sequence, is_nondecreasing, loss, membership
from conerisk.errors import HypothesisViolated, InvalidInputError, NonConvergence
from conerisk.montecarlo import check_reps, mean_and_stderr, replicate_rng, run_replicates
from conerisk.projection import monotone_projection, pava, project

TARGETS = ("truth", "monotone_projection")
NOISES = ("gaussian", "uniform", "rademacher")
ACH_TRUNCATION = 10_000


# ---------------------------------------------------------------------------
# generators

def _check_n(n) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInputError("n must be an integer >= 1")
    return int(n)


def _monotone(theta: np.ndarray, family: str) -> np.ndarray:
    if not is_nondecreasing(theta):
        raise AssertionError(f"generator {family} produced a non-monotone sequence")
    return theta


def constant(n: int, value: float = 0.0) -> np.ndarray:
    return np.full(_check_n(n), float(value))


def piecewise_constant(n: int, k: int = 2, gap: float = 1.0) -> np.ndarray:
    """k levels ``0, gap, ..., (k-1) gap`` on blocks of (nearly) equal length."""
    n = _check_n(n)
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise InvalidInputError("k must be an integer with 1 <= k <= n")
    if not gap > 0:
        raise InvalidInputError("gap must be > 0")
    sizes = [len(part) for part in np.array_split(np.arange(n), k)]
    return _monotone(np.repeat(np.arange(k) * float(gap), sizes), "piecewise_constant")


def two_level(n: int, gap: float = 1.0) -> np.ndarray:
    return piecewise_constant(n, 2 if n >= 2 else 1, gap)


def separated_levels(n: int, k: int = 2, sigma: float = 1.0, factor: float = 1.0) -> np.ndarray:
    """k balanced levels whose gap is ``factor`` times ``sqrt(k sigma^2/n log(en/k))``."""
    n = _check_n(n)
    gap = factor * math.sqrt(k * sigma * sigma / n * (1.0 + math.log(n / k)))
    return piecewise_constant(n, k, gap)


def linear(n: int, slope: float = 1.0) -> np.ndarray:
    """``slope * i / n`` for i = 1..n."""
    n = _check_n(n)
    if not slope >= 0:
        raise InvalidInputError("slope must be >= 0")
    return _monotone(float(slope) * np.arange(1, n + 1) / n, "linear")


def smooth_increasing(n: int, curvature: float = 0.5) -> np.ndarray:
    """Samples of ``x + curvature * x^2`` at ``i/n``; derivative in ``[1, 1 + 2 curvature]``."""
    n = _check_n(n)
    if not curvature >= 0:
        raise InvalidInputError("curvature must be >= 0")
    x = np.arange(1, n + 1) / n
    return _monotone(x + curvature * x * x, "smooth_increasing")


def cumulative(n: int, a: float = 3.0, terms: int = ACH_TRUNCATION) -> np.ndarray:
    """``theta_i = sum_{j: a_j <= i/n} p_j`` with ``p_j ~ j^(-a)`` and ``a_j = j/(j+1)``.

    The series is truncated after `terms` atoms and renormalized to sum to 1.
    """
    n = _check_n(n)
    if not a > 1:
        raise InvalidInputError("exponent a must be > 1")
    j = np.arange(1, int(terms) + 1, dtype=float)
    cdf = np.cumsum(j ** (-float(a)))
    cdf = np.concatenate(([0.0], cdf / cdf[-1]))
    atoms = j / (j + 1.0)
    idx = np.searchsorted(atoms, np.arange(1, n + 1) / n, side="right")
    theta = cdf[idx]
    theta = _monotone(theta, "cumulative")
    if theta[-1] > 1.0:
        raise AssertionError("cumulative generator exceeded 1")
    return theta


def nonincreasing(n: int, kind: str = "linear") -> np.ndarray:
    """Nonincreasing sequences: ``linear`` (1 - i/n) or ``steps`` (three descending levels)."""
    n = _check_n(n)
    if kind == "linear":
        theta = 1.0 - np.arange(1, n + 1) / n
    elif kind == "steps":
        theta = -piecewise_constant(n, min(3, n), 1.0)
    else:
        raise InvalidInputError(f"unknown nonincreasing kind {kind!r}")
    if theta.size > 1 and np.diff(theta).max() > 0:
        raise AssertionError("nonincreasing generator produced an increase")
    return theta


def bump(n: int, height: float = 1.0) -> np.ndarray:
    """``height * sin(pi i / (n + 1))``: rises then falls (misspecified)."""
    n = _check_n(n)
    return float(height) * np.sin(np.pi * np.arange(1, n + 1) / (n + 1))


def sawtooth(n: int, teeth: int = 3) -> np.ndarray:
    """Increasing ramps that reset ``teeth`` times (misspecified)."""
    n = _check_n(n)
    if teeth < 1:
        raise InvalidInputError("teeth must be >= 1")
    return (np.arange(n) * teeth % n) / n


FAMILIES: dict[str, Callable[..., np.ndarray]] = {
    "constant": constant,
    "two_level": two_level,
    "piecewise_constant": piecewise_constant,
    "separated_levels": separated_levels,
    "linear": linear,
    "smooth_increasing": smooth_increasing,
    "cumulative": cumulative,
    "nonincreasing": nonincreasing,
    "bump": bump,
    "sawtooth": sawtooth,
}


def generate(family: str, n: int, **params) -> np.ndarray:
    """Builds a sequence of length n from a named family."""
    try:
        gen = FAMILIES[family]
    except KeyError:
        raise InvalidInputError(
            f"unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}") from None
    try:
        return gen(n, **params)
    except TypeError as exc:
        raise InvalidInputError(f"bad parameters for family {family!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# Monte Carlo risk

@dataclass(frozen=True)
class RiskEstimate:
    mean_risk: float
    stderr: float
    reps: int
    seed: int
    target: str
    noise: str = "gaussian"

    def to_dict(self) -> dict:
        return {"mean_risk": self.mean_risk, "stderr": self.stderr, "reps": self.reps,
                "seed": self.seed, "target": self.target, "noise": self.noise}


def draw_noise(rng: np.random.Generator, n: int, noise: str) -> np.ndarray:
    """Unit-variance, mean-zero noise."""
    if noise == "gaussian":
        return rng.standard_normal(n)
    if noise == "uniform":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), n)
    if noise == "rademacher":
        return rng.choice(np.array([-1.0, 1.0]), n)
    raise InvalidInputError(f"unknown noise {noise!r}; choose from {', '.join(NOISES)}")


def _risk_replicate(rng, replicate, theta, target, cone, sigma, noise):
    y = theta + sigma * draw_noise(rng, theta.size, noise)
    result = project(y, cone)
    if not result.converged:
        raise NonConvergence(
            f"projection failed in replicate {replicate}", result=result, replicate=replicate)
    return loss(target, result.fitted)


def risk_mc(theta, cone: ConeSpec, sigma: float, reps: int, seed: int,
            target: str = "truth", noise: str = "gaussian") -> RiskEstimate:
    """Monte Carlo estimate of the LSE risk.

    Args:
      theta: true mean sequence.
      cone: constraint cone of the estimator.
      sigma: noise standard deviation (>= 0).
      reps: number of replicates (>= 2).
      seed: base seed; replicate r uses its own derived stream.
      target: ``truth`` or ``monotone_projection`` (isotonic cone only).
      noise: ``gaussian``, ``uniform`` or ``rademacher``, all scaled to unit variance.
    """
    theta = as_sequence(theta)
    reps = check_reps(reps)
    sigma = float(sigma)
    if not (math.isfinite(sigma) and sigma >= 0):
        raise InvalidInputError("sigma must be >= 0")
    if target == "truth":
        tgt = theta
    elif target == "monotone_projection":
        if not cone.is_isotonic:
            raise InvalidInputError("target monotone_projection requires the isotonic cone")
        tgt = monotone_projection(theta)
    else:
        raise InvalidInputError(f"unknown target {target!r}")
    if noise not in NOISES:
        raise InvalidInputError(f"unknown noise {noise!r}; choose from {', '.join(NOISES)}")
    values = run_replicates(_risk_replicate, reps, seed, theta, tgt, cone, sigma, noise)
    mean, stderr = mean_and_stderr(values)
    return RiskEstimate(mean, stderr, reps, seed, target, noise)


@dataclass(frozen=True)
class VerifyResult:
    holds: bool
    slack: float
    estimate: RiskEstimate
    bound: BoundReport

    def to_dict(self) -> dict:
        return {"holds": self.holds, "slack": self.slack, "bound": self.bound.to_dict(),
                "estimate": self.estimate.to_dict()}


def verify_bound(theta, cone: ConeSpec, sigma: float, bound: BoundReport, reps: int,
                 seed: int, noise: str = "gaussian") -> VerifyResult:
    """Checks ``mean_risk - 3 stderr <= bound.value`` by simulation.

    Raises:
      InvalidInputError: the bound was computed for another sequence, sigma or cone.
    """
    theta = as_sequence(theta)
    sigma = float(sigma)
    if bound.n != theta.size:
        raise InvalidInputError(f"bound is for n={bound.n}, sequence has n={theta.size}")
    if not math.isclose(bound.sigma, sigma, rel_tol=1e-12):
        raise InvalidInputError(f"bound is for sigma={bound.sigma}, got sigma={sigma}")
    if bound.cone != str(cone) and not (bound.cone == "isotonic" and cone.is_isotonic):
        raise InvalidInputError(f"bound is for the {bound.cone} cone, not {cone}")
    ref = monotone_projection(theta) if bound.target == "monotone_projection" else theta
    if bound.digest and bound.digest != sequence_digest(ref):
        raise InvalidInputError("bound was computed for a different sequence")
    est = risk_mc(theta, cone, sigma, reps, seed, target=bound.target, noise=noise)
    holds = est.mean_risk - 3.0 * est.stderr <= bound.value
    return VerifyResult(bool(holds), bound.value - est.mean_risk, est, bound)


# ---------------------------------------------------------------------------
# Assouad hypercube

class _Members(Mapping):
    """Lazy mapping from bit tuples of length M to the perturbed sequences."""

    def __init__(self, family: "AssouadFamily"):
        self._family = family

    def __getitem__(self, tau):
        return self._family.member(tau)

    def __len__(self):
        return 2 ** self._family.M

    def __iter__(self):
        return itertools.product((0, 1), repeat=self._family.M)


@dataclass(frozen=True)
class AssouadFamily:
    """Hypercube of monotone perturbations of a piecewise-constant base.

    Block i (length n_i, level theta_{0,i}) is cut into ``m_i = floor(n_i / l)``
    sub-blocks of length l.  For a bit vector tau, sub-block v of block i is
    raised by ``beta (v - tau_iv) / m_i`` and the leftover tail by beta.
    """

    base: np.ndarray
    sigma: float
    c1: float
    c2: float
    k: int
    beta_n: float
    l_real: float
    l: int
    lengths: tuple[int, ...]
    m_blocks: tuple[int, ...]
    starts: tuple[int, ...] = field(repr=False, default=())

    @property
    def n(self) -> int:
        return self.base.size

    @property
    def M(self) -> int:
        return sum(self.m_blocks)

    @property
    def members(self) -> Mapping:
        return _Members(self)

    def split(self, tau) -> list[np.ndarray]:
        tau = np.asarray(tau, dtype=int).ravel()
        if tau.size != self.M or np.any((tau != 0) & (tau != 1)):
            raise InvalidInputError(f"tau must be a 0/1 vector of length M={self.M}")
        return np.split(tau, np.cumsum(self.m_blocks)[:-1])

    def member(self, tau) -> np.ndarray:
        out = self.base.copy()
        for start, n_i, m_i, bits in zip(self.starts, self.lengths, self.m_blocks, self.split(tau)):
            steps = (np.arange(1, m_i + 1) - bits) * (self.beta_n / m_i)
            out[start:start + m_i * self.l] += np.repeat(steps, self.l)
            out[start + m_i * self.l:start + n_i] += self.beta_n
        return out

    def describe(self) -> dict:
        return {"n": self.n, "k": self.k, "sigma": self.sigma, "c1": self.c1, "c2": self.c2,
                "beta_n": self.beta_n, "l_real": self.l_real, "l": self.l,
                "l_rounding": "ceil", "m": list(self.m_blocks), "M": self.M}


def build_assouad(theta, sigma: float, c1: float, c2: float) -> AssouadFamily:
    """Builds the hypercube family at a balanced, well separated piecewise-constant theta.

    ``l`` is the real scale ``(c1 n sigma / (2 k beta_n))^(2/3)`` rounded up.

    Raises:
      HypothesisViolated: block balance, level separation or the size condition fails.
    """
    setup = piecewise_setup(theta, sigma, c1, c2)
    base = as_sequence(theta)
    l_int = max(1, math.ceil(setup.l_real))
    if l_int > min(setup.lengths):
        raise HypothesisViolated("1 <= l <= min n_i", f"l={l_int}, min n_i={min(setup.lengths)}")
    m_blocks = tuple(b // l_int for b in setup.lengths)
    starts = tuple(int(s) for s in np.concatenate(([0], np.cumsum(setup.lengths)[:-1])))
    return AssouadFamily(base=base, sigma=float(sigma), c1=float(c1), c2=float(c2), k=setup.k,
                         beta_n=setup.beta, l_real=setup.l_real, l=l_int,
                         lengths=tuple(setup.lengths), m_blocks=m_blocks, starts=starts)


@dataclass
class AssouadReport:
    pairs: int
    violations: dict
    max_distance_rel_error: float
    max_kl_rel_error: float
    members_checked: int
    values: dict

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def to_dict(self) -> dict:
        return {"pairs": self.pairs, "violations": self.violations, "ok": self.ok,
                "max_distance_rel_error": self.max_distance_rel_error,
                "max_kl_rel_error": self.max_kl_rel_error,
                "members_checked": self.members_checked, "values": self.values}


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def _pairs(M: int, count: int, rng: np.random.Generator):
    zeros, ones = np.zeros(M, dtype=int), np.ones(M, dtype=int)
    yield zeros, zeros.copy()
    yield zeros, ones
    produced = 2
    while produced < count:
        tau = rng.integers(0, 2, M)
        if produced % 2 == 0:
            other = tau.copy()
            other[rng.integers(M)] ^= 1
        else:
            other = rng.integers(0, 2, M)
        yield tau, other
        produced += 1


def assouad_checks(family: AssouadFamily, sigma: Optional[float] = None, pairs: int = 500,
                   seed: int = 0, rel_tol: float = 1e-12) -> AssouadReport:
    """Verifies the distance, divergence and Pinsker inequalities on sampled pairs.

    Half of the random pairs differ in exactly one coordinate.  For each pair:

    * ``distance_identity``: ``l^2`` computed entrywise equals
      ``(l beta^2 / n) sum_i Ham_i / m_i^2`` to `rel_tol`.
    * ``hamming_lower``: ``l^2 >= k^2 l^3 beta^2 / (c2^2 n^3) * Ham``.
    * ``neighbor_upper`` (Ham = 1): ``l^2 <= 4 k^2 l^3 beta^2 / (c1^2 n^3)``.
    * ``kl_identity``: the Gaussian KL from the mean difference equals ``n l^2 / (2 sigma^2)``.
    * ``pinsker`` (Ham = 1): ``TV^2 <= KL / 2 <= k^2 l^3 beta^2 / (c1^2 n^2 sigma^2)``.

    Members are also checked for monotonicity and ``l_inf`` distance at most beta.
    """
    sigma = family.sigma if sigma is None else float(sigma)
    n, k, l, beta = family.n, family.k, family.l, family.beta_n
    c1, c2 = family.c1, family.c2
    m_arr = np.asarray(family.m_blocks, dtype=float)
    rng = replicate_rng(seed, 0)
    violations = dict.fromkeys(("distance_identity", "hamming_lower", "neighbor_upper",
                                "kl_identity", "pinsker", "monotone", "sup_distance"), 0)
    slack = 1.0 + rel_tol
    max_dist_err = max_kl_err = 0.0
    checked = set()
    count = 0
    for tau, other in _pairs(family.M, pairs, rng):
        count += 1
        a, b = family.member(tau), family.member(other)
        for key, vec in ((tuple(tau), a), (tuple(other), b)):
            if key in checked:
                continue
            checked.add(key)
            if not membership(vec, ConeSpec.isotonic()):
                violations["monotone"] += 1
            if np.max(np.abs(vec - family.base)) > beta * slack:
                violations["sup_distance"] += 1
        diff = a - b
        dist = float(np.mean(diff * diff))
        ham_i = np.array([np.count_nonzero(x != y)
                          for x, y in zip(family.split(tau), family.split(other))], dtype=float)
        ham = int(ham_i.sum())
        formula = l * beta * beta / n * float(np.sum(ham_i / m_arr ** 2))
        err = _rel(dist, formula)
        max_dist_err = max(max_dist_err, err)
        if err > rel_tol:
            violations["distance_identity"] += 1
        if dist * slack < k * k * l ** 3 * beta * beta / (c2 * c2 * n ** 3) * ham:
            violations["hamming_lower"] += 1
        kl_direct = float(diff @ diff) / (2.0 * sigma * sigma)
        kl_formula = n * dist / (2.0 * sigma * sigma)
        kl_err = _rel(kl_direct, kl_formula)
        max_kl_err = max(max_kl_err, kl_err)
        if kl_err > rel_tol:
            violations["kl_identity"] += 1
        if ham == 1:
            if dist > 4 * k * k * l ** 3 * beta * beta / (c1 * c1 * n ** 3) * slack:
                violations["neighbor_upper"] += 1
            tv = math.erf(math.sqrt(float(diff @ diff)) / (2.0 * math.sqrt(2.0) * sigma))
            cap = k * k * l ** 3 * beta * beta / (c1 * c1 * n * n * sigma * sigma)
            if not (tv * tv <= kl_direct / 2.0 * slack and kl_direct / 2.0 <= cap * slack):
                violations["pinsker"] += 1
    log_term = 1.0 + math.log(n / k)
    values = {
        "value_direct": c1 ** (7 / 3) / (2 ** (19 / 3) * c2 ** 2) * k * sigma ** 2 / n
        * log_term ** (1 / 3),
        "value_at_integer_l": c1 * k * k * l * l * beta * beta / (32 * c2 * c2 * n * n),
        "assouad_factor": 1.0 - k * beta * l ** 1.5 / (c1 * n * sigma),
    }
    return AssouadReport(count, violations, max_dist_err, max_kl_err, len(checked), values)
