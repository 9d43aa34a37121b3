"""Variation of a sequence relative to an interval partition.

* ``V_pi`` -- largest within-block span ``theta[end] - theta[start]``.
* ``D_pi`` -- root mean within-block squared deviation from the block mean.
* ``S_pi`` -- root mean squared deviation from each block's right endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from conerisk.core import IntervalPartition, as_sequence, require_nondecreasing


@dataclass(frozen=True)
class VariationReport:
    v_pi: float
    d_pi: float
    s_pi: float


def _block_stats(theta: np.ndarray, pi: IntervalPartition):
    pi.check_length(theta.size)
    starts = np.asarray(pi.boundaries[:-1])
    lengths = np.asarray(pi.block_lengths)
    ends = starts + lengths - 1
    mean = np.add.reduceat(theta, starts) / lengths
    # keeps constant blocks at exactly zero deviation
    mean = np.clip(mean, np.minimum.reduceat(theta, starts), np.maximum.reduceat(theta, starts))
    return starts, ends, lengths, mean


def v_pi(theta, pi: IntervalPartition) -> float:
    """Largest block span of a nondecreasing sequence."""
    theta = require_nondecreasing(theta)
    starts, ends, _, _ = _block_stats(theta, pi)
    return float(np.max(theta[ends] - theta[starts]))


def d_pi(theta, pi: IntervalPartition) -> float:
    """Root mean within-block sum of squares (the block-ANOVA residual)."""
    theta = as_sequence(theta)
    _, _, lengths, mean = _block_stats(theta, pi)
    dev = theta - np.repeat(mean, lengths)
    return math.sqrt(float(dev @ dev) / theta.size)


def s_pi(t, pi: IntervalPartition) -> float:
    """Root mean squared distance from each entry to its block's last entry."""
    t = require_nondecreasing(t)
    _, ends, lengths, _ = _block_stats(t, pi)
    dev = np.repeat(t[ends], lengths) - t
    return math.sqrt(float(dev @ dev) / t.size)


def variation_report(theta, pi: IntervalPartition) -> VariationReport:
    return VariationReport(v_pi(theta, pi), d_pi(theta, pi), s_pi(theta, pi))
