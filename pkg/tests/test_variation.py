import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conerisk.core import IntervalPartition, generated_partition
from conerisk.errors import InvalidInputError, NotMonotoneError
from conerisk.variation import d_pi, s_pi, v_pi, variation_report
from oracles import direct_d2


@st.composite
def monotone_with_partition(draw):
    values = sorted(draw(st.lists(st.integers(-20, 20), min_size=1, max_size=25)))
    theta = np.array(values, dtype=float) / 4
    n = theta.size
    cuts = sorted(draw(st.sets(st.integers(1, max(1, n - 1)), max_size=n - 1))) if n > 1 else []
    return theta, IntervalPartition.from_boundaries([0, *cuts, n])


def test_v_pi_examples():
    assert v_pi([0, 0, 1, 1], IntervalPartition((2, 2))) == 0
    assert v_pi([0, 0, 1, 1], IntervalPartition((1, 3))) == 1
    assert v_pi([1, 3, 8], IntervalPartition((3,))) == 7


def test_d_pi_examples():
    assert d_pi([0.25, 0.5, 0.75, 1.0], IntervalPartition((2, 2))) == 0.125
    assert d_pi([0, 1], IntervalPartition((2,))) == 0.5
    assert d_pi([1, 1, 2, 5], IntervalPartition((2, 1, 1))) == 0.0


def test_s_pi_examples():
    assert s_pi([3, 3, 3], IntervalPartition((1, 2))) == 0
    assert s_pi([0, 1], IntervalPartition((2,))) == math.sqrt(0.5)
    assert s_pi([0, 0, 1, 1], IntervalPartition((2, 2))) == 0


def test_errors():
    with pytest.raises(InvalidInputError):
        v_pi([0, 1, 2], IntervalPartition((2, 2)))
    with pytest.raises(NotMonotoneError):
        v_pi([1, 0], IntervalPartition((2,)))
    with pytest.raises(NotMonotoneError):
        s_pi([1, 0], IntervalPartition((2,)))
    assert d_pi([1, 0], IntervalPartition((2,))) == 0.5


@given(monotone_with_partition())
def test_orderings(case):
    theta, pi = case
    rep = variation_report(theta, pi)
    assert rep.d_pi <= rep.v_pi + 1e-12
    assert rep.s_pi <= rep.v_pi + 1e-12


@given(monotone_with_partition())
def test_generated_partition_is_exactly_zero(case):
    theta, _ = case
    pi = generated_partition(theta)
    assert v_pi(theta, pi) == 0.0 and d_pi(theta, pi) == 0.0 and s_pi(theta, pi) == 0.0


@given(monotone_with_partition())
def test_d_pi_matches_direct_block_means(case):
    theta, pi = case
    assert d_pi(theta, pi) ** 2 == pytest.approx(direct_d2(theta, pi.block_lengths), abs=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20))
def test_single_block_is_population_std(values):
    theta = np.array(values)
    assert d_pi(theta, IntervalPartition((theta.size,))) == pytest.approx(np.std(theta), abs=1e-9)


def test_linear_sequence_block_formula():
    # equal blocks of size b on i/n: D^2 = (sum b^3 - n) / (12 n^3)
    n = 12
    theta = np.arange(1, n + 1) / n
    for b in (1, 2, 3, 4, 6, 12):
        pi = IntervalPartition((b,) * (n // b))
        expect = ((n // b) * b ** 3 - n) / (12 * n ** 3)
        assert d_pi(theta, pi) ** 2 == pytest.approx(expect, rel=1e-12, abs=1e-15)
