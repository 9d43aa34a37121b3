import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conerisk.core import (
    ConeSpec,
    IntervalPartition,
    as_sequence,
    block_count,
    generated_partition,
    loss,
    membership,
    parse_sequence,
    strict_count,
)
from conerisk.errors import InvalidInputError, NotInConeError, NotMonotoneError

ISO = ConeSpec.isotonic()
CVX = ConeSpec.convex()

monotone_lists = st.lists(st.integers(-5, 5), min_size=1, max_size=30).map(sorted)


class TestSequence:
    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(InvalidInputError):
            as_sequence([])
        with pytest.raises(InvalidInputError):
            as_sequence([1.0, np.nan])
        with pytest.raises(InvalidInputError):
            as_sequence([np.inf])

    def test_parse_forms(self):
        assert parse_sequence("[1, 2.5, 3]").tolist() == [1.0, 2.5, 3.0]
        assert parse_sequence("1,2\n3 4").tolist() == [1.0, 2.0, 3.0, 4.0]
        with pytest.raises(InvalidInputError):
            parse_sequence("1,x")
        with pytest.raises(InvalidInputError):
            parse_sequence("[1, true]")
        with pytest.raises(InvalidInputError):
            parse_sequence("   ")


class TestConeSpec:
    def test_named_constructors(self):
        assert ISO.weights == (-1.0, 1.0) and (ISO.r, ISO.s) == (0, 1)
        assert CVX.weights == (1.0, -2.0, 1.0) and (CVX.r, CVX.s) == (1, 1)
        k3 = ConeSpec.k_monotone(3)
        assert k3.weights == (-1.0, 3.0, -3.0, 1.0) and (k3.r, k3.s) == (0, 3)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            ConeSpec(0, 1, (1.0,))
        with pytest.raises(InvalidInputError):
            ConeSpec(0, 0, (1.0,))
        with pytest.raises(InvalidInputError):
            ConeSpec(-1, 1, (1.0,))
        with pytest.raises(InvalidInputError):
            ConeSpec(0, 1, (0.0, 0.0))

    def test_parse(self):
        assert ConeSpec.parse("isotonic").is_isotonic
        assert ConeSpec.parse("convex") == CVX
        assert ConeSpec.parse("kmono:2").weights == (1.0, -2.0, 1.0)
        custom = ConeSpec.parse("custom:0,1,-1,1")
        assert custom.is_isotonic and custom.name == "custom:0,1,-1,1"
        for bad in ("nope", "kmono:x", "custom:1", "custom:0,1,1"):
            with pytest.raises(InvalidInputError):
                ConeSpec.parse(bad)

    def test_matrix_matches_constraint_values(self):
        theta = np.random.default_rng(0).normal(size=9)
        for cone in (ISO, CVX, ConeSpec.k_monotone(3)):
            np.testing.assert_allclose(cone.matrix(9) @ theta, cone.constraint_values(theta))


class TestPartition:
    def test_boundaries(self):
        pi = IntervalPartition((2, 1, 2))
        assert pi.boundaries == (0, 2, 3, 5)
        assert (pi.n, pi.m, pi.k) == (5, 3, 2)
        assert str(pi) == "2,1,2"
        assert IntervalPartition.from_boundaries([0, 2, 3, 5]) == pi
        assert IntervalPartition.parse("2,1,2") == pi

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            IntervalPartition(())
        with pytest.raises(InvalidInputError):
            IntervalPartition((2, 0))
        with pytest.raises(InvalidInputError):
            IntervalPartition((2, 2)).check_length(5)


class TestMembership:
    def test_examples(self):
        assert membership([1, 2, 3], ISO)
        assert membership([2, 1], CVX)  # fewer points than the constraint width
        assert not membership([0, 2, 1], ISO)

    def test_strict_count_examples(self):
        assert strict_count([1, 1, 2, 3, 3], ISO) == 2
        assert strict_count([4, 4, 4], ISO) == 0
        assert strict_count([0, 1, 3], CVX) == 1
        with pytest.raises(NotInConeError):
            strict_count([0, 2, 1], ISO)

    def test_single_point_in_every_cone(self):
        for cone in (ISO, CVX, ConeSpec.k_monotone(4)):
            assert membership([7.0], cone)
            assert strict_count([7.0], cone) == 0
        assert generated_partition([7.0]) == IntervalPartition((1,))

    @given(monotone_lists, st.floats(-100, 100))
    def test_isotonic_shift_invariance(self, values, shift):
        theta = np.array(values, dtype=float)
        assert membership(theta + shift, ISO)

    @given(st.lists(st.integers(-20, 20), min_size=3, max_size=12),
           st.integers(-50, 50), st.integers(-50, 50))
    def test_convex_affine_invariance(self, values, a, b):
        # integer data keeps second differences exact
        theta = np.array(values, dtype=float)
        shifted = theta + a + b * np.arange(theta.size)
        assert membership(theta, CVX) == membership(shifted, CVX)


class TestGeneratedPartition:
    def test_examples(self):
        assert generated_partition([1, 1, 2, 3, 3]).block_lengths == (2, 1, 2)
        assert generated_partition([5.0] * 5).block_lengths == (5,)
        assert generated_partition([1, 2, 3]).block_lengths == (1, 1, 1)
        with pytest.raises(NotMonotoneError):
            generated_partition([2, 1])

    @given(monotone_lists)
    def test_strict_count_matches_blocks(self, values):
        pi = generated_partition(values)
        assert strict_count(values, ISO) == pi.m - 1
        assert block_count(values) == strict_count(values, ISO) + 1


class TestBlockCount:
    def test_examples(self):
        assert block_count([0, 0, 1, 1, 1, 0]) == 3
        assert block_count([2.0] * 6) == 1
        assert block_count([1, 2, 3, 4]) == 4


def test_loss():
    assert loss([0, 0], [1, 1]) == 1.0
    assert loss([1, 2, 3], [1, 2, 3]) == 0.0
    with pytest.raises(InvalidInputError):
        loss([1], [1, 2])
