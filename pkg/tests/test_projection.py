import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conerisk.core import ConeSpec, membership
from conerisk.errors import InvalidInputError, NonConvergence
from conerisk.projection import (
    minmax_formula,
    monotone_projection,
    pava,
    pava_blocks,
    project,
    project_cone,
)
from oracles import interval_means_projection, kkt_projection

ISO = ConeSpec.isotonic()
CVX = ConeSpec.convex()

vectors = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=40).map(np.array)


class TestPava:
    def test_examples(self):
        assert pava([1, 2, 3]).fitted.tolist() == [1, 2, 3]
        assert pava([2, 1]).fitted.tolist() == [1.5, 1.5]
        assert pava([3, 1, 2]).fitted.tolist() == [2, 2, 2]
        assert pava([3, 1, 2]).iterations == 0

    def test_matches_kkt_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            y = rng.normal(size=rng.integers(1, 9))
            np.testing.assert_allclose(pava(y).fitted, kkt_projection(y, ISO.matrix(y.size)),
                                       atol=1e-9)

    @given(vectors)
    def test_characterization(self, y):
        fit = pava(y).fitted
        resid = y - fit
        scale = 1.0 + float(y @ y)
        assert membership(fit, ISO)
        assert abs(resid @ fit) <= 1e-8 * scale
        # extreme rays of the monotone cone: step vectors and +/- the constant
        steps = np.cumsum(resid[::-1])[::-1]  # <resid, 1{j >= i}>
        assert np.all(steps[1:] <= 1e-8 * scale)
        assert abs(resid.sum()) <= 1e-8 * scale

    @given(vectors)
    def test_block_values_are_means(self, y):
        means, lengths = pava_blocks(y)
        assert lengths.sum() == y.size
        assert np.all(np.diff(means) > 0)
        start = 0
        for mean, b in zip(means, lengths):
            assert mean == pytest.approx(y[start:start + b].mean(), rel=1e-12, abs=1e-12)
            start += b

    @given(vectors)
    def test_idempotent(self, y):
        fit = pava(y).fitted
        np.testing.assert_allclose(pava(fit).fitted, fit, atol=1e-12)

    @given(vectors, st.floats(0, 10))
    def test_scale_equivariant(self, y, t):
        np.testing.assert_allclose(pava(t * y).fitted, t * pava(y).fitted, atol=1e-9)

    @settings(max_examples=50)
    @given(st.integers(1, 30), st.integers(0, 10**6))
    def test_one_lipschitz(self, n, seed):
        rng = np.random.default_rng(seed)
        y, z = rng.normal(size=n), rng.normal(size=n)
        gap = np.linalg.norm(pava(y).fitted - pava(z).fitted)
        assert gap <= np.linalg.norm(y - z) + 1e-12


class TestMinmax:
    def test_examples(self):
        assert minmax_formula([1, 2, 3]).tolist() == [1, 2, 3]
        assert minmax_formula([3, 1, 2]).tolist() == [2, 2, 2]
        assert minmax_formula([2, 1]).tolist() == [1.5, 1.5]

    @given(vectors)
    def test_equals_pava(self, y):
        np.testing.assert_allclose(minmax_formula(y), pava(y).fitted, atol=1e-10)

    def test_equals_loop_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            y = rng.normal(size=rng.integers(1, 12))
            np.testing.assert_allclose(minmax_formula(y), interval_means_projection(y), atol=1e-12)


class TestProjectCone:
    def test_in_cone_is_fixed_point(self):
        res = project_cone([1.0, 2.0, 4.0], CVX)
        assert res.fitted.tolist() == [1.0, 2.0, 4.0] and res.iterations <= 1

    def test_isotonic_example(self):
        for method in ("active_set", "dykstra"):
            res = project_cone([3.0, 1.0, 2.0], ISO, tol=1e-10, method=method)
            np.testing.assert_allclose(res.fitted, [2, 2, 2], atol=1e-9)

    def test_convex_example(self):
        # the KKT oracle gives the common value 1/3 (all three equal)
        oracle = kkt_projection([0.0, 1.0, 0.0], CVX.matrix(3))
        np.testing.assert_allclose(oracle, [1 / 3] * 3, atol=1e-12)
        for method in ("active_set", "dykstra"):
            res = project_cone([0.0, 1.0, 0.0], CVX, method=method)
            np.testing.assert_allclose(res.fitted, oracle, atol=1e-9)

    @pytest.mark.parametrize("cone", [CVX, ConeSpec.k_monotone(2), ConeSpec.k_monotone(3),
                                      ConeSpec.parse("custom:1,1,1,-3,1"),
                                      ConeSpec.parse("custom:0,2,-1,0.5,1")])
    def test_matches_kkt_oracle(self, cone):
        rng = np.random.default_rng(5)
        for _ in range(15):
            n = int(rng.integers(1, 10))
            y = rng.normal(size=n) * 3
            oracle = kkt_projection(y, cone.matrix(n))
            res = project_cone(y, cone)
            assert res.converged
            np.testing.assert_allclose(res.fitted, oracle, atol=1e-8)
            slow = project_cone(y, cone, method="dykstra", tol=1e-12)
            np.testing.assert_allclose(slow.fitted, oracle, atol=1e-6)

    def test_small_n_is_identity(self):
        res = project_cone([5.0, -3.0], CVX)
        assert res.fitted.tolist() == [5.0, -3.0]

    def test_residual_gap_reported(self):
        res = project_cone(np.random.default_rng(1).normal(size=40), CVX)
        assert 0.0 <= res.residual_gap < 1e-9

    def test_iteration_cap(self):
        y = np.random.default_rng(2).normal(size=60)
        res = project_cone(y, CVX, method="dykstra", max_iter=1)
        assert not res.converged
        with pytest.raises(NonConvergence):
            res.check()

    def test_bad_arguments(self):
        with pytest.raises(InvalidInputError):
            project_cone([1.0, 0.0], ISO, tol=0)
        with pytest.raises(InvalidInputError):
            project_cone([1.0, 0.0], ISO, max_iter=0)
        with pytest.raises(InvalidInputError):
            project_cone([1.0, 0.0], ISO, method="magic")

    def test_project_dispatch(self):
        y = np.array([3.0, 1.0, 2.0])
        assert project(y, ISO).blocks == (3,)
        np.testing.assert_allclose(project(y, CVX).fitted, kkt_projection(y, CVX.matrix(3)))


class TestMonotoneProjection:
    def test_examples(self):
        assert monotone_projection([3, 2, 1]).tolist() == [2, 2, 2]
        assert monotone_projection([0, 1, 5]).tolist() == [0, 1, 5]
        assert monotone_projection([0, 2, 1, 3]).tolist() == [0, 1.5, 1.5, 3]


def test_active_set_terminates_when_rounding_blocks_the_step():
    # this draw once left the blocking coefficient at a tiny positive value
    from conerisk.montecarlo import replicate_rng
    z = replicate_rng(1356, 334).standard_normal(256)
    res = project_cone(z, ConeSpec.convex(), max_iter=200)
    assert res.converged and res.residual_gap < 1e-9
    assert membership(res.fitted, ConeSpec.convex())
