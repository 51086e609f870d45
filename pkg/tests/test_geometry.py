"""Tests for norms, the nearest-center shape function, and set geometry."""

import numpy as np
import pytest

from ballcover.geometry import (
    DimensionError,
    Norm,
    UncertaintySet,
    dual_achieving_direction,
    dual_norm_eval,
    member,
    member_batch,
    norm_eval,
    shape_value,
    shape_values,
    worst_case_linear,
)

ALL_NORMS = [Norm.L1, Norm.L2, Norm.LINF]


def brute_force_shape(centers, norm, u):
    """Reference nearest-center distance: explicit loop over centers."""
    best = np.inf
    for c in np.atleast_2d(centers):
        best = min(best, norm_eval(np.asarray(u, dtype=float) - c, norm))
    return best


class TestNormEval:
    def test_three_four_five(self):
        x = (3.0, -4.0)
        assert norm_eval(x, Norm.L1) == 7.0
        assert norm_eval(x, Norm.L2) == 5.0
        assert norm_eval(x, Norm.LINF) == 4.0

    def test_zero_vector(self):
        for norm in ALL_NORMS:
            assert norm_eval([0.0, 0.0], norm) == 0.0

    def test_zero_iff_zero_vector(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = rng.normal(size=rng.integers(1, 6))
            for norm in ALL_NORMS:
                assert (norm_eval(x, norm) == 0.0) == (not np.any(x))

    def test_empty_vector_rejected(self):
        for norm in ALL_NORMS:
            with pytest.raises(DimensionError):
                norm_eval([], norm)


class TestDualNorm:
    def test_dual_pairs(self):
        assert Norm.L1.dual is Norm.LINF
        assert Norm.LINF.dual is Norm.L1
        assert Norm.L2.dual is Norm.L2

    def test_dual_is_involution(self):
        for norm in ALL_NORMS:
            assert norm.dual.dual is norm

    def test_dual_values(self):
        x = (3.0, -4.0)
        assert dual_norm_eval(x, Norm.L1) == 4.0
        assert dual_norm_eval(x, Norm.LINF) == 7.0
        assert dual_norm_eval(x, Norm.L2) == 5.0

    def test_hoelder_inequality(self):
        # x . u <= ||x||_* for every u in the unit primal ball.
        rng = np.random.default_rng(202)
        for _ in range(300):
            d = int(rng.integers(1, 7))
            x = rng.normal(scale=3.0, size=d)
            u = rng.normal(size=d)
            norm = ALL_NORMS[rng.integers(3)]
            scale = norm_eval(u, norm)
            if scale == 0.0:
                continue
            u = u / scale * rng.uniform()
            assert x @ u <= dual_norm_eval(x, norm) + 1e-12

    def test_achieving_direction(self):
        rng = np.random.default_rng(303)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            x = rng.normal(size=d)
            norm = ALL_NORMS[rng.integers(3)]
            g = dual_achieving_direction(x, norm)
            assert norm_eval(g, norm) <= 1.0 + 1e-12
            np.testing.assert_allclose(x @ g, dual_norm_eval(x, norm), rtol=0, atol=1e-12)

    def test_achieving_direction_at_zero(self):
        for norm in ALL_NORMS:
            g = dual_achieving_direction(np.zeros(3), norm)
            np.testing.assert_array_equal(g, [1.0, 0.0, 0.0])


class TestShapeValue:
    def test_nearest_center(self):
        assert shape_value([(0, 0), (10, 0)], Norm.L2, (1, 0)) == 1.0

    def test_at_center(self):
        assert shape_value([(0, 0)], Norm.L2, (0, 0)) == 0.0

    def test_l1_two_centers(self):
        # min(|6|+|1|, |6-10|+|1|) = min(7, 5)
        assert shape_value([(0, 0), (10, 0)], Norm.L1, (6, 1)) == 5.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            d = int(rng.integers(1, 5))
            m = int(rng.integers(1, 8))
            centers = rng.normal(size=(m, d))
            u = rng.normal(size=d)
            norm = ALL_NORMS[rng.integers(3)]
            np.testing.assert_allclose(
                shape_value(centers, norm, u),
                brute_force_shape(centers, norm, u),
                rtol=1e-13,
            )

    def test_zero_at_every_center(self):
        rng = np.random.default_rng(7)
        centers = rng.normal(size=(12, 3))
        for norm in ALL_NORMS:
            values = shape_values(centers, norm, centers)
            np.testing.assert_array_equal(values, np.zeros(12))

    def test_batch_agrees_with_scalar(self):
        rng = np.random.default_rng(8)
        centers = rng.normal(size=(5, 2))
        points = rng.normal(size=(40, 2))
        for norm in ALL_NORMS:
            batch = shape_values(centers, norm, points)
            singles = [shape_value(centers, norm, p) for p in points]
            np.testing.assert_allclose(batch, singles, rtol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            shape_value([(0, 0)], Norm.L2, (1, 2, 3))
        with pytest.raises(DimensionError):
            shape_values(np.zeros((2, 2)), Norm.L2, np.zeros((3, 4)))


class TestUncertaintySet:
    def test_membership_examples(self):
        ball = UncertaintySet([(0, 0)], 1.0, Norm.L2)
        assert member(ball, (1, 0)) is True  # closed ball: boundary is inside
        assert member(UncertaintySet([(0, 0)], 0.5, Norm.L2), (1, 0)) is False
        two = UncertaintySet([(0, 0), (10, 0)], 1.0, Norm.L2)
        assert member(two, (9.5, 0)) is True

    def test_member_is_shape_threshold_bitwise(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            d = int(rng.integers(1, 5))
            centers = rng.normal(size=(int(rng.integers(1, 6)), d))
            u = rng.normal(scale=2.0, size=d)
            norm = ALL_NORMS[rng.integers(3)]
            phi = shape_value(centers, norm, u)
            # Exact tie: the point must be a member at radius == phi ...
            assert member(UncertaintySet(centers, phi, norm), u)
            # ... and a non-member one ulp below (phi > 0 so nextafter is valid).
            if phi > 0:
                below = np.nextafter(phi, -np.inf)
                assert not member(UncertaintySet(centers, below, norm), u)

    def test_membership_monotone_in_radius(self):
        rng = np.random.default_rng(5)
        centers = rng.normal(size=(4, 2))
        points = rng.normal(scale=2.0, size=(300, 2))
        for norm in ALL_NORMS:
            small = member_batch(UncertaintySet(centers, 0.7, norm), points)
            large = member_batch(UncertaintySet(centers, 1.4, norm), points)
            assert np.all(large[small])

    def test_single_center_promoted(self):
        ball = UncertaintySet((0.5, 0.5), 0.1, Norm.L2)
        assert ball.num_balls == 1
        assert ball.dimension == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            UncertaintySet([(0, 0)], -1.0, Norm.L2)
        with pytest.raises(ValueError):
            UncertaintySet([(0, 0)], float("nan"), Norm.L2)
        with pytest.raises(DimensionError):
            UncertaintySet(np.zeros((0, 2)), 1.0, Norm.L2)
        with pytest.raises(TypeError):
            UncertaintySet([(0, 0)], 1.0, "l2")

    def test_centers_read_only(self):
        ball = UncertaintySet([(0, 0)], 1.0, Norm.L2)
        with pytest.raises(ValueError):
            ball.centers[0, 0] = 5.0

    def test_json_round_trip(self):
        uset = UncertaintySet([(0.25, -1.5), (3.0, 0.0)], 0.75, Norm.LINF)
        data = uset.to_dict()
        assert data["norm"] == "linf"
        back = UncertaintySet.from_dict(data)
        np.testing.assert_array_equal(back.centers, uset.centers)
        assert back.radius == uset.radius
        assert back.norm is uset.norm

    def test_from_dict_missing_key(self):
        with pytest.raises(ValueError):
            UncertaintySet.from_dict({"norm": "l2", "radius": 1.0})


class TestWorstCaseLinear:
    def test_l2_ball_closed_form(self):
        uset = UncertaintySet([(0.5, 0.5)], 0.1, Norm.L2)
        expected = 1.0 + 0.1 * np.sqrt(2.0)
        np.testing.assert_allclose(worst_case_linear(uset, (1, 1)), expected, rtol=1e-15)

    def test_l2_ball_sampled_cross_check(self):
        # The sampled max over many in-ball points never exceeds the closed
        # form and comes close to it.
        uset = UncertaintySet([(0.5, 0.5)], 0.1, Norm.L2)
        x = np.array([1.0, 1.0])
        rng = np.random.default_rng(1234)
        theta = rng.uniform(0, 2 * np.pi, size=1_000_000)
        rad = 0.1 * np.sqrt(rng.uniform(size=theta.size))
        pts = np.column_stack([0.5 + rad * np.cos(theta), 0.5 + rad * np.sin(theta)])
        sampled = float(np.max(pts @ x))
        closed = worst_case_linear(uset, x)
        assert sampled <= closed + 1e-12
        assert closed - sampled < 1e-3

    def test_degenerate_radius_zero(self):
        uset = UncertaintySet([(1, 0)], 0.0, Norm.L2)
        assert worst_case_linear(uset, (2, 3)) == 2.0

    def test_l1_union_brute_force(self):
        uset = UncertaintySet([(0, 0), (1, 0)], 1.0, Norm.L1)
        x = np.array([1.0, 0.0])
        # Boundary of the L1 ball: (+-(1-s), +-s) for s in [0, 1].
        s = np.linspace(0.0, 1.0, 20001)
        boundary = np.concatenate(
            [np.column_stack([sx * (1 - s), sy * s]) for sx in (1, -1) for sy in (1, -1)]
        )
        best = -np.inf
        for c in uset.centers:
            best = max(best, float(np.max((c + boundary) @ x)))
        assert worst_case_linear(uset, x) == 2.0
        np.testing.assert_allclose(best, 2.0, atol=1e-12)

    def test_dominates_sampled_members(self):
        rng = np.random.default_rng(77)
        for _ in range(30):
            d = int(rng.integers(1, 4))
            centers = rng.normal(size=(int(rng.integers(1, 5)), d))
            norm = ALL_NORMS[rng.integers(3)]
            uset = UncertaintySet(centers, float(rng.uniform(0.1, 2.0)), norm)
            x = rng.normal(size=d)
            # Random points near the set, filtered down to actual members.
            candidates = centers[rng.integers(centers.shape[0], size=200)]
            candidates = candidates + rng.uniform(-1, 1, size=candidates.shape) * uset.radius
            inside = candidates[member_batch(uset, candidates)]
            bound = worst_case_linear(uset, x)
            for u in inside:
                assert u @ x <= bound + 1e-9

    def test_dimension_mismatch(self):
        uset = UncertaintySet([(0, 0)], 1.0, Norm.L2)
        with pytest.raises(DimensionError):
            worst_case_linear(uset, (1, 2, 3))
