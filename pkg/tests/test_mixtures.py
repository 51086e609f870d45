"""Tests for Gaussian mixtures, random streams, and the mass oracle."""

import math

import numpy as np
import pytest
from scipy.special import ndtr

from ballcover.geometry import DimensionError, Norm, UncertaintySet, member_batch
from ballcover.mixtures import (
    GaussianMixture,
    RandomStream,
    bundled_mixture,
    true_ball_mass,
)


def std_normal(d):
    return GaussianMixture([1.0], [np.zeros(d)], [np.eye(d)])


class TestConstruction:
    def test_zero_covariance_rejected(self):
        with pytest.raises(ValueError, match="positive definite"):
            GaussianMixture([1.0], [(5.0, 5.0)], [np.zeros((2, 2))])

    def test_indefinite_covariance_rejected(self):
        cov = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
        with pytest.raises(ValueError, match="positive definite"):
            GaussianMixture([1.0], [(0.0, 0.0)], [cov])

    def test_asymmetric_covariance_rejected(self):
        cov = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            GaussianMixture([1.0], [(0.0, 0.0)], [cov])

    def test_weight_validation(self):
        with pytest.raises(ValueError, match="sum to 1"):
            GaussianMixture([0.5, 0.4], [(0, 0), (1, 1)], [np.eye(2)] * 2)
        with pytest.raises(ValueError, match="positive"):
            GaussianMixture([1.5, -0.5], [(0, 0), (1, 1)], [np.eye(2)] * 2)

    def test_component_count_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            GaussianMixture([0.5, 0.5], [(0, 0)], [np.eye(2)] * 2)

    def test_weights_renormalized_exactly(self):
        mix = GaussianMixture(
            [0.5 + 2e-10, 0.5], [(0, 0), (1, 1)], [np.eye(2)] * 2
        )
        assert abs(mix.weights.sum() - 1.0) <= 1e-12

    def test_immutable_arrays(self):
        mix = std_normal(2)
        with pytest.raises(ValueError):
            mix.means[0, 0] = 1.0


class TestDensity:
    def test_standard_normal_1d(self):
        np.testing.assert_allclose(
            std_normal(1).density([0.0]), 1.0 / math.sqrt(2 * math.pi), rtol=1e-14
        )

    def test_standard_normal_2d(self):
        np.testing.assert_allclose(
            std_normal(2).density([0.0, 0.0]), 1.0 / (2 * math.pi), rtol=1e-14
        )

    def test_two_component_symmetry(self):
        mix = GaussianMixture([0.5, 0.5], [(0.0,), (4.0,)], [np.eye(1), np.eye(1)])
        phi2 = math.exp(-2.0) / math.sqrt(2 * math.pi)
        np.testing.assert_allclose(mix.density([2.0]), phi2, rtol=1e-13)
        np.testing.assert_allclose(mix.density([2.0]), 0.053991, atol=5e-7)

    def test_batch_matches_scalar(self):
        mix = bundled_mixture("peaked")
        pts = np.random.default_rng(3).normal(size=(50, 2))
        batch = mix.density(pts)
        np.testing.assert_allclose(batch, [mix.density(p) for p in pts], rtol=1e-13)

    def test_nonnegative_and_log_finite_on_grid(self):
        mix = bundled_mixture("fourmode")
        xs = np.linspace(-8, 8, 41)
        grid = np.array([(x, y) for x in xs for y in xs])
        values = mix.density(grid)
        assert np.all(values >= 0)
        assert np.all(np.isfinite(np.log(values)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            std_normal(2).density([1.0, 2.0, 3.0])


class TestSampling:
    def test_moments_standard_normal(self):
        pts = std_normal(2).sample(RandomStream(123, 0), 100_000)
        assert np.all(np.abs(pts.mean(axis=0)) < 0.02)
        cov = np.cov(pts.T)
        assert np.all(np.abs(cov - np.eye(2)) < 0.03)

    def test_component_balance(self):
        mix = GaussianMixture(
            [0.5, 0.5], [(-10.0, 0.0), (10.0, 0.0)], [np.eye(2)] * 2
        )
        pts = mix.sample(RandomStream(7, 3), 10_000)
        frac = float(np.mean(pts[:, 0] > 0))
        assert 0.48 <= frac <= 0.52

    def test_zero_draws(self):
        assert std_normal(2).sample(RandomStream(1), 0).shape == (0, 2)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            std_normal(2).sample(RandomStream(1), -1)

    def test_density_integrates_to_one(self):
        # Importance sampling against a wide proposal.
        mix = bundled_mixture("peaked")
        proposal = GaussianMixture([1.0], [(0.0, 0.0)], [9.0 * np.eye(2)])
        pts = proposal.sample(RandomStream(55, 0), 200_000)
        ratios = mix.density(pts) / proposal.density(pts)
        estimate = float(ratios.mean())
        se = float(ratios.std(ddof=1) / math.sqrt(ratios.size))
        assert abs(estimate - 1.0) <= 4 * se


class TestRandomStream:
    def test_reproducible(self):
        mix = bundled_mixture("isotropic")
        a = mix.sample(RandomStream(99, 5), 1000)
        b = mix.sample(RandomStream(99, 5), 1000)
        np.testing.assert_array_equal(a, b)

    def test_substreams_differ(self):
        mix = bundled_mixture("isotropic")
        a = mix.sample(RandomStream(99, 5), 1000)
        b = mix.sample(RandomStream(99, 6), 1000)
        c = mix.sample(RandomStream(98, 5), 1000)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_child_offsets(self):
        s = RandomStream(4, 10)
        assert s.child(3) == RandomStream(4, 13)

    def test_negative_ids_wrap(self):
        s = RandomStream(-1, 0)
        assert s.seed == 2**64 - 1

    def test_type_validation(self):
        with pytest.raises(TypeError):
            RandomStream(1.5, 0)


class TestTrueBallMass:
    def test_radial_closed_form(self):
        r = math.sqrt(2 * math.log(10.0))
        mass = true_ball_mass(std_normal(2), UncertaintySet([(0, 0)], r, Norm.L2))
        assert abs(mass - 0.9) <= 1e-4

    def test_zero_radius(self):
        assert true_ball_mass(std_normal(2), UncertaintySet([(0, 0)], 0.0, Norm.L2)) == 0.0

    def test_far_ball(self):
        uset = UncertaintySet([(1e6, 1e6)], 1.0, Norm.L2)
        assert true_ball_mass(std_normal(2), uset) < 1e-10

    def test_one_dimensional_exact(self):
        uset = UncertaintySet([(0.5,)], 1.0, Norm.L2)
        expected = float(ndtr(1.5) - ndtr(-0.5))
        np.testing.assert_allclose(true_ball_mass(std_normal(1), uset), expected, rtol=1e-12)

    def test_one_dimensional_overlapping_union(self):
        uset = UncertaintySet([(0.0,), (0.5,), (4.0,)], 0.6, Norm.L1)
        # Merged intervals: [-0.6, 1.1] and [3.4, 4.6].
        expected = float((ndtr(1.1) - ndtr(-0.6)) + (ndtr(4.6) - ndtr(3.4)))
        np.testing.assert_allclose(true_ball_mass(std_normal(1), uset), expected, rtol=1e-12)

    def test_monte_carlo_agreement(self):
        r = math.sqrt(2 * math.log(10.0))
        uset = UncertaintySet([(0, 0)], r, Norm.L2)
        n = 1_000_000
        pts = std_normal(2).sample(RandomStream(2024, 0), n)
        mc = float(member_batch(uset, pts).mean())
        assert abs(mc - true_ball_mass(std_normal(2), uset)) <= 4 / math.sqrt(n)

    def test_union_cross_check_all_norms(self):
        mix = bundled_mixture("peaked")
        pts = mix.sample(RandomStream(31, 0), 1_000_000)
        for norm, radius in [(Norm.L1, 1.2), (Norm.L2, 1.0), (Norm.LINF, 0.8)]:
            uset = UncertaintySet([(0.0, 0.0), (1.5, 1.5), (0.5, 1.0)], radius, norm)
            quad = true_ball_mass(mix, uset)
            mc = float(member_batch(uset, pts).mean())
            assert abs(quad - mc) <= 4 / math.sqrt(pts.shape[0]) + 1e-4

    def test_high_dimension_rejected(self):
        uset = UncertaintySet([np.zeros(4)], 1.0, Norm.L2)
        with pytest.raises(ValueError, match="Monte-Carlo"):
            true_ball_mass(std_normal(4), uset)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            true_ball_mass(std_normal(2), UncertaintySet([(0,)], 1.0, Norm.L2))


class TestBundledMixtures:
    def test_names_and_aliases(self):
        for name, alias in [("isotropic", "a"), ("peaked", "b"), ("fourmode", "c")]:
            mix = bundled_mixture(name)
            np.testing.assert_array_equal(mix.means, bundled_mixture(alias).means)
            assert mix.dimension == 2

    def test_fourmode_separation(self):
        mix = bundled_mixture("fourmode")
        assert mix.num_components == 4
        dists = [
            float(np.linalg.norm(a - b))
            for i, a in enumerate(mix.means)
            for b in mix.means[i + 1 :]
        ]
        # Modes are many standard deviations apart.
        assert min(dists) > 8 * math.sqrt(np.max(mix.covariances))

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            bundled_mixture("ring")

    def test_json_round_trip(self):
        mix = bundled_mixture("peaked")
        again = GaussianMixture.from_dict(mix.to_dict())
        np.testing.assert_array_equal(again.weights, mix.weights)
        np.testing.assert_array_equal(again.means, mix.means)
        np.testing.assert_array_equal(again.covariances, mix.covariances)

    def test_from_dict_missing_key(self):
        with pytest.raises(ValueError):
            GaussianMixture.from_dict({"weights": [1.0]})
