"""Tests for seeded sampling of roads, points and LOS distances."""

import math

import numpy as np
import pytest
from scipy import stats

from los_coverage.geometry import chord_half_length
from los_coverage.sampling import (
    RandomSeed,
    Role,
    ScenarioParams,
    sample_lines_disk,
    sample_lines_manhattan,
    sample_los_extents,
    sample_points_on_line,
)


class TestScenarioParams:
    """Tests for ScenarioParams."""

    def test_from_per_km(self):
        """Intensities given per km are stored per meter."""
        params = ScenarioParams.from_per_km(lambda_l=5, mu=2, mu_v=25)
        assert params.lambda_l == pytest.approx(0.005)
        assert params.mu == pytest.approx(0.002)
        assert params.mu_v == pytest.approx(0.025)
        assert params.gamma == 100.0
        assert params.eta == 100.0

    def test_user_units(self):
        """to_user_units converts intensities back to per km."""
        params = ScenarioParams.from_per_km(lambda_l=3, mu=4, mu_v=50, gamma=150)
        user = params.to_user_units()
        assert user["lambda_l"] == pytest.approx(3.0)
        assert user["mu_v"] == pytest.approx(50.0)
        assert user["gamma"] == 150.0

    @pytest.mark.parametrize("field", ["lambda_l", "mu", "mu_v", "gamma", "eta", "speed"])
    def test_negative_rejected(self, urban_params, field):
        """Every parameter must be nonnegative."""
        with pytest.raises(ValueError, match=field):
            urban_params.replace(**{field: -1.0})

    def test_nan_rejected(self, urban_params):
        with pytest.raises(ValueError, match="gamma"):
            urban_params.replace(gamma=float("nan"))


class TestRandomSeed:
    """Tests for RandomSeed streams."""

    def test_same_key_same_stream(self):
        """Equal keys give identical sequences."""
        a = RandomSeed(42).generator(3, Role.RSU, 1).random(5)
        b = RandomSeed(42).generator(3, Role.RSU, 1).random(5)
        np.testing.assert_array_equal(a, b)

    def test_different_keys_differ(self):
        """Scene, role and line each select a different stream."""
        seed = RandomSeed(42)
        base = seed.generator(3, Role.RSU, 1).random(5)
        for key in ((4, Role.RSU, 1), (3, Role.LOS, 1), (3, Role.RSU, 2)):
            assert not np.array_equal(base, seed.generator(*key).random(5))
        assert not np.array_equal(base, RandomSeed(42, stream=1).generator(3, Role.RSU, 1).random(5))

    def test_full_64_bit_range(self):
        RandomSeed(2**64 - 1).generator(0).random()
        with pytest.raises(ValueError, match="seed"):
            RandomSeed(2**64)
        with pytest.raises(ValueError, match="seed"):
            RandomSeed(-1)


class TestSampleLines:
    """Tests for the Poisson line samplers."""

    def test_mean_count_1km(self):
        """5 roads/km in a 1 km disk gives 10 lines on average."""
        params = ScenarioParams.from_per_km(lambda_l=5, mu=0, mu_v=0)
        rng = np.random.default_rng(1)
        counts = [len(sample_lines_disk(params, 1000.0, rng)) for _ in range(20_000)]
        assert np.mean(counts) == pytest.approx(10.0, abs=0.1)

    def test_mean_count_500m(self):
        params = ScenarioParams.from_per_km(lambda_l=5, mu=0, mu_v=0)
        rng = np.random.default_rng(2)
        counts = [len(sample_lines_manhattan(params, 500.0, rng)) for _ in range(20_000)]
        assert np.mean(counts) == pytest.approx(5.0, abs=0.08)

    def test_zero_intensity(self):
        """No roads at zero intensity."""
        params = ScenarioParams.from_per_km(lambda_l=0, mu=2, mu_v=25)
        assert sample_lines_disk(params, 1000.0, np.random.default_rng(3)) == []

    def test_offsets_and_angles_in_range(self, urban_params):
        lines = sample_lines_disk(urban_params, 5000.0, np.random.default_rng(4))
        assert lines
        for line in lines:
            assert -5000.0 < line.offset < 5000.0
            assert 0.0 <= line.angle < math.pi

    def test_manhattan_angles(self, urban_params):
        """Manhattan roads are horizontal or vertical, both present."""
        lines = sample_lines_manhattan(urban_params, 5000.0, np.random.default_rng(5))
        angles = {line.angle for line in lines}
        assert angles == {0.0, math.pi / 2}

    def test_radius_must_be_positive(self, urban_params):
        with pytest.raises(ValueError, match="radius"):
            sample_lines_disk(urban_params, 0.0, np.random.default_rng(6))

    def test_line_length_density(self):
        """Total chord length in a disk over its area converges to lambda_l."""
        params = ScenarioParams.from_per_km(lambda_l=5, mu=0, mu_v=0)
        radius = 10_000.0
        densities = []
        for k in range(400):
            lines = sample_lines_disk(params, radius, RandomSeed(k).generator(0, Role.LINES))
            total = sum(2.0 * chord_half_length(line, radius) for line in lines)
            densities.append(total / (math.pi * radius**2))
        assert np.mean(densities) == pytest.approx(params.lambda_l, rel=0.02)


class TestSamplePoints:
    """Tests for points on a line."""

    def test_mean_count(self):
        """4 RSUs/km on a 1 km window gives 4 points on average."""
        rng = np.random.default_rng(8)
        counts = [len(sample_points_on_line(0.004, (-500.0, 500.0), rng)) for _ in range(100_000)]
        assert np.mean(counts) == pytest.approx(4.0, rel=0.01)

    def test_uniform_positions(self):
        """Positions are uniform on the window."""
        rng = np.random.default_rng(9)
        points = np.concatenate([sample_points_on_line(0.004, (-500.0, 500.0), rng) for _ in range(5000)])
        assert stats.kstest(points, "uniform", args=(-500.0, 1000.0)).pvalue > 0.001

    def test_sorted_and_inside(self):
        points = sample_points_on_line(0.05, (-100.0, 300.0), np.random.default_rng(10))
        assert np.all(np.diff(points) >= 0)
        assert np.all((points >= -100.0) & (points <= 300.0))

    def test_empty_cases(self):
        """Zero intensity or an empty window give no points."""
        rng = np.random.default_rng(11)
        assert len(sample_points_on_line(0.0, (-500.0, 500.0), rng)) == 0
        assert len(sample_points_on_line(0.01, (5.0, 5.0), rng)) == 0

    def test_reversed_window(self):
        with pytest.raises(ValueError, match="window"):
            sample_points_on_line(0.01, (5.0, -5.0), np.random.default_rng(12))


class TestLosExtents:
    """Tests for exponential LOS distances."""

    def test_mean_and_tail(self):
        """Mean gamma and P(W > 2 gamma) = e^-2."""
        left, right = sample_los_extents(100.0, np.random.default_rng(13), size=100_000)
        assert left.mean() == pytest.approx(100.0, rel=0.02)
        assert right.mean() == pytest.approx(100.0, rel=0.02)
        assert np.mean(left > 200.0) == pytest.approx(math.exp(-2), abs=0.005)

    def test_scalar_pair(self):
        w, v = sample_los_extents(50.0, np.random.default_rng(14))
        assert isinstance(w, float) and isinstance(v, float)
        assert w >= 0 and v >= 0

    def test_zero_gamma(self):
        """gamma = 0 gives zero-length segments."""
        left, right = sample_los_extents(0.0, np.random.default_rng(15), size=10)
        assert np.all(left == 0) and np.all(right == 0)

    def test_negative_gamma(self):
        with pytest.raises(ValueError, match="gamma"):
            sample_los_extents(-1.0, np.random.default_rng(16))
