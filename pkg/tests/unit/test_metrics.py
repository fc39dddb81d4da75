# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for the error metrics."""

import sys
from pathlib import Path

import numpy as np
import pytest
from conftest import straight_trajectory

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from core.domain import Correspondence, PointCloud, Trajectory  # noqa: E402
from evaluation import (  # noqa: E402
    EvaluationError,
    Histogram,
    correspondence_errors,
    downsample,
    inlier_ratio_at,
    pointcloud_errors,
    trajectory_errors,
)
from evaluation.cases import retention_subsets  # noqa: E402
from geometry import Rotation, so3  # noqa: E402
from network.graph import cap_correspondences  # noqa: E402


def _shifted(trajectory: Trajectory, offset=(0.0, 0.0, 0.0), yaw=0.0) -> Trajectory:
    turn = np.broadcast_to(so3.euler_to_quat(0.0, 0.0, yaw), trajectory.quaternions.shape)
    return Trajectory(
        trajectory.t,
        so3.quat_multiply(trajectory.quaternions, turn),
        trajectory.positions + np.asarray(offset),
    )


def _pair(truth: Trajectory, ground: np.ndarray, t_a: float, t_b: float) -> Correspondence:
    """Scanner vectors of one ground point seen at two epochs, identity mounting."""
    (qa, qb), (pa, pb) = truth.interpolate(np.array([t_a, t_b]))
    v_a = so3.quat_rotate(so3.quat_conjugate(qa), ground - pa)
    v_b = so3.quat_rotate(so3.quat_conjugate(qb), ground - pb)
    return Correspondence(t_a, v_a, 1, t_b, v_b, 2, 0.05)


class TestTrajectoryErrors:
    """Tests for trajectory RMSE."""

    def test_identical_is_zero(self, trajectory):
        """A trajectory has no error against itself."""
        report = trajectory_errors(trajectory, trajectory)
        assert report.epochs == len(trajectory)
        assert report.rmse_east == report.rmse_north == report.rmse_up == 0.0
        assert report.rmse_yaw == pytest.approx(0.0, abs=1e-9)

    def test_constant_offset(self, trajectory):
        """A constant ENU offset shows up per axis."""
        report = trajectory_errors(_shifted(trajectory, (1.0, 2.0, 3.0)), trajectory)
        assert report.rmse_east == pytest.approx(1.0)
        assert report.rmse_north == pytest.approx(2.0)
        assert report.rmse_up == pytest.approx(3.0)
        assert report.norm_mean == pytest.approx(np.sqrt(14.0))
        assert report.norm_std == pytest.approx(0.0, abs=1e-9)

    def test_small_yaw_error(self, trajectory):
        """A 0.1 deg heading error is reported on yaw only."""
        report = trajectory_errors(_shifted(trajectory, yaw=0.1), trajectory)
        assert report.rmse_yaw == pytest.approx(0.1, abs=1e-9)
        assert report.rmse_roll == pytest.approx(0.0, abs=1e-9)
        assert report.rmse_pitch == pytest.approx(0.0, abs=1e-9)

    def test_window(self, trajectory):
        """Only epochs inside the window count."""
        report = trajectory_errors(trajectory, trajectory, window=(2.0, 3.0))
        assert report.epochs == 101

    def test_disjoint_spans(self, trajectory):
        """Estimates outside the reference span cannot be scored."""
        late = Trajectory(trajectory.t + 100.0, trajectory.quaternions, trajectory.positions)
        with pytest.raises(EvaluationError):
            trajectory_errors(late, trajectory)


class TestPointCloudErrors:
    """Tests for per-point georeferencing differences."""

    @pytest.fixture
    def cloud(self, rng):
        """Ten points with distinct return ids."""
        return PointCloud(rng.normal(size=(10, 3)), np.arange(10.0), np.arange(10), np.ones(10))

    def test_matches_by_return_id(self, cloud):
        """Order does not matter, only ids."""
        shuffled = cloud.select(np.arange(10)[::-1])
        report = pointcloud_errors(shuffled, cloud)
        assert report.norm_rmse == 0.0
        assert sum(report.histogram.counts) == 10

    def test_vertical_shift(self, cloud):
        """A 10 cm lift is an Up error."""
        lifted = PointCloud(cloud.xyz + [0.0, 0.0, 0.1], cloud.t, cloud.return_id, cloud.line_id)
        report = pointcloud_errors(lifted, cloud)
        assert report.rmse_up == pytest.approx(0.1)
        assert report.rmse_east == pytest.approx(0.0)
        assert report.norm_mean == pytest.approx(0.1)

    def test_different_ids(self, cloud):
        """Clouds of different returns are not comparable."""
        other = PointCloud(cloud.xyz, cloud.t, cloud.return_id + 100, cloud.line_id)
        with pytest.raises(EvaluationError):
            pointcloud_errors(other, cloud)
        with pytest.raises(EvaluationError):
            pointcloud_errors(cloud.select(np.arange(5)), cloud)


class TestCorrespondenceErrors:
    """Tests for true separations of matched returns."""

    def test_true_matches_have_zero_separation(self):
        """Returns of one point trace back to the same place."""
        truth = straight_trajectory()
        pairs = [_pair(truth, np.array([x, 50.0, 0.0]), 1.0, 8.0) for x in (-20.0, 0.0, 20.0)]
        report = correspondence_errors(pairs, truth, Rotation.identity(), np.zeros(3))
        assert report.count == 3
        assert report.mean == pytest.approx(0.0, abs=1e-9)

    def test_inlier_ratio(self):
        """A pair displaced by a metre fails a half-metre threshold."""
        truth = straight_trajectory()
        good = _pair(truth, np.array([0.0, 40.0, 0.0]), 2.0, 6.0)
        bad = _pair(truth, np.array([0.0, 40.0, 0.0]), 2.0, 6.0)
        bad = Correspondence(
            bad.t_a, bad.v_a, 1, bad.t_b, bad.v_b + [1.0, 0.0, 0.0], 2, bad.sigma
        )
        assert inlier_ratio_at([good, bad], truth, 0.5) == pytest.approx(0.5)
        assert inlier_ratio_at([], truth, 0.5) == 0.0

    def test_empty_set(self):
        """No correspondences, no report."""
        with pytest.raises(EvaluationError):
            correspondence_errors([], straight_trajectory(), Rotation.identity(), np.zeros(3))


class TestDownsample:
    """Tests for correspondence down-sampling."""

    @pytest.fixture
    def pairs(self):
        """Ten distinct correspondences."""
        v = np.array([0.0, 0.0, -100.0])
        return [Correspondence(float(k), v, 1, k + 0.5, v, 2, 0.05) for k in range(10)]

    def test_fraction_one_keeps_all(self, pairs):
        """Nothing is dropped at 100 %."""
        assert [c.t_a for c in downsample(pairs, 1.0, seed=0)] == [c.t_a for c in pairs]

    def test_subset_is_seeded_and_ordered(self, pairs):
        """Half the set, in original order, identical for equal seeds."""
        one = downsample(pairs, 0.5, seed=3)
        assert len(one) == 5
        assert [c.t_a for c in one] == sorted(c.t_a for c in one)
        assert [c.t_a for c in downsample(pairs, 0.5, seed=3)] == [c.t_a for c in one]

    def test_invalid_fraction(self, pairs):
        """Fractions outside (0, 1] are rejected."""
        with pytest.raises(ValueError):
            downsample(pairs, 0.0, seed=0)
        with pytest.raises(ValueError):
            downsample(pairs, 1.5, seed=0)

    def test_empty_subset(self, pairs):
        """A fraction rounding to zero correspondences is an error."""
        with pytest.raises(EvaluationError):
            downsample(pairs, 0.01, seed=0)


class TestRetentionSubsets:
    """Tests for the thinned correspondence sets of the down-sampling case."""

    @staticmethod
    def _pairs(count):
        v = np.array([0.0, 0.0, -100.0])
        return [Correspondence(float(k), v, 1, k + 0.5, v, 2, 0.05) for k in range(count)]

    def test_fractions_of_capped_base(self):
        """Sizes follow the fractions of the capped set, not a second cap."""
        pairs = self._pairs(10_000)
        fractions = [1.0, 0.5, 0.25, 0.05, 0.01, 0.005, 0.001]
        subsets = retention_subsets(pairs, fractions, limit=4000, seed=2)
        assert [f for f, _ in subsets] == fractions
        assert [len(s) for _, s in subsets] == [4000, 2000, 1000, 200, 40, 20, 4]
        base = [c.t_a for c in cap_correspondences(pairs, 4000, 2)]
        assert [c.t_a for c in subsets[0][1]] == base
        for _, subset in subsets[1:]:
            assert {c.t_a for c in subset} <= set(base)

    def test_sizes_fall_strictly(self):
        """Empty and non-shrinking fractions are skipped."""
        subsets = retention_subsets(self._pairs(10), [0.5, 0.48, 0.01], limit=None, seed=0)
        assert [(f, len(s)) for f, s in subsets] == [(1.0, 10), (0.5, 5)]

    def test_uncapped_base_keeps_everything(self):
        """Without a limit the full-retention set is the input."""
        pairs = self._pairs(300)
        ((fraction, base),) = retention_subsets(pairs, [1.0], limit=None, seed=0)
        assert fraction == 1.0
        assert [c.t_a for c in base] == [c.t_a for c in pairs]


class TestHistogram:
    """Tests for error histograms."""

    def test_counts_cover_values(self):
        """Every value falls in a bin between zero and the maximum."""
        histogram = Histogram.of(np.array([0.0, 0.5, 1.0, 1.0]), bins=4)
        assert histogram.edges[0] == 0.0
        assert histogram.edges[-1] == 1.0
        assert histogram.counts == [1, 0, 1, 2]
