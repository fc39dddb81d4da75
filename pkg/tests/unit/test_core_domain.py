# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for domain records."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from core.domain import (  # noqa: E402
    Correspondence,
    ImuMeasurements,
    LidarReturns,
    PointCloud,
    ProvenanceError,
    Trajectory,
    TrajectorySpanError,
)


class TestTrajectory:
    """Tests for Trajectory."""

    def test_timestamps_must_increase(self, trajectory):
        """Repeated epochs are rejected."""
        t = trajectory.t.copy()
        t[5] = t[4]
        with pytest.raises(ValueError):
            Trajectory(t, trajectory.quaternions, trajectory.positions)

    def test_column_lengths(self, trajectory):
        """Every column has one row per epoch."""
        with pytest.raises(ValueError):
            Trajectory(trajectory.t, trajectory.quaternions[:-1], trajectory.positions)

    def test_interpolation_outside_span(self, trajectory):
        """Queries beyond the ends raise instead of extrapolating."""
        with pytest.raises(TrajectorySpanError):
            trajectory.interpolate(np.array([10.5]))

    def test_resample_midpoint(self, trajectory):
        """Straight flight interpolates linearly."""
        sub = trajectory.resample(np.array([0.005, 5.0]))
        assert np.allclose(sub.positions[0], [0.0, 0.05, 100.0])
        assert np.allclose(sub.euler()[1], [0.0, 0.0, 90.0])

    def test_pose_round_trip(self, trajectory):
        """Timed poses rebuild the same trajectory."""
        again = Trajectory.from_poses(trajectory.poses()[:10])
        assert np.allclose(again.positions, trajectory.positions[:10])


class TestPointCloud:
    """Tests for point clouds and their provenance."""

    @pytest.fixture
    def cloud(self):
        """Four points over two lines."""
        return PointCloud(
            xyz=np.arange(12.0).reshape(4, 3),
            t=np.array([0.0, 0.1, 5.0, 5.1]),
            return_id=np.array([10, 11, 12, 13]),
            line_id=np.array([1, 1, 2, 2]),
            v=-np.ones((4, 3)),
        )

    def test_trace_to_return(self, cloud):
        """Every point leads back to its pulse."""
        t, v = cloud.trace_to_return(2)
        assert t == 5.0
        assert np.array_equal(v, [-1.0, -1.0, -1.0])
        with pytest.raises(IndexError):
            cloud.trace_to_return(4)

    def test_missing_provenance(self, cloud):
        """Without scanner vectors nothing can be traced."""
        plain = PointCloud(cloud.xyz, cloud.t, cloud.return_id, cloud.line_id)
        assert not plain.has_provenance
        with pytest.raises(ProvenanceError):
            plain.trace_to_return(0)
        with pytest.raises(ProvenanceError):
            plain.returns()

    def test_for_line(self, cloud):
        """Selecting a line keeps its ids."""
        assert cloud.for_line(2).return_id.tolist() == [12, 13]
        assert cloud.returns().for_line(1).return_id.tolist() == [10, 11]

    def test_concatenate_returns(self):
        """Stores join in order; no parts gives an empty store."""
        one = LidarReturns([0.0], [[0.0, 0.0, -1.0]], [1], [0])
        two = LidarReturns([1.0], [[0.0, 0.0, -2.0]], [2], [1])
        joined = LidarReturns.concatenate([one, two])
        assert joined.line_id.tolist() == [1, 2]
        assert len(LidarReturns.concatenate([])) == 0


class TestMeasurements:
    """Tests for correspondences and IMU streams."""

    def test_self_match_rejected(self):
        """A pulse does not correspond with itself."""
        v = np.zeros(3)
        with pytest.raises(ValueError):
            Correspondence(1.0, v, 1, 1.0, v, 1, 0.05)

    def test_sigma_positive(self):
        """L-edge weights need a positive sigma."""
        v = np.zeros(3)
        with pytest.raises(ValueError):
            Correspondence(1.0, v, 1, 2.0, v, 1, 0.0)
        assert Correspondence(1.0, v, 1, 2.0, v, 1, 0.1).with_sigma(0.3).sigma == 0.3

    def test_imu_rate_and_segment(self):
        """Rate is the mean sample rate; segments include both ends."""
        t = np.arange(201) / 200.0
        imu = ImuMeasurements(t, np.zeros((201, 3)), np.zeros((201, 3)))
        assert imu.rate == pytest.approx(200.0)
        part = imu.segment(10, 20)
        assert len(part) == 11
        assert part.t[0] == t[10]
