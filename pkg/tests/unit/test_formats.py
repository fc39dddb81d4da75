# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for the file codecs."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from core.domain import Correspondence, GnssFix, LidarReturns, PointCloud  # noqa: E402
from formats import (  # noqa: E402
    FormatError,
    atomic_write,
    dumps,
    read_correspondences,
    read_gnss,
    read_imu,
    read_json,
    read_pointcloud,
    read_returns,
    read_trajectory,
    write_correspondences,
    write_gnss,
    write_json,
    write_pointcloud,
    write_returns,
    write_trajectory,
)
from formats.binary import HEADER  # noqa: E402


@pytest.fixture
def cloud(rng):
    """Five points with provenance."""
    return PointCloud(
        xyz=rng.normal(size=(5, 3)) * 100.0,
        t=np.linspace(0.0, 1.0, 5),
        return_id=np.arange(5),
        line_id=np.array([1, 1, 2, 2, 2]),
        v=rng.normal(size=(5, 3)),
    )


class TestPointCloudFile:
    """Tests for the binary point-cloud layout."""

    def test_round_trip_keeps_provenance(self, tmp_path, cloud):
        """Every field survives exactly, scanner vectors included."""
        path = write_pointcloud(tmp_path / "cloud.bin", cloud)
        back = read_pointcloud(path)
        assert np.array_equal(back.xyz, cloud.xyz)
        assert np.array_equal(back.t, cloud.t)
        assert np.array_equal(back.return_id, cloud.return_id)
        assert np.array_equal(back.line_id, cloud.line_id)
        assert np.array_equal(back.v, cloud.v)

    def test_version_follows_provenance(self, tmp_path, cloud):
        """Clouds without scanner vectors are written as version 1."""
        path = write_pointcloud(tmp_path / "plain.bin", cloud.select(np.arange(5)))
        assert np.frombuffer(path.read_bytes()[: HEADER.itemsize], HEADER)[0]["version"] == 2
        plain = PointCloud(cloud.xyz, cloud.t, cloud.return_id, cloud.line_id)
        path = write_pointcloud(tmp_path / "plain.bin", plain)
        assert np.frombuffer(path.read_bytes()[: HEADER.itemsize], HEADER)[0]["version"] == 1
        assert read_pointcloud(path).v is None

    def test_truncated_file(self, tmp_path, cloud):
        """A body shorter than announced is rejected."""
        path = write_pointcloud(tmp_path / "cloud.bin", cloud)
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(FormatError, match="header announces 5 records"):
            read_pointcloud(path)

    def test_short_header(self, tmp_path):
        """Fewer bytes than a header."""
        path = tmp_path / "tiny.bin"
        path.write_bytes(b"KSP")
        with pytest.raises(FormatError):
            read_pointcloud(path)

    def test_magic_mismatch(self, tmp_path, cloud):
        """A raw-returns file is not a point cloud."""
        returns = LidarReturns(cloud.t, cloud.v, cloud.line_id, cloud.return_id)
        path = write_returns(tmp_path / "returns.bin", returns)
        with pytest.raises(FormatError, match="bad magic"):
            read_pointcloud(path)

    def test_nan_rejected_on_write(self, tmp_path, cloud):
        """Non-finite coordinates never reach disk."""
        cloud.xyz[2, 1] = np.nan
        with pytest.raises(FormatError, match="record 2"):
            write_pointcloud(tmp_path / "cloud.bin", cloud)
        assert not (tmp_path / "cloud.bin").exists()

    def test_returns_round_trip(self, tmp_path, cloud):
        """Raw returns keep their ids and vectors."""
        returns = LidarReturns(cloud.t, cloud.v, cloud.line_id, cloud.return_id)
        back = read_returns(write_returns(tmp_path / "returns.bin", returns))
        assert np.array_equal(back.v, returns.v)
        assert np.array_equal(back.return_id, returns.return_id)


class TestTextFiles:
    """Tests for the CSV codecs."""

    def test_trajectory_round_trip(self, tmp_path, trajectory):
        """Ten significant digits are kept."""
        back = read_trajectory(write_trajectory(tmp_path / "traj.csv", trajectory))
        assert np.allclose(back.t, trajectory.t, rtol=1e-9)
        assert np.allclose(back.positions, trajectory.positions, rtol=1e-9, atol=1e-9)
        assert np.allclose(back.quaternions, trajectory.quaternions, atol=1e-9)

    def test_wrong_header(self, tmp_path):
        """The exact header is required."""
        path = tmp_path / "imu.csv"
        path.write_text("t,gx,gy,gz,ax,ay,az\n0,0,0,0,0,0,9.8\n")
        with pytest.raises(FormatError, match="expected header"):
            read_imu(path)

    def test_field_count_names_line(self, tmp_path):
        """Short rows are reported with their line number."""
        path = tmp_path / "imu.csv"
        path.write_text("t,wx,wy,wz,fx,fy,fz\n0,0,0,0,0,0,9.8\n0.01,0,0\n")
        with pytest.raises(FormatError, match="line 3"):
            read_imu(path)

    def test_nan_names_line(self, tmp_path):
        """NaN fields are rejected."""
        path = tmp_path / "gnss.csv"
        path.write_text("t,x,y,z,sx,sy,sz\n0,1,2,nan,0.02,0.02,0.02\n")
        with pytest.raises(FormatError, match="line 2: non-finite"):
            read_gnss(path)

    def test_imu_timestamps_increase(self, tmp_path):
        """Repeated epochs are invalid."""
        path = tmp_path / "imu.csv"
        path.write_text("t,wx,wy,wz,fx,fy,fz\n0,0,0,0,0,0,9.8\n0,0,0,0,0,0,9.8\n")
        with pytest.raises(FormatError, match="increase"):
            read_imu(path)

    def test_gnss_round_trip(self, tmp_path):
        """Fixes keep per-axis sigmas."""
        fixes = [GnssFix(0.1, np.array([1.0, 2.0, 3.0]), np.array([0.02, 0.02, 0.05]))]
        back = read_gnss(write_gnss(tmp_path / "gnss.csv", fixes))
        assert back[0].t == 0.1
        assert np.array_equal(back[0].sigma, fixes[0].sigma)

    def test_correspondences_round_trip(self, tmp_path):
        """Shortest float text parses back to the same doubles."""
        pairs = [
            Correspondence(0.1, np.array([0.1, 0.2, -100.3]), 1, 9.7, np.ones(3) / 3.0, 2, 0.05)
        ]
        back = read_correspondences(write_correspondences(tmp_path / "c.csv", pairs))
        assert back[0].t_b == 9.7
        assert np.array_equal(back[0].v_b, pairs[0].v_b)
        assert (back[0].line_a, back[0].line_b) == (1, 2)

    def test_self_match_rejected(self, tmp_path):
        """Both sides at the same time is not a correspondence."""
        path = tmp_path / "c.csv"
        header = "t_a,vx_a,vy_a,vz_a,line_a,t_b,vx_b,vy_b,vz_b,line_b,sigma,desc_dist\n"
        path.write_text(header + "1,0,0,-1,1,1,0,0,-1,2,0.05,0\n")
        with pytest.raises(FormatError, match="line 2"):
            read_correspondences(path)


class TestReports:
    """Tests for JSON reports and atomic writes."""

    def test_sorted_and_indented(self, tmp_path):
        """Keys are sorted, numpy values become plain JSON."""
        text = dumps({"b": np.float64(0.1), "a": np.arange(2)})
        assert text == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": 0.1\n}\n'
        assert read_json(write_json(tmp_path / "r.json", {"x": 1})) == {"x": 1}

    def test_nan_not_serialised(self):
        """Reports never contain NaN."""
        with pytest.raises(ValueError):
            dumps({"x": float("nan")})

    def test_atomic_write_leaves_no_temporaries(self, tmp_path):
        """Only the target exists after a write."""
        atomic_write(tmp_path / "sub" / "out.txt", "hello")
        assert [p.name for p in (tmp_path / "sub").iterdir()] == ["out.txt"]
