#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""CSV codecs for trajectories, IMU and GNSS streams, correspondences and error tables."""

import csv
import io
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from core.domain import Correspondence, GnssFix, ImuMeasurements, PointCloud, Trajectory
from formats.base import FormatError, PathLike, atomic_write, check_finite, shortest, significant

TRAJECTORY_HEADER = ("t", "x", "y", "z", "qw", "qx", "qy", "qz")
IMU_HEADER = ("t", "wx", "wy", "wz", "fx", "fy", "fz")
GNSS_HEADER = ("t", "x", "y", "z", "sx", "sy", "sz")
CORRESPONDENCE_HEADER = (
    "t_a",
    "vx_a",
    "vy_a",
    "vz_a",
    "line_a",
    "t_b",
    "vx_b",
    "vy_b",
    "vz_b",
    "line_b",
    "sigma",
    "desc_dist",
)
POINTCLOUD_HEADER = ("x", "y", "z", "t", "return_id", "line_id")
HISTOGRAM_HEADER = ("lower", "upper", "count")
ERROR_SERIES_HEADER = ("t", "east", "north", "up", "roll", "pitch", "yaw")


def _write_table(
    path: PathLike,
    header: tuple[str, ...],
    rows: Iterable[Iterable[float]],
    fmt: Callable[[float], str] = shortest,
) -> Path:
    buffer = io.StringIO()
    buffer.write(",".join(header) + "\n")
    for row in rows:
        buffer.write(",".join(fmt(value) for value in row) + "\n")
    return atomic_write(path, buffer.getvalue())


def _read_table(path: PathLike, header: tuple[str, ...]) -> np.ndarray:
    """Float table of a CSV file with an exact header line.

    Raises:
        FormatError: wrong header, wrong field count or unparsable and non-finite values,
            naming the offending line.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        first = next(reader, None)
        if first is None or tuple(field.strip() for field in first) != header:
            raise FormatError(f"{path}: expected header {','.join(header)}")
        rows = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(
                    f"{path}, line {line}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                values = [float(field) for field in row]
            except ValueError as e:
                raise FormatError(f"{path}, line {line}: {e}") from e
            if not all(np.isfinite(values)):
                raise FormatError(f"{path}, line {line}: non-finite value")
            rows.append(values)
    return np.array(rows, dtype=float).reshape(-1, len(header))


def write_trajectory(path: PathLike, trajectory: Trajectory) -> Path:
    """Write poses with 10 significant digits."""
    check_finite(f"{path}: positions", trajectory.positions)
    rows = np.column_stack([trajectory.t, trajectory.positions, trajectory.quaternions])
    return _write_table(path, TRAJECTORY_HEADER, rows, significant)


def read_trajectory(path: PathLike) -> Trajectory:
    """Read a trajectory file.

    Raises:
        FormatError: malformed rows or non-increasing timestamps.
    """
    table = _read_table(path, TRAJECTORY_HEADER)
    if len(table) == 0:
        raise FormatError(f"{path}: no poses")
    try:
        return Trajectory(table[:, 0], table[:, 4:8], table[:, 1:4])
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def write_imu(path: PathLike, imu: ImuMeasurements) -> Path:
    """Write an IMU stream."""
    return _write_table(path, IMU_HEADER, np.column_stack([imu.t, imu.gyro, imu.accel]))


def read_imu(path: PathLike) -> ImuMeasurements:
    """Read an IMU stream.

    Raises:
        FormatError: malformed rows or non-increasing timestamps.
    """
    table = _read_table(path, IMU_HEADER)
    if len(table) > 1 and np.any(np.diff(table[:, 0]) <= 0.0):
        raise FormatError(f"{path}: IMU timestamps must increase")
    return ImuMeasurements(table[:, 0], table[:, 1:4], table[:, 4:7])


def write_gnss(path: PathLike, fixes: list[GnssFix]) -> Path:
    """Write GNSS fixes."""
    rows = [(f.t, *f.position, *np.broadcast_to(f.sigma, (3,))) for f in fixes]
    return _write_table(path, GNSS_HEADER, rows)


def read_gnss(path: PathLike) -> list[GnssFix]:
    """Read GNSS fixes."""
    table = _read_table(path, GNSS_HEADER)
    return [GnssFix(float(row[0]), row[1:4].copy(), row[4:7].copy()) for row in table]


def write_correspondences(path: PathLike, correspondences: list[Correspondence]) -> Path:
    """Write matched return pairs."""
    rows = [
        (c.t_a, *c.v_a, c.line_a, c.t_b, *c.v_b, c.line_b, c.sigma, c.desc_dist)
        for c in correspondences
    ]

    def fmt(value) -> str:
        return str(value) if isinstance(value, (int, np.integer)) else shortest(value)

    return _write_table(path, CORRESPONDENCE_HEADER, rows, fmt)


def read_correspondences(path: PathLike) -> list[Correspondence]:
    """Read matched return pairs.

    Raises:
        FormatError: malformed rows, self matches or non-positive sigma.
    """
    table = _read_table(path, CORRESPONDENCE_HEADER)
    out = []
    for k, row in enumerate(table):
        try:
            out.append(
                Correspondence(
                    float(row[0]),
                    row[1:4].copy(),
                    int(row[4]),
                    float(row[5]),
                    row[6:9].copy(),
                    int(row[9]),
                    float(row[10]),
                    float(row[11]),
                )
            )
        except ValueError as e:
            raise FormatError(f"{path}, line {k + 2}: {e}") from e
    return out


def write_pointcloud_csv(path: PathLike, cloud: PointCloud) -> Path:
    """Write the human-readable variant of a point cloud (no provenance)."""
    buffer = io.StringIO()
    buffer.write(",".join(POINTCLOUD_HEADER) + "\n")
    for xyz, t, rid, lid in zip(cloud.xyz, cloud.t, cloud.return_id, cloud.line_id):
        buffer.write(f"{shortest(xyz[0])},{shortest(xyz[1])},{shortest(xyz[2])},")
        buffer.write(f"{shortest(t)},{int(rid)},{int(lid)}\n")
    return atomic_write(path, buffer.getvalue())


def read_pointcloud_csv(path: PathLike) -> PointCloud:
    """Read the human-readable variant of a point cloud."""
    table = _read_table(path, POINTCLOUD_HEADER)
    return PointCloud(
        table[:, 0:3], table[:, 3], table[:, 4].astype(np.uint64), table[:, 5].astype(np.uint32)
    )


def write_histogram(path: PathLike, edges: np.ndarray, counts: np.ndarray) -> Path:
    """Write histogram bins as lower edge, upper edge and count."""
    rows = [(lo, hi, int(n)) for lo, hi, n in zip(edges[:-1], edges[1:], counts)]

    def fmt(value) -> str:
        return str(value) if isinstance(value, int) else shortest(value)

    return _write_table(path, HISTOGRAM_HEADER, rows, fmt)


def write_error_series(
    path: PathLike, t: np.ndarray, position: np.ndarray, attitude: np.ndarray
) -> Path:
    """Write per-epoch ENU (m) and roll/pitch/yaw (deg) errors."""
    return _write_table(path, ERROR_SERIES_HEADER, np.column_stack([t, position, attitude]))


def read_error_series(path: PathLike) -> np.ndarray:
    """Read an error time series as an (N, 7) table."""
    return _read_table(path, ERROR_SERIES_HEADER)
