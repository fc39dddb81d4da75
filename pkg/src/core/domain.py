#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Domain records shared by the simulator, the correspondence pipeline and the network."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from geometry import RigidTransform, Rotation, TimedPose
from geometry import so3
from geometry.transform import interpolate_poses


class ProvenanceError(ValueError):
    """A point cannot be traced back to its LiDAR pulse."""


class TrajectorySpanError(ValueError):
    """A time lies outside the trajectory span."""


@dataclass
class Trajectory:
    """Time-ordered body-to-navigation poses, stored column-wise.

    Velocities and kinematic derivatives are optional; the simulator fills them, estimated
    trajectories usually only carry poses.
    """

    t: np.ndarray
    quaternions: np.ndarray
    positions: np.ndarray
    velocities: Optional[np.ndarray] = None
    angular_rates: Optional[np.ndarray] = None
    accelerations: Optional[np.ndarray] = None
    line_windows: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.quaternions = so3.quat_normalize(np.asarray(self.quaternions, dtype=float))
        self.positions = np.asarray(self.positions, dtype=float)
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0.0):
            raise ValueError("Trajectory timestamps must be strictly increasing")
        if self.quaternions.shape != (len(self.t), 4) or self.positions.shape != (
            len(self.t),
            3,
        ):
            raise ValueError("Trajectory columns have inconsistent lengths")

    def __len__(self) -> int:
        """Number of poses."""
        return len(self.t)

    @classmethod
    def from_poses(cls, poses: list[TimedPose]) -> "Trajectory":
        """Build from a list of timed poses."""
        return cls(
            t=np.array([p.t for p in poses]),
            quaternions=np.array([p.pose.rotation.quaternion for p in poses]),
            positions=np.array([p.pose.translation for p in poses]),
        )

    @property
    def span(self) -> tuple[float, float]:
        """First and last timestamps."""
        return float(self.t[0]), float(self.t[-1])

    def pose(self, index: int) -> TimedPose:
        """Return one timed pose."""
        return TimedPose(
            float(self.t[index]),
            RigidTransform(Rotation(self.quaternions[index]), self.positions[index]),
        )

    def poses(self) -> list[TimedPose]:
        """Return all poses as TimedPose objects."""
        return [self.pose(i) for i in range(len(self))]

    def interpolate(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Quaternions and positions on the piecewise geodesic at the given times.

        Raises:
            TrajectorySpanError: a time falls outside the span.
        """
        times = np.asarray(times, dtype=float)
        start, end = self.span
        if times.size and (times.min() < start or times.max() > end):
            raise TrajectorySpanError(
                f"Times [{times.min()}, {times.max()}] outside trajectory [{start}, {end}]"
            )
        return interpolate_poses(self.t, self.quaternions, self.positions, times)

    def resample(self, times: np.ndarray) -> "Trajectory":
        """Return the trajectory evaluated at new epochs."""
        q, p = self.interpolate(times)
        return Trajectory(t=np.asarray(times, float), quaternions=q, positions=p)

    def euler(self) -> np.ndarray:
        """Roll, pitch, yaw in degrees, (N, 3)."""
        return so3.quat_to_euler(self.quaternions)


@dataclass(frozen=True)
class LidarReturn:
    """One pulse: time, scanner-frame vector and flight line."""

    t: float
    v: np.ndarray
    line_id: int


@dataclass
class LidarReturns:
    """Column store of LiDAR returns; return ids are unique pulse indices."""

    t: np.ndarray
    v: np.ndarray
    line_id: np.ndarray
    return_id: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.v = np.asarray(self.v, dtype=float).reshape(-1, 3)
        self.line_id = np.asarray(self.line_id, dtype=np.uint32)
        self.return_id = np.asarray(self.return_id, dtype=np.uint64)

    def __len__(self) -> int:
        """Number of returns."""
        return len(self.t)

    def __getitem__(self, index: int) -> LidarReturn:
        """Return one pulse record."""
        return LidarReturn(float(self.t[index]), self.v[index].copy(), int(self.line_id[index]))

    def select(self, mask: np.ndarray) -> "LidarReturns":
        """Subset by boolean mask or index array."""
        return LidarReturns(
            self.t[mask], self.v[mask], self.line_id[mask], self.return_id[mask]
        )

    def for_line(self, line_id: int) -> "LidarReturns":
        """Returns of one flight line."""
        return self.select(self.line_id == line_id)

    @classmethod
    def empty(cls) -> "LidarReturns":
        """An empty store."""
        return cls(np.zeros(0), np.zeros((0, 3)), np.zeros(0), np.zeros(0))

    @classmethod
    def concatenate(cls, parts: list["LidarReturns"]) -> "LidarReturns":
        """Join stores in order."""
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.t for p in parts]),
            np.concatenate([p.v for p in parts]),
            np.concatenate([p.line_id for p in parts]),
            np.concatenate([p.return_id for p in parts]),
        )


@dataclass
class PointCloud:
    """Georeferenced points; each keeps its source return id and, when known, (t, v^L)."""

    xyz: np.ndarray
    t: np.ndarray
    return_id: np.ndarray
    line_id: np.ndarray
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        self.xyz = np.asarray(self.xyz, dtype=float).reshape(-1, 3)
        self.t = np.asarray(self.t, dtype=float)
        self.return_id = np.asarray(self.return_id, dtype=np.uint64)
        self.line_id = np.asarray(self.line_id, dtype=np.uint32)
        if self.v is not None:
            self.v = np.asarray(self.v, dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        """Number of points."""
        return len(self.xyz)

    @property
    def has_provenance(self) -> bool:
        """True when scanner vectors are retained."""
        return self.v is not None

    def select(self, mask: np.ndarray) -> "PointCloud":
        """Subset by boolean mask or index array."""
        return PointCloud(
            self.xyz[mask],
            self.t[mask],
            self.return_id[mask],
            self.line_id[mask],
            None if self.v is None else self.v[mask],
        )

    def for_line(self, line_id: int) -> "PointCloud":
        """Points of one flight line."""
        return self.select(self.line_id == line_id)

    def trace_to_return(self, index: int) -> tuple[float, np.ndarray]:
        """Return (t, v^L) of the pulse that produced a point.

        Raises:
            ProvenanceError: the cloud was stored without scanner vectors.
        """
        if self.v is None:
            raise ProvenanceError("Point cloud carries no scanner-frame provenance")
        if not 0 <= index < len(self):
            raise IndexError(f"Point index {index} out of range")
        return float(self.t[index]), self.v[index].copy()

    def returns(self) -> LidarReturns:
        """Recover the raw returns behind this cloud.

        Raises:
            ProvenanceError: the cloud was stored without scanner vectors.
        """
        if self.v is None:
            raise ProvenanceError("Point cloud carries no scanner-frame provenance")
        return LidarReturns(self.t, self.v, self.line_id, self.return_id)


@dataclass(frozen=True)
class Correspondence:
    """Two returns matched as the same physical point, with the L-edge weight sigma."""

    t_a: float
    v_a: np.ndarray
    line_a: int
    t_b: float
    v_b: np.ndarray
    line_b: int
    sigma: float
    desc_dist: float = 0.0
    return_id_a: Optional[int] = None
    return_id_b: Optional[int] = None

    def __post_init__(self):
        if self.t_a == self.t_b:
            raise ValueError("Corresponding returns must come from different pulses")
        if not self.sigma > 0.0:
            raise ValueError(f"Correspondence sigma must be positive, got {self.sigma}")

    def with_sigma(self, sigma: float) -> "Correspondence":
        """Copy with a per-correspondence sigma override."""
        return Correspondence(
            self.t_a,
            self.v_a,
            self.line_a,
            self.t_b,
            self.v_b,
            self.line_b,
            sigma,
            self.desc_dist,
            self.return_id_a,
            self.return_id_b,
        )


@dataclass
class ImuMeasurements:
    """Angular rate (rad/s) and specific force (m/s^2) in the body frame."""

    t: np.ndarray
    gyro: np.ndarray
    accel: np.ndarray
    gyro_bias: Optional[np.ndarray] = None
    accel_bias: Optional[np.ndarray] = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.gyro = np.asarray(self.gyro, dtype=float).reshape(-1, 3)
        self.accel = np.asarray(self.accel, dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        """Number of samples."""
        return len(self.t)

    @property
    def rate(self) -> float:
        """Mean sample rate in Hz."""
        return float((len(self.t) - 1) / (self.t[-1] - self.t[0]))

    def segment(self, start: int, stop: int) -> "ImuMeasurements":
        """Samples start..stop inclusive."""
        return ImuMeasurements(
            self.t[start : stop + 1], self.gyro[start : stop + 1], self.accel[start : stop + 1]
        )


@dataclass(frozen=True)
class GnssFix:
    """A GNSS position fix in the navigation frame with per-axis sigma."""

    t: float
    position: np.ndarray
    sigma: np.ndarray
