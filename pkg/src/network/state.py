#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Navigation state time series used for warm starts and exported solutions."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.domain import Trajectory, TrajectorySpanError
from geometry.transform import interpolate_poses

VELOCITY_HALF_WINDOW = 0.5


@dataclass
class NavigationState:
    """Poses, velocities and IMU biases at increasing epochs."""

    t: np.ndarray
    quaternions: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    gyro_bias: np.ndarray
    accel_bias: np.ndarray

    def __len__(self) -> int:
        """Number of epochs."""
        return len(self.t)

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory) -> "NavigationState":
        """Wrap a trajectory, differencing positions when it has no velocities."""
        velocities = trajectory.velocities
        if velocities is None:
            velocities = central_velocity(trajectory.t, trajectory.positions, trajectory.t)
        zeros = np.zeros((len(trajectory), 3))
        return cls(
            trajectory.t.copy(),
            trajectory.quaternions.copy(),
            trajectory.positions.copy(),
            np.asarray(velocities, dtype=float).copy(),
            zeros.copy(),
            zeros.copy(),
        )

    def trajectory(self) -> Trajectory:
        """Poses and velocities as a trajectory."""
        return Trajectory(self.t, self.quaternions, self.positions, velocities=self.velocities)

    def at(self, times: np.ndarray) -> "NavigationState":
        """State at other epochs: geodesic poses, linear velocities and biases.

        Raises:
            TrajectorySpanError: a time lies outside the state span.
        """
        times = np.asarray(times, dtype=float)
        if times.size and (times.min() < self.t[0] or times.max() > self.t[-1]):
            raise TrajectorySpanError(
                f"Times [{times.min()}, {times.max()}] outside [{self.t[0]}, {self.t[-1]}]"
            )
        if len(self.t) == 1:
            quats = np.repeat(self.quaternions, len(times), axis=0)
            positions = np.repeat(self.positions, len(times), axis=0)
        else:
            quats, positions = interpolate_poses(self.t, self.quaternions, self.positions, times)

        def linear(values: np.ndarray) -> np.ndarray:
            return np.column_stack([np.interp(times, self.t, values[:, k]) for k in range(3)])

        return NavigationState(
            times,
            quats,
            positions,
            linear(self.velocities),
            linear(self.gyro_bias),
            linear(self.accel_bias),
        )


def central_velocity(
    t: np.ndarray, positions: np.ndarray, query: np.ndarray, half: Optional[float] = None
) -> np.ndarray:
    """Velocity as the slope of linearly interpolated positions over +-half seconds."""
    half = VELOCITY_HALF_WINDOW if half is None else half
    lo = np.clip(query - half, t[0], t[-1])
    hi = np.clip(query + half, t[0], t[-1])
    span = np.where(hi > lo, hi - lo, 1.0)
    ends = [
        np.column_stack([np.interp(x, t, positions[:, k]) for k in range(3)]) for x in (lo, hi)
    ]
    return (ends[1] - ends[0]) / span[:, None]
