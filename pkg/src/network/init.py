#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Initial navigation state from GNSS-aligned dead reckoning."""

import logging
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from constants import GRAVITY_VECTOR
from core.domain import GnssFix, ImuMeasurements
from geometry import so3
from network.state import NavigationState, central_velocity

logger = logging.getLogger(__name__)

ALIGN_WINDOW = 2.0
EXCITATION_RATIO = 1e-4
LEVELING_SECONDS = 1.0
MIN_TRACK_SPEED = 1.0


class InitializationError(ValueError):
    """Not enough information to start the solver."""


def integrate_attitude(imu: ImuMeasurements) -> np.ndarray:
    """Gyro-only attitude relative to the first sample, midpoint rule, (N, 3, 3)."""
    dt = np.diff(imu.t)
    steps = so3.exp_matrix(0.5 * (imu.gyro[:-1] + imu.gyro[1:]) * dt[:, None])
    out = np.empty((len(imu), 3, 3))
    out[0] = np.eye(3)
    for k, step in enumerate(steps):
        out[k + 1] = out[k] @ step
    return out


def wahba(body: np.ndarray, nav: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotation R minimizing sum ||nav - R body||^2 and the singular values of the fit."""
    h = body.T @ nav
    u, s, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T)) or 1.0
    return vt.T @ np.diag([1.0, 1.0, d]) @ u.T, s


def _fix_arrays(gnss: list[GnssFix]) -> tuple[np.ndarray, np.ndarray]:
    fixes = sorted(gnss, key=lambda f: f.t)
    return np.array([f.t for f in fixes]), np.array([f.position for f in fixes]).reshape(-1, 3)


def _leveled(imu: ImuMeasurements, times: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    """Start attitude from mean specific force plus GNSS track heading."""
    early = imu.t <= imu.t[0] + LEVELING_SECONDS
    f = imu.accel[early].mean(axis=0)
    roll = math.degrees(math.atan2(f[1], f[2]))
    pitch = math.degrees(math.atan2(-f[0], math.hypot(f[1], f[2])))
    v0 = velocity[np.argmin(np.abs(times - imu.t[0]))]
    yaw = 0.0
    if np.hypot(v0[0], v0[1]) > MIN_TRACK_SPEED:
        yaw = math.degrees(math.atan2(v0[1], v0[0]))
    return so3.quat_to_matrix(so3.euler_to_quat(roll, pitch, yaw))


def initial_state(
    imu: ImuMeasurements, gnss: list[GnssFix], times: np.ndarray
) -> NavigationState:
    """Dead-reckoned attitude aligned to GNSS, GNSS-interpolated positions, zero biases.

    The start attitude comes from a Wahba fit between gyro-rotated specific force and
    GNSS-derived velocity changes over short windows. When the fit lacks horizontal
    excitation, accelerometer levelling and the GNSS track heading are used instead.

    Args:
        imu: full inertial stream.
        gnss: position fixes (at least two).
        times: keyframe epochs, a subset of the IMU epochs.

    Raises:
        InitializationError: fewer than two GNSS fixes.
    """
    if len(gnss) < 2:
        raise InitializationError("Initialization needs two GNSS fixes or a warm start")
    fix_t, fix_p = _fix_arrays(gnss)
    path = PchipInterpolator(fix_t, fix_p, axis=0, extrapolate=True)
    fine_t = np.arange(fix_t[0], fix_t[-1], 0.05)
    fine_t = np.append(fine_t, fix_t[-1]) if fine_t[-1] < fix_t[-1] else fine_t
    fine_p = path(fine_t)

    relative = integrate_attitude(imu)
    force = np.einsum("nij,nj->ni", relative, imu.accel)
    dt = np.diff(imu.t)
    steps = 0.5 * (force[:-1] + force[1:]) * dt[:, None]
    cumulative = np.vstack([np.zeros(3), np.cumsum(steps, axis=0)])

    gravity = np.asarray(GRAVITY_VECTOR)
    marks = np.arange(imu.t[0], imu.t[-1], ALIGN_WINDOW)
    supported = np.min(np.abs(marks[:, None] - fix_t[None, :]), axis=1) <= ALIGN_WINDOW / 4
    idx = np.searchsorted(imu.t, marks)
    vel_marks = central_velocity(fine_t, fine_p, imu.t[idx])
    body_rows, nav_rows = [], []
    for a in range(len(idx) - 1):
        b = a + 1
        if not (supported[a] and supported[b]):
            continue
        span = imu.t[idx[b]] - imu.t[idx[a]]
        body_rows.append(cumulative[idx[b]] - cumulative[idx[a]])
        nav_rows.append(vel_marks[b] - vel_marks[a] - gravity * span)

    start = None
    if len(body_rows) >= 2:
        rotation, s = wahba(np.array(body_rows), np.array(nav_rows))
        if s[1] > EXCITATION_RATIO * s[0]:
            start = rotation
    if start is None:
        logger.warning("Weak horizontal excitation, initializing by levelling and track heading")
        start = _leveled(imu, fine_t, central_velocity(fine_t, fine_p, fine_t))

    at = np.searchsorted(imu.t, times)
    rotations = start @ relative[at]
    quats = so3.matrix_to_quat(rotations)
    inside = np.clip(times, fix_t[0], fix_t[-1])
    positions = path(inside) + (times - inside)[:, None] * central_velocity(fine_t, fine_p, inside)
    velocities = central_velocity(fine_t, fine_p, inside)
    zeros = np.zeros((len(times), 3))
    return NavigationState(times.copy(), quats, positions, velocities, zeros, zeros.copy())
