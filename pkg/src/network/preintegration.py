#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""IMU preintegration between keyframes with first-order bias correction."""

from dataclasses import dataclass

import numpy as np

from core.domain import ImuMeasurements
from geometry import so3


@dataclass
class Preintegrated:
    """Relative motion in the start body frame accumulated over one IMU segment.

    Args:
        dt: segment duration in seconds.
        delta_r: rotation (3x3).
        delta_v: velocity change without gravity, m/s.
        delta_p: position change without gravity, m.
        covariance: 9x9 covariance of (rotation, velocity, position) errors.
        bias: gyro and accelerometer bias used during integration, stacked (6,).
        jac_r_bg, jac_v_bg, jac_v_ba, jac_p_bg, jac_p_ba: bias Jacobians (3x3).
    """

    dt: float
    delta_r: np.ndarray
    delta_v: np.ndarray
    delta_p: np.ndarray
    covariance: np.ndarray
    bias: np.ndarray
    jac_r_bg: np.ndarray
    jac_v_bg: np.ndarray
    jac_v_ba: np.ndarray
    jac_p_bg: np.ndarray
    jac_p_ba: np.ndarray

    def corrected(self, bias: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Deltas updated to a new bias to first order."""
        d = np.asarray(bias, dtype=float) - self.bias
        dbg, dba = d[:3], d[3:]
        delta_r = self.delta_r @ so3.exp_matrix(self.jac_r_bg @ dbg)
        delta_v = self.delta_v + self.jac_v_bg @ dbg + self.jac_v_ba @ dba
        delta_p = self.delta_p + self.jac_p_bg @ dbg + self.jac_p_ba @ dba
        return delta_r, delta_v, delta_p


def preintegrate(
    imu: ImuMeasurements,
    bias: np.ndarray,
    gyro_noise_density: float = 0.0,
    accel_noise_density: float = 0.0,
) -> Preintegrated:
    """Midpoint integration of rates and specific force over a segment.

    Sample k contributes the average of samples k and k+1; the bias Jacobians are the
    exact derivatives of this discrete scheme.

    Args:
        imu: samples from the start keyframe to the end keyframe, both included.
        bias: gyro and accelerometer bias estimate (6,).
        gyro_noise_density: rad/s/sqrt(Hz).
        accel_noise_density: m/s^2/sqrt(Hz).

    Raises:
        ValueError: fewer than two samples or non-increasing timestamps.
    """
    if len(imu) < 2:
        raise ValueError("Preintegration needs at least two IMU samples")
    if np.any(np.diff(imu.t) <= 0.0):
        raise ValueError("IMU timestamps must increase within a segment")
    bias = np.asarray(bias, dtype=float).reshape(6)
    bg, ba = bias[:3], bias[3:]
    gyro_var = gyro_noise_density**2
    accel_var = accel_noise_density**2

    rot = np.eye(3)
    vel = np.zeros(3)
    pos = np.zeros(3)
    cov = np.zeros((9, 9))
    jr_g = np.zeros((3, 3))
    jv_g = np.zeros((3, 3))
    jv_a = np.zeros((3, 3))
    jp_g = np.zeros((3, 3))
    jp_a = np.zeros((3, 3))
    a_mat = np.eye(9)
    b_g = np.zeros((9, 3))
    b_a = np.zeros((9, 3))

    for k in range(len(imu) - 1):
        dt = imu.t[k + 1] - imu.t[k]
        w = 0.5 * (imu.gyro[k] + imu.gyro[k + 1]) - bg
        f0 = imu.accel[k] - ba
        f1 = imu.accel[k + 1] - ba
        step = so3.exp_matrix(w * dt)
        jr_step = so3.right_jacobian(w * dt)
        rot_next = rot @ step
        jr_g_next = step.T @ jr_g - jr_step * dt

        acc = 0.5 * (rot @ f0 + rot_next @ f1)
        dacc_g = -0.5 * (rot @ so3.hat(f0) @ jr_g + rot_next @ so3.hat(f1) @ jr_g_next)
        dacc_a = -0.5 * (rot + rot_next)

        # error-state transition of (rotation, velocity, position)
        f_mid = 0.5 * (f0 + f1)
        skew = rot @ so3.hat(f_mid)
        a_mat[:3, :3] = step.T
        a_mat[3:6, :3] = -skew * dt
        a_mat[6:, :3] = -0.5 * skew * dt * dt
        a_mat[6:, 3:6] = np.eye(3) * dt
        b_g[:3] = jr_step * dt
        b_a[3:6] = rot * dt
        b_a[6:] = 0.5 * rot * dt * dt
        cov = (
            a_mat @ cov @ a_mat.T
            + (gyro_var / dt) * (b_g @ b_g.T)
            + (accel_var / dt) * (b_a @ b_a.T)
        )

        pos = pos + vel * dt + 0.5 * acc * dt * dt
        vel = vel + acc * dt
        jp_g = jp_g + jv_g * dt + 0.5 * dacc_g * dt * dt
        jp_a = jp_a + jv_a * dt + 0.5 * dacc_a * dt * dt
        jv_g = jv_g + dacc_g * dt
        jv_a = jv_a + dacc_a * dt
        rot = rot_next
        jr_g = jr_g_next

    return Preintegrated(
        dt=float(imu.t[-1] - imu.t[0]),
        delta_r=rot,
        delta_v=vel,
        delta_p=pos,
        covariance=cov,
        bias=bias.copy(),
        jac_r_bg=jr_g,
        jac_v_bg=jv_g,
        jac_v_ba=jv_a,
        jac_p_bg=jp_g,
        jac_p_ba=jp_a,
    )
