#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Array-level SO(3) algebra on (w, x, y, z) quaternions and rotation vectors.

Every function accepts a single element or a leading batch dimension.
"""

import numpy as np
from scipy.spatial.transform import Rotation as ScipyRotation

SMALL_ANGLE = 1e-8
SERIES_ANGLE = 0.05


class LogAmbiguityError(ValueError):
    """The logarithm is not unique for a rotation of angle pi."""


def hat(v: np.ndarray) -> np.ndarray:
    """Return the skew-symmetric matrix of one vector or of a batch of vectors."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Return unit quaternions in canonical form (w >= 0)."""
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    return np.where(q[..., :1] < 0.0, -q, q)


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a * b, renormalized and canonical."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    out = np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )
    return quat_normalize(out)


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    """Inverse of a unit quaternion, canonical."""
    q = np.asarray(q, dtype=float)
    out = q * np.array([1.0, -1.0, -1.0, -1.0])
    return np.where(out[..., :1] < 0.0, -out, out)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrices of unit quaternions."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    out[..., 0, 1] = 2.0 * (x * y - w * z)
    out[..., 0, 2] = 2.0 * (x * z + w * y)
    out[..., 1, 0] = 2.0 * (x * y + w * z)
    out[..., 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    out[..., 1, 2] = 2.0 * (y * z - w * x)
    out[..., 2, 0] = 2.0 * (x * z - w * y)
    out[..., 2, 1] = 2.0 * (y * z + w * x)
    out[..., 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return out


def matrix_to_quat(m: np.ndarray) -> np.ndarray:
    """Unit quaternions (w, x, y, z) of rotation matrices."""
    m = np.asarray(m, dtype=float)
    xyzw = ScipyRotation.from_matrix(m.reshape(-1, 3, 3)).as_quat()
    q = xyzw[:, [3, 0, 1, 2]].reshape(m.shape[:-2] + (4,))
    return quat_normalize(q)


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vectors by quaternions, broadcasting over leading dimensions."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    w = q[..., :1]
    u = q[..., 1:]
    t = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)


def exp_quat(phi: np.ndarray) -> np.ndarray:
    """Quaternion of a rotation vector."""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi, axis=-1, keepdims=True)
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    scale = np.where(small, 0.5 - theta**2 / 48.0, np.sin(0.5 * safe) / safe)
    q = np.concatenate([np.cos(0.5 * theta), scale * phi], axis=-1)
    return quat_normalize(q)


def log_quat(q: np.ndarray) -> np.ndarray:
    """Rotation vector of a unit quaternion.

    Raises:
        LogAmbiguityError: when a rotation angle equals pi.
    """
    q = quat_normalize(q)
    w = q[..., :1]
    u = q[..., 1:]
    if np.any(w < 1e-12):
        raise LogAmbiguityError("Rotation angle of pi has no unique logarithm")
    sin_half = np.linalg.norm(u, axis=-1, keepdims=True)
    small = sin_half < 0.5 * SMALL_ANGLE
    safe = np.where(small, 1.0, sin_half)
    scale = np.where(small, 2.0 / w, 2.0 * np.arctan2(sin_half, w) / safe)
    return scale * u


def exp_matrix(phi: np.ndarray) -> np.ndarray:
    """Rotation matrix of a rotation vector (Rodrigues)."""
    return quat_to_matrix(exp_quat(phi))


def log_matrix(m: np.ndarray) -> np.ndarray:
    """Rotation vector of a rotation matrix."""
    return log_quat(matrix_to_quat(m))


def _coefficients(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (1-cos)/t^2, (t-sin)/t^3 and (1-(t/2)cot(t/2))/t^2 with small-angle series."""
    theta = np.asarray(theta, dtype=float)
    t2 = theta * theta
    small = theta < SERIES_ANGLE
    safe = np.where(small, 1.0, theta)
    half_sin = np.sin(0.5 * safe)
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, 2.0 * half_sin**2 / safe**2)
    c = np.where(
        small,
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        (safe - np.sin(safe)) / safe**3,
    )
    d = np.where(
        small,
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0,
        (1.0 - 0.5 * safe * np.cos(0.5 * safe) / half_sin) / safe**2,
    )
    return b, c, d


def left_jacobian(phi: np.ndarray) -> np.ndarray:
    """SO(3) left Jacobian, also the V matrix of the SE(3) exponential."""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi, axis=-1)
    b, c, _ = _coefficients(theta)
    k = hat(phi)
    eye = np.broadcast_to(np.eye(3), k.shape)
    return eye + b[..., None, None] * k + c[..., None, None] * (k @ k)


def left_jacobian_inverse(phi: np.ndarray) -> np.ndarray:
    """Inverse of the SO(3) left Jacobian."""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi, axis=-1)
    _, _, d = _coefficients(theta)
    k = hat(phi)
    eye = np.broadcast_to(np.eye(3), k.shape)
    return eye - 0.5 * k + d[..., None, None] * (k @ k)


def right_jacobian(phi: np.ndarray) -> np.ndarray:
    """SO(3) right Jacobian: Exp(phi + d) ~ Exp(phi) Exp(Jr(phi) d)."""
    return left_jacobian(-np.asarray(phi, dtype=float))


def right_jacobian_inverse(phi: np.ndarray) -> np.ndarray:
    """Inverse of the SO(3) right Jacobian."""
    return left_jacobian_inverse(-np.asarray(phi, dtype=float))


def euler_to_quat(roll: np.ndarray, pitch: np.ndarray, yaw: np.ndarray) -> np.ndarray:
    """Quaternions of ZYX (yaw, pitch, roll) angles in degrees, body-to-ENU."""
    angles = np.stack(np.broadcast_arrays(yaw, pitch, roll), axis=-1).astype(float)
    xyzw = ScipyRotation.from_euler("ZYX", angles.reshape(-1, 3), degrees=True).as_quat()
    return quat_normalize(xyzw[:, [3, 0, 1, 2]].reshape(angles.shape[:-1] + (4,)))


def quat_to_euler(q: np.ndarray) -> np.ndarray:
    """ZYX angles of quaternions as (..., 3) arrays ordered roll, pitch, yaw in degrees."""
    q = np.asarray(q, dtype=float)
    xyzw = q.reshape(-1, 4)[:, [1, 2, 3, 0]]
    ypr = ScipyRotation.from_quat(xyzw).as_euler("ZYX", degrees=True)
    return ypr[:, ::-1].reshape(q.shape[:-1] + (3,))
