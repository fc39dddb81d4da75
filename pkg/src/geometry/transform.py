#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Rigid transformations, timed poses and the SE(3) geodesic.

Tangent vectors are 6-vectors ordered (rotation rad, translation m). The exponential is the
exact SE(3) one, Exp(phi, rho) = (Exp(phi), V(phi) rho).
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from geometry import so3
from geometry.rotation import Rotation

Tangent = np.ndarray


class InterpolationRangeError(ValueError):
    """Requested time lies outside the bracketing poses."""


class RigidTransform:
    """Immutable element of SE(3): x -> R x + t."""

    __slots__ = ("_rotation", "_translation")

    def __init__(
        self,
        rotation: Optional[Rotation] = None,
        translation: Union[np.ndarray, list, tuple, None] = None,
    ):
        self._rotation = rotation if rotation is not None else Rotation.identity()
        t = np.zeros(3) if translation is None else np.array(translation, dtype=float)
        t = t.reshape(3)
        t.flags.writeable = False
        self._translation = t

    @classmethod
    def identity(cls) -> "RigidTransform":
        """Return the identity transform."""
        return cls()

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidTransform":
        """Build from a 4x4 homogeneous matrix."""
        matrix = np.asarray(matrix, dtype=float)
        return cls(Rotation.from_matrix(matrix[:3, :3]), matrix[:3, 3])

    @classmethod
    def exp(cls, xi: Tangent) -> "RigidTransform":
        """Return the SE(3) exponential of a tangent vector."""
        q, t = se3_exp(np.asarray(xi, dtype=float).reshape(6))
        return cls(Rotation(q), t)

    @property
    def rotation(self) -> Rotation:
        """Rotation part."""
        return self._rotation

    @property
    def translation(self) -> np.ndarray:
        """Translation part in meters, read-only."""
        return self._translation

    def log(self) -> Tangent:
        """Return the SE(3) logarithm; raises at rotation angle pi."""
        return se3_log(self._rotation.quaternion, self._translation)

    def as_matrix(self) -> np.ndarray:
        """Return the 4x4 homogeneous matrix."""
        out = np.eye(4)
        out[:3, :3] = self._rotation.as_matrix()
        out[:3, 3] = self._translation
        return out

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Return R v + t for one vector or an (N, 3) array."""
        return self._rotation.apply(v) + self._translation

    def inverse(self) -> "RigidTransform":
        """Return the inverse transform."""
        inv = self._rotation.inverse()
        return RigidTransform(inv, -inv.apply(self._translation))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return self after other."""
        return RigidTransform(
            self._rotation * other._rotation,
            self._rotation.apply(other._translation) + self._translation,
        )

    def __mul__(self, other: "RigidTransform") -> "RigidTransform":
        """Compose transforms."""
        return self.compose(other)

    def allclose(self, other: "RigidTransform", atol: float = 1e-9) -> bool:
        """Compare rotation quaternions and translations."""
        return self._rotation.allclose(other._rotation, atol) and bool(
            np.allclose(self._translation, other._translation, rtol=0.0, atol=atol)
        )

    def __repr__(self) -> str:
        """Show rotation and translation."""
        return f"RigidTransform({self._rotation!r}, t={self._translation.tolist()})"


@dataclass(frozen=True)
class TimedPose:
    """A pose at a GPS time in seconds."""

    t: float
    pose: RigidTransform


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Return a after b."""
    return a.compose(b)


def apply(transform: RigidTransform, v: np.ndarray) -> np.ndarray:
    """Return R v + t."""
    return transform.apply(v)


def exp(xi: Tangent) -> RigidTransform:
    """SE(3) exponential."""
    return RigidTransform.exp(xi)


def log(transform: RigidTransform) -> Tangent:
    """SE(3) logarithm."""
    return transform.log()


def geodesic_interpolate(a: TimedPose, b: TimedPose, t: float) -> RigidTransform:
    """Return the pose at time t on the SE(3) geodesic from a to b.

    Raises:
        InterpolationRangeError: t outside [a.t, b.t] or a.t >= b.t.
    """
    if not a.t < b.t:
        raise InterpolationRangeError(f"Bracket is empty: {a.t} >= {b.t}")
    if t < a.t or t > b.t:
        raise InterpolationRangeError(f"Time {t} outside [{a.t}, {b.t}]")
    alpha = (t - a.t) / (b.t - a.t)
    if alpha == 0.0:
        return a.pose
    if alpha == 1.0:
        return b.pose
    return interpolate(a.pose, b.pose, alpha)


def interpolate(a: RigidTransform, b: RigidTransform, alpha: float) -> RigidTransform:
    """Return a * Exp(alpha * Log(a^-1 b))."""
    return a * RigidTransform.exp(alpha * (a.inverse() * b).log())


# Array-level SE(3)


def se3_exp(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (quaternions, translations) of tangent vectors (..., 6)."""
    xi = np.asarray(xi, dtype=float)
    phi = xi[..., :3]
    rho = xi[..., 3:]
    q = so3.exp_quat(phi)
    t = np.einsum("...ij,...j->...i", so3.left_jacobian(phi), rho)
    return q, t


def se3_log(q: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Return tangent vectors (..., 6) of (quaternion, translation) pairs."""
    phi = so3.log_quat(q)
    rho = np.einsum("...ij,...j->...i", so3.left_jacobian_inverse(phi), np.asarray(t, float))
    return np.concatenate([phi, rho], axis=-1)


def relative(
    q_a: np.ndarray, t_a: np.ndarray, q_b: np.ndarray, t_b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Return a^-1 * b for arrays of poses."""
    q_inv = so3.quat_conjugate(q_a)
    return so3.quat_multiply(q_inv, q_b), so3.quat_rotate(q_inv, t_b - t_a)


def interpolate_poses(
    times: np.ndarray, quats: np.ndarray, trans: np.ndarray, query: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the piecewise SE(3) geodesic through timed poses at many query times.

    Args:
        times: strictly increasing knot times (K,).
        quats: knot quaternions (K, 4).
        trans: knot translations (K, 3).
        query: query times (N,), each within [times[0], times[-1]].

    Returns:
        Quaternions (N, 4) and translations (N, 3).

    Raises:
        InterpolationRangeError: a query time falls outside the knots.
    """
    times = np.asarray(times, dtype=float)
    query = np.asarray(query, dtype=float)
    if len(times) < 2:
        raise InterpolationRangeError("At least two poses are needed for interpolation")
    if query.size and (query.min() < times[0] or query.max() > times[-1]):
        raise InterpolationRangeError(
            f"Query times [{query.min()}, {query.max()}] outside [{times[0]}, {times[-1]}]"
        )
    dq, dt = relative(quats[:-1], trans[:-1], quats[1:], trans[1:])
    deltas = se3_log(dq, dt)
    k = np.clip(np.searchsorted(times, query, side="right") - 1, 0, len(times) - 2)
    alpha = (query - times[k]) / (times[k + 1] - times[k])
    step_q, step_t = se3_exp(alpha[:, None] * deltas[k])
    q = so3.quat_multiply(quats[k], step_q)
    t = so3.quat_rotate(quats[k], step_t) + trans[k]
    at_end = alpha == 1.0
    q[at_end] = quats[k[at_end] + 1]
    t[at_end] = trans[k[at_end] + 1]
    at_start = alpha == 0.0
    q[at_start] = quats[k[at_start]]
    t[at_start] = trans[k[at_start]]
    return q, t


# SE(3) Jacobians, tangent ordering (rotation, translation)


def adjoint(transform: RigidTransform) -> np.ndarray:
    """Return Ad_T with Exp(Ad_T xi) = T Exp(xi) T^-1."""
    r = transform.rotation.as_matrix()
    out = np.zeros((6, 6))
    out[:3, :3] = r
    out[3:, 3:] = r
    out[3:, :3] = so3.hat(transform.translation) @ r
    return out


def _q_block(xi: np.ndarray) -> np.ndarray:
    """Translation-rotation coupling block of the SE(3) left Jacobian."""
    phi = xi[:3]
    rho = xi[3:]
    theta = float(np.linalg.norm(phi))
    p = so3.hat(phi)
    r = so3.hat(rho)
    pr = p @ r
    rp = r @ p
    prp = pr @ p
    t2 = theta * theta
    if theta < so3.SERIES_ANGLE:
        c1 = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
        c2 = 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0
        c3 = 1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120960.0
    else:
        s, c = np.sin(theta), np.cos(theta)
        c1 = (theta - s) / theta**3
        c2 = (t2 + 2.0 * c - 2.0) / (2.0 * theta**4)
        c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * theta**5)
    return (
        0.5 * r
        + c1 * (pr + rp + prp)
        + c2 * (p @ pr + rp @ p - 3.0 * prp)
        + c3 * (prp @ p + p @ prp)
    )


def se3_left_jacobian(xi: Tangent) -> np.ndarray:
    """SE(3) left Jacobian: Exp(xi + d) ~ Exp(Jl(xi) d) Exp(xi)."""
    xi = np.asarray(xi, dtype=float)
    jl = so3.left_jacobian(xi[:3])
    out = np.zeros((6, 6))
    out[:3, :3] = jl
    out[3:, 3:] = jl
    out[3:, :3] = _q_block(xi)
    return out


def se3_left_jacobian_inverse(xi: Tangent) -> np.ndarray:
    """Inverse of the SE(3) left Jacobian."""
    xi = np.asarray(xi, dtype=float)
    jl_inv = so3.left_jacobian_inverse(xi[:3])
    out = np.zeros((6, 6))
    out[:3, :3] = jl_inv
    out[3:, 3:] = jl_inv
    out[3:, :3] = -jl_inv @ _q_block(xi) @ jl_inv
    return out


def se3_right_jacobian(xi: Tangent) -> np.ndarray:
    """SE(3) right Jacobian: Exp(xi + d) ~ Exp(xi) Exp(Jr(xi) d)."""
    return se3_left_jacobian(-np.asarray(xi, dtype=float))


def se3_right_jacobian_inverse(xi: Tangent) -> np.ndarray:
    """Inverse of the SE(3) right Jacobian."""
    return se3_left_jacobian_inverse(-np.asarray(xi, dtype=float))


def interpolation_jacobians(
    a: RigidTransform, b: RigidTransform, alpha: float
) -> tuple[RigidTransform, np.ndarray, np.ndarray]:
    """Return the interpolant and its right-tangent Jacobians wrt a and b.

    With I = a Exp(alpha xi), xi = Log(a^-1 b), perturbing a -> a Exp(ea) and b -> b Exp(eb)
    moves I to I Exp(Ja ea + Jb eb).
    """
    delta = a.inverse() * b
    xi = delta.log()
    step = RigidTransform.exp(alpha * xi)
    coupling = alpha * se3_right_jacobian(alpha * xi) @ se3_right_jacobian_inverse(xi)
    jac_b = coupling
    jac_a = adjoint(step.inverse()) - coupling @ adjoint(delta.inverse())
    return a * step, jac_a, jac_b
