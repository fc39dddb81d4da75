#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Immutable unit-quaternion rotation."""

from typing import Union

import numpy as np

from geometry import so3


class Rotation:
    """A rotation stored as a canonical unit quaternion (w, x, y, z), w >= 0."""

    __slots__ = ("_q",)

    def __init__(self, quaternion: Union[np.ndarray, list, tuple]):
        q = np.array(quaternion, dtype=float).reshape(4)
        if not np.all(np.isfinite(q)) or np.linalg.norm(q) == 0.0:
            raise ValueError(f"Invalid quaternion {q}")
        q = so3.quat_normalize(q)
        q.flags.writeable = False
        self._q = q

    @classmethod
    def identity(cls) -> "Rotation":
        """Return the identity rotation."""
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def from_rotvec(cls, phi: np.ndarray) -> "Rotation":
        """Return Exp(phi) for a rotation vector in radians."""
        return cls(so3.exp_quat(np.asarray(phi, dtype=float).reshape(3)))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Rotation":
        """Return the rotation of a 3x3 orthonormal matrix."""
        return cls(so3.matrix_to_quat(np.asarray(matrix, dtype=float).reshape(3, 3)))

    @classmethod
    def from_euler(cls, roll: float, pitch: float, yaw: float) -> "Rotation":
        """Return the body-to-ENU rotation of ZYX angles in degrees."""
        return cls(so3.euler_to_quat(roll, pitch, yaw))

    @property
    def quaternion(self) -> np.ndarray:
        """Canonical (w, x, y, z) quaternion, read-only."""
        return self._q

    @property
    def angle(self) -> float:
        """Rotation angle in radians, in [0, pi]."""
        return float(2.0 * np.arctan2(np.linalg.norm(self._q[1:]), self._q[0]))

    def as_matrix(self) -> np.ndarray:
        """Return the 3x3 rotation matrix."""
        return so3.quat_to_matrix(self._q)

    def as_rotvec(self) -> np.ndarray:
        """Return Log(self) in radians."""
        return so3.log_quat(self._q)

    def to_euler(self) -> tuple[float, float, float]:
        """Return (roll, pitch, yaw) in degrees, ZYX convention."""
        roll, pitch, yaw = so3.quat_to_euler(self._q)
        return float(roll), float(pitch), float(yaw)

    def inverse(self) -> "Rotation":
        """Return the inverse rotation."""
        return Rotation(so3.quat_conjugate(self._q))

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Rotate one vector (3,) or many (N, 3)."""
        return so3.quat_rotate(self._q, np.asarray(v, dtype=float))

    def compose(self, other: "Rotation") -> "Rotation":
        """Return self * other (other applied first)."""
        return Rotation(so3.quat_multiply(self._q, other._q))

    def __mul__(self, other: "Rotation") -> "Rotation":
        """Compose rotations."""
        return self.compose(other)

    def distance(self, other: "Rotation") -> float:
        """Angle in radians of self^-1 * other."""
        return (self.inverse() * other).angle

    def allclose(self, other: "Rotation", atol: float = 1e-9) -> bool:
        """Compare canonical quaternions."""
        return bool(np.allclose(self._q, other._q, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        """Show the quaternion."""
        w, x, y, z = self._q
        return f"Rotation(w={w:.12g}, x={x:.12g}, y={y:.12g}, z={z:.12g})"
