#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Graph nodes and their manifold retractions.

Poses are perturbed as R <- R Exp(dphi), t <- t + dt (body-frame rotation, world-frame
translation). Boresight rotations use the same right increment; velocities and biases
are Euclidean.
"""

from typing import Optional

import numpy as np

from geometry import RigidTransform, Rotation, so3


class Node:
    """Base node: a tangent dimension, a state offset and a fixed flag."""

    dim = 0
    kind = "node"

    def __init__(self, fixed: bool = False):
        self.fixed = fixed
        self.offset: Optional[int] = None

    def retract(self, delta: np.ndarray) -> None:
        """Move the node along a tangent increment."""
        raise NotImplementedError

    def snapshot(self):
        """Return a copy of the value."""
        raise NotImplementedError

    def restore(self, value) -> None:
        """Reset the value from a snapshot."""
        raise NotImplementedError


class PoseNode(Node):
    """Body-to-navigation pose at an IMU keyframe epoch."""

    dim = 6
    kind = "pose"

    def __init__(self, t: float, rotation: np.ndarray, translation: np.ndarray, fixed=False):
        super().__init__(fixed)
        self.t = float(t)
        self.rotation = np.array(rotation, dtype=float).reshape(3, 3)
        self.translation = np.array(translation, dtype=float).reshape(3)

    @classmethod
    def from_transform(cls, t: float, pose: RigidTransform, fixed: bool = False):
        """Build from a rigid transform."""
        return cls(t, pose.rotation.as_matrix(), pose.translation, fixed)

    @property
    def transform(self) -> RigidTransform:
        """Current value as a rigid transform."""
        return RigidTransform(Rotation.from_matrix(self.rotation), self.translation)

    @property
    def quaternion(self) -> np.ndarray:
        """Current attitude quaternion."""
        return so3.matrix_to_quat(self.rotation)

    def tangent_map(self) -> np.ndarray:
        """d(SE(3) right perturbation) / d(node increment), blockdiag(I, R^T)."""
        out = np.eye(6)
        out[3:, 3:] = self.rotation.T
        return out

    def retract(self, delta: np.ndarray) -> None:
        self.rotation = self.rotation @ so3.exp_matrix(delta[:3])
        u, _, vt = np.linalg.svd(self.rotation)
        self.rotation = u @ vt
        self.translation = self.translation + delta[3:]

    def snapshot(self):
        return self.rotation.copy(), self.translation.copy()

    def restore(self, value) -> None:
        self.rotation, self.translation = value[0].copy(), value[1].copy()


class InterpPoseNode(PoseNode):
    """Pose at a non-keyframe epoch, tied to its bracketing keyframes by a geodesic edge."""

    kind = "interp-pose"

    def __init__(self, t, rotation, translation, before: PoseNode, after: PoseNode):
        if not before.t < t < after.t:
            raise ValueError(f"Interpolated node at {t} is not inside ({before.t}, {after.t})")
        super().__init__(t, rotation, translation)
        self.before = before
        self.after = after

    @property
    def alpha(self) -> float:
        """Fraction of the way from the earlier to the later keyframe."""
        return (self.t - self.before.t) / (self.after.t - self.before.t)


class VectorNode(Node):
    """Euclidean node."""

    def __init__(self, t: float, value: np.ndarray, fixed: bool = False):
        super().__init__(fixed)
        self.t = float(t)
        self.value = np.array(value, dtype=float).reshape(self.dim)

    def retract(self, delta: np.ndarray) -> None:
        self.value = self.value + delta

    def snapshot(self):
        return self.value.copy()

    def restore(self, value) -> None:
        self.value = value.copy()


class VelocityNode(VectorNode):
    """Navigation-frame velocity at a keyframe, m/s."""

    dim = 3
    kind = "velocity"


class BiasNode(VectorNode):
    """Gyro (rad/s) and accelerometer (m/s^2) biases, stacked."""

    dim = 6
    kind = "bias"

    @property
    def gyro(self) -> np.ndarray:
        """Gyro part."""
        return self.value[:3]

    @property
    def accel(self) -> np.ndarray:
        """Accelerometer part."""
        return self.value[3:]


class BoresightNode(Node):
    """Scanner-to-body mounting rotation."""

    dim = 3
    kind = "boresight"

    def __init__(self, rotation: Rotation, fixed: bool = False):
        super().__init__(fixed)
        self.matrix = rotation.as_matrix()

    @property
    def rotation(self) -> Rotation:
        """Current mounting rotation."""
        return Rotation.from_matrix(self.matrix)

    def retract(self, delta: np.ndarray) -> None:
        self.matrix = self.matrix @ so3.exp_matrix(delta)

    def snapshot(self):
        return self.matrix.copy()

    def restore(self, value) -> None:
        self.matrix = value.copy()
