# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""SE(3)/SO(3) algebra, Euler conversions and geodesic interpolation."""

from geometry.rotation import Rotation
from geometry.so3 import LogAmbiguityError
from geometry.transform import (
    InterpolationRangeError,
    RigidTransform,
    Tangent,
    TimedPose,
    apply,
    compose,
    exp,
    geodesic_interpolate,
    interpolate,
    log,
)

__all__ = [
    "InterpolationRangeError",
    "LogAmbiguityError",
    "RigidTransform",
    "Rotation",
    "Tangent",
    "TimedPose",
    "apply",
    "compose",
    "exp",
    "geodesic_interpolate",
    "interpolate",
    "log",
]
