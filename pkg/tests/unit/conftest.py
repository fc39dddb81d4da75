# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Test fixtures for unit tests."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from core.domain import Trajectory  # noqa: E402
from geometry import so3  # noqa: E402


def random_quaternions(rng: np.random.Generator, count: int, max_angle: float = 3.0):
    """Canonical quaternions with rotation angles below max_angle (rad)."""
    axes = rng.normal(size=(count, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    angles = rng.uniform(0.0, max_angle, size=(count, 1))
    return so3.exp_quat(axes * angles)


def straight_trajectory(
    duration: float = 10.0, rate: float = 100.0, speed: float = 10.0, height: float = 100.0
) -> Trajectory:
    """Level flight due north at constant speed, body x along track."""
    t = np.arange(0.0, duration + 0.5 / rate, 1.0 / rate)
    positions = np.column_stack([np.zeros_like(t), speed * t, np.full_like(t, height)])
    quats = np.repeat(so3.euler_to_quat(0.0, 0.0, 90.0)[None], len(t), axis=0)
    velocities = np.tile([0.0, speed, 0.0], (len(t), 1))
    return Trajectory(t, quats, positions, velocities=velocities)


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def trajectory() -> Trajectory:
    """Ten seconds of straight and level flight."""
    return straight_trajectory()
