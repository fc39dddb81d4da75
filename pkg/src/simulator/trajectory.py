#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Ground-truth flight trajectories."""

import logging
import math

import numpy as np
from scipy.interpolate import CubicSpline

from constants import STREAM_TRAJECTORY
from core.domain import Trajectory
from geometry import so3
from simulator.specs import FlightPlan
from utils.random import rng_stream

logger = logging.getLogger(__name__)

STRAIGHT_STEP = 10.0
TURN_STEP_DEG = 5.0


class FlightPlanError(ValueError):
    """The plan cannot be flown (degenerate or unresolved geometry)."""


def _straight(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Points from a (excluded) to b (included) at most STRAIGHT_STEP apart."""
    count = max(1, int(math.ceil(np.linalg.norm(b - a) / STRAIGHT_STEP)))
    frac = np.arange(1, count + 1) / count
    return a + frac[:, None] * (b - a)


def _turn(center: np.ndarray, radius: float, start: float, stop: float) -> np.ndarray:
    """Arc points from angle start (excluded) to stop (included), radians."""
    count = max(2, int(math.ceil(abs(stop - start) / math.radians(TURN_STEP_DEG))))
    angles = start + (stop - start) * np.arange(1, count + 1) / count
    return center + radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _survey_path(plan: FlightPlan) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Dense 2D path (along, cross) of the line pattern and the index range of each line."""
    length = plan.line_length
    spacing = plan.line_spacing
    if plan.lines > 1 and spacing is None:
        raise FlightPlanError("Line spacing is unresolved; derive it from the swath first")
    radius = 0.5 * (spacing or 0.0)
    points = [np.array([[-plan.run_in, 0.0]])] if plan.run_in > 0.0 else []
    current = np.array([-plan.run_in, 0.0]) if plan.run_in > 0.0 else None
    lines: list[tuple[int, int]] = []
    count = len(points[0]) if points else 0
    for k in range(plan.lines):
        cross = -k * (spacing or 0.0)
        a, b = (0.0, length) if k % 2 == 0 else (length, 0.0)
        start = np.array([a, cross])
        end = np.array([b, cross])
        if current is None:
            points.append(start[None, :])
            count += 1
        elif not np.allclose(current, start):
            segment = _straight(current, start)
            points.append(segment)
            count += len(segment)
        first = count - 1
        segment = _straight(start, end)
        points.append(segment)
        count += len(segment)
        lines.append((first, count - 1))
        current = end
        if k < plan.lines - 1:
            center = np.array([b, cross - radius])
            if k % 2 == 0:
                arc = _turn(center, radius, 0.5 * math.pi, -0.5 * math.pi)
            else:
                arc = _turn(center, radius, 0.5 * math.pi, 1.5 * math.pi)
            points.append(arc)
            count += len(arc)
            current = arc[-1]
    if plan.run_in > 0.0:
        direction = 1.0 if (plan.lines - 1) % 2 == 0 else -1.0
        segment = _straight(current, current + np.array([direction * plan.run_in, 0.0]))
        points.append(segment)
    return np.concatenate(points), lines


def plan_path(plan: FlightPlan) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Return dense 3D waypoints and the waypoint index range of every survey line.

    Raises:
        FlightPlanError: coincident waypoints or unresolved line spacing.
    """
    if plan.waypoints is not None:
        raw = np.asarray(plan.waypoints, dtype=float)
        if np.any(np.linalg.norm(np.diff(raw, axis=0), axis=1) < 1e-9):
            raise FlightPlanError("Flight plan has coincident consecutive waypoints")
        points = [raw[:1]]
        lines = []
        count = 1
        for a, b in zip(raw[:-1], raw[1:]):
            segment = _straight(a, b)
            points.append(segment)
            lines.append((count - 1, count + len(segment) - 1))
            count += len(segment)
        return np.concatenate(points), lines
    local, lines = _survey_path(plan)
    heading = math.radians(plan.heading)
    along = np.array([math.cos(heading), math.sin(heading)])
    left = np.array([-math.sin(heading), math.cos(heading)])
    xy = np.asarray(plan.origin) + local[:, :1] * along + local[:, 1:] * left
    z = np.full((len(xy), 1), plan.altitude_agl)
    return np.hstack([xy, z]), lines


def _dither(plan: FlightPlan, tau: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Sinusoidal roll, pitch, yaw offsets (rad) and their rates (rad/s)."""
    rng = rng_stream(seed, STREAM_TRAJECTORY)
    periods = rng.uniform(plan.min_period, plan.max_period, size=3)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=3)
    amplitudes = np.radians([plan.roll_amplitude, plan.pitch_amplitude, plan.yaw_amplitude])
    omega = 2.0 * math.pi / periods
    arg = tau[:, None] * omega + phases
    return amplitudes * np.sin(arg), amplitudes * omega * np.cos(arg)


def generate_trajectory(plan: FlightPlan, rate: float, seed: int) -> Trajectory:
    """Sample a C2-smooth flight with along-track heading and attitude dither.

    Args:
        plan: validated flight plan with resolved line spacing.
        rate: sampling rate in Hz, normally the IMU rate.
        seed: seed of the dither periods and phases.

    Returns:
        Trajectory with velocities, body angular rates, accelerations and line windows.
    """
    if rate <= 0.0:
        raise FlightPlanError(f"Sampling rate must be positive, got {rate}")
    points, lines = plan_path(plan)
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))])
    spline = CubicSpline(arc, points, bc_type="natural")
    total = float(arc[-1])
    count = int(math.floor(total / plan.speed * rate + 1e-9)) + 1
    tau = np.arange(count) / rate
    s = np.minimum(plan.speed * tau, total)

    positions = spline(s)
    velocity = spline(s, 1) * plan.speed
    acceleration = spline(s, 2) * plan.speed**2

    track = np.arctan2(velocity[:, 1], velocity[:, 0])
    horizontal = velocity[:, 0] ** 2 + velocity[:, 1] ** 2
    track_rate = (
        velocity[:, 0] * acceleration[:, 1] - velocity[:, 1] * acceleration[:, 0]
    ) / horizontal

    offsets, offset_rates = _dither(plan, tau, seed)
    roll, pitch = offsets[:, 0], offsets[:, 1]
    yaw = track + offsets[:, 2]
    droll, dpitch = offset_rates[:, 0], offset_rates[:, 1]
    dyaw = track_rate + offset_rates[:, 2]
    quaternions = so3.euler_to_quat(np.degrees(roll), np.degrees(pitch), np.degrees(yaw))
    angular_rates = np.stack(
        [
            droll - dyaw * np.sin(pitch),
            dpitch * np.cos(roll) + dyaw * np.sin(roll) * np.cos(pitch),
            -dpitch * np.sin(roll) + dyaw * np.cos(roll) * np.cos(pitch),
        ],
        axis=1,
    )

    t = plan.start_time + tau
    end = float(t[-1])
    windows = [
        (plan.start_time + arc[i] / plan.speed, min(plan.start_time + arc[j] / plan.speed, end))
        for i, j in lines
    ]
    logger.debug(
        "Generated %d poses over %.1f s, %d survey lines", count, end - t[0], len(windows)
    )
    return Trajectory(
        t=t,
        quaternions=quaternions,
        positions=positions,
        velocities=velocity,
        angular_rates=angular_rates,
        accelerations=acceleration,
        line_windows=windows,
    )
