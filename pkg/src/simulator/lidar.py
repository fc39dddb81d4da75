#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Linear-scanner acquisition over a scene and direct georeferencing of returns."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from constants import STREAM_LIDAR
from core.domain import LidarReturns, PointCloud, Trajectory
from geometry import Rotation, so3
from simulator.scene import Scene
from simulator.specs import LidarSpec
from utils.random import rng_stream

logger = logging.getLogger(__name__)

SLICE_SECONDS = 0.1


def scan_angle(t: np.ndarray, spec: LidarSpec) -> np.ndarray:
    """Sawtooth mirror angle in radians, sweeping -FOV..+FOV once per scan period."""
    half = math.radians(spec.fov_half_angle)
    phase = np.mod(np.asarray(t) * spec.scan_rate, 1.0)
    return -half + 2.0 * half * phase


def scanner_directions(angles: np.ndarray) -> np.ndarray:
    """Unit rays in the scanner frame: nadir (0, 0, -1) rotated across track."""
    return np.stack([np.zeros_like(angles), np.sin(angles), -np.cos(angles)], axis=1)


def pulse_indices(truth: Trajectory, spec: LidarSpec) -> np.ndarray:
    """Global pulse indices fired inside the flight line windows (or the whole span)."""
    start, end = truth.span
    windows = truth.line_windows or [(start, end)]
    parts = []
    for lo, hi in windows:
        lo, hi = max(lo, start), min(hi, end)
        first = int(math.ceil((lo - start) * spec.point_rate - 1e-9))
        last = int(math.floor((hi - start) * spec.point_rate + 1e-9))
        if last >= first:
            parts.append(np.arange(first, last + 1, dtype=np.int64))
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate(parts))


def _line_ids(times: np.ndarray, truth: Trajectory) -> np.ndarray:
    ids = np.zeros(len(times), dtype=np.uint32)
    for line, (lo, hi) in enumerate(truth.line_windows, start=1):
        ids[(times >= lo) & (times <= hi) & (ids == 0)] = line
    if not truth.line_windows:
        ids[:] = 1
    return ids


def _scan_slice(
    index: int,
    pulses: np.ndarray,
    truth: Trajectory,
    scene: Scene,
    spec: LidarSpec,
    seed: int,
) -> LidarReturns:
    start = truth.span[0]
    times = start + pulses / spec.point_rate
    quats, positions = truth.interpolate(times)
    mount = spec.boresight_rotation.as_matrix()
    rays_l = scanner_directions(scan_angle(times, spec))
    rays_b = rays_l @ mount.T
    origins = positions + so3.quat_rotate(quats, np.asarray(spec.lever_arm, dtype=float))
    dirs = so3.quat_rotate(quats, rays_b)
    ranges = scene.intersect(origins, dirs, spec.max_range)
    rng = rng_stream(seed, STREAM_LIDAR, index)
    noisy = ranges + rng.normal(0.0, spec.range_noise, size=len(ranges))
    hit = np.isfinite(ranges) & (noisy > 0.0) & (noisy <= spec.max_range)
    return LidarReturns(
        t=times[hit],
        v=noisy[hit, None] * rays_l[hit],
        line_id=_line_ids(times[hit], truth),
        return_id=pulses[hit].astype(np.uint64),
    )


def scan_scene(
    truth: Trajectory,
    scene: Scene,
    spec: LidarSpec,
    seed: int,
    threads: Optional[int] = None,
) -> LidarReturns:
    """Ray-cast every pulse against the scene and keep first returns.

    Pulses are cut into fixed time slices; each slice draws range noise from its own
    counter-based stream, so the output does not depend on the thread count.

    Args:
        truth: ground-truth trajectory with line windows.
        scene: surfaces to intersect.
        spec: scanner model and true mounting.
        seed: run seed.
        threads: worker threads for the slices, default one.

    Returns:
        Returns ordered by time, return ids equal to global pulse indices.
    """
    pulses = pulse_indices(truth, spec)
    if not len(pulses):
        return LidarReturns.empty()
    slice_of = (pulses / spec.point_rate // SLICE_SECONDS).astype(np.int64)
    bounds = np.flatnonzero(np.diff(slice_of)) + 1
    groups = np.split(pulses, bounds)
    labels = [int(g[0] / spec.point_rate // SLICE_SECONDS) for g in groups]
    logger.info("Scanning %d pulses in %d slices", len(pulses), len(groups))

    def work(item):
        label, group = item
        return _scan_slice(label, group, truth, scene, spec, seed)

    with ThreadPoolExecutor(max_workers=max(1, threads or 1)) as pool:
        parts = list(pool.map(work, zip(labels, groups)))
    returns = LidarReturns.concatenate(parts)
    logger.info(
        "Kept %d returns (%.1f%% of pulses)", len(returns), 100.0 * len(returns) / len(pulses)
    )
    return returns


def georeference(
    returns: LidarReturns,
    trajectory: Trajectory,
    boresight: Rotation,
    leverarm: np.ndarray,
) -> PointCloud:
    """Map returns to the navigation frame, p = pose(t) * (R_b^L v + l).

    Raises:
        TrajectorySpanError: a return time lies outside the trajectory.
    """
    if not len(returns):
        empty = np.zeros(0)
        return PointCloud(np.zeros((0, 3)), empty, empty, empty, np.zeros((0, 3)))
    quats, positions = trajectory.interpolate(returns.t)
    body = returns.v @ boresight.as_matrix().T + np.asarray(leverarm, dtype=float)
    xyz = positions + so3.quat_rotate(quats, body)
    return PointCloud(
        xyz=xyz,
        t=returns.t.copy(),
        return_id=returns.return_id.copy(),
        line_id=returns.line_id.copy(),
        v=returns.v.copy(),
    )
