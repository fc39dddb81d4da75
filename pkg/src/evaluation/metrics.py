#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Trajectory, point-cloud and correspondence error metrics."""

import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from constants import STREAM_DOWNSAMPLE
from core.domain import Correspondence, LidarReturns, PointCloud, Trajectory
from geometry import Rotation, so3
from simulator.lidar import georeference
from utils.random import rng_stream

logger = logging.getLogger(__name__)

HISTOGRAM_BINS = 50


class EvaluationError(ValueError):
    """Two inputs cannot be compared."""


class Histogram(BaseModel):
    """Bin edges and counts of an error distribution."""

    edges: list[float]
    counts: list[int]

    @classmethod
    def of(cls, values: np.ndarray, bins: int = HISTOGRAM_BINS, upper: Optional[float] = None):
        """Histogram over [0, upper], upper defaulting to the largest value."""
        values = np.asarray(values, dtype=float)
        top = float(values.max()) if upper is None and values.size else (upper or 1.0)
        counts, edges = np.histogram(values, bins=bins, range=(0.0, max(top, 1e-12)))
        return cls(edges=edges.tolist(), counts=counts.tolist())


class TrajectoryErrorReport(BaseModel):
    """RMSE per ENU axis (m) and per Euler angle (deg), plus position-error norm stats."""

    epochs: int
    rmse_east: float
    rmse_north: float
    rmse_up: float
    norm_mean: float
    norm_std: float
    rmse_roll: float
    rmse_pitch: float
    rmse_yaw: float


class PointCloudErrorReport(BaseModel):
    """Per-point georeferencing differences over identical return ids."""

    points: int
    rmse_east: float
    rmse_north: float
    rmse_up: float
    norm_mean: float
    norm_std: float
    norm_rmse: float
    histogram: Histogram


class CorrespondenceErrorReport(BaseModel):
    """Separation of matched returns once both are traced through the truth."""

    count: int
    mean: float
    std: float
    median: float
    histogram: Histogram


class EvaluationReport(BaseModel):
    """Errors of an adjusted trajectory and its cloud, optionally next to a baseline."""

    trajectory: TrajectoryErrorReport
    pointcloud: Optional[PointCloudErrorReport] = None
    baseline_trajectory: Optional[TrajectoryErrorReport] = None
    baseline_pointcloud: Optional[PointCloudErrorReport] = None
    correspondences: Optional[CorrespondenceErrorReport] = None
    factors: dict[str, float] = Field(default_factory=dict)


def _rmse(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean(np.square(values), axis=0))


def trajectory_error_series(
    estimate: Trajectory,
    reference: Trajectory,
    window: Optional[tuple[float, float]] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-epoch position (ENU, m) and attitude (roll, pitch, yaw, deg) errors.

    Errors are taken at estimate epochs inside the reference span, optionally restricted
    to a time window. Attitude errors are the Euler angles of inverse(reference) * estimate.

    Raises:
        EvaluationError: no estimate epoch overlaps the reference.
    """
    lo, hi = reference.span
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    mask = (estimate.t >= lo) & (estimate.t <= hi)
    if not np.any(mask):
        raise EvaluationError(
            f"Estimate span {estimate.span} does not overlap the reference over [{lo}, {hi}]"
        )
    t = estimate.t[mask]
    ref_q, ref_p = reference.interpolate(t)
    position = estimate.positions[mask] - ref_p
    relative = so3.quat_multiply(so3.quat_conjugate(ref_q), estimate.quaternions[mask])
    attitude = so3.quat_to_euler(relative)
    return t, position, attitude


def trajectory_errors(
    estimate: Trajectory,
    reference: Trajectory,
    window: Optional[tuple[float, float]] = None,
) -> TrajectoryErrorReport:
    """RMSE of an estimated trajectory against a reference.

    Raises:
        EvaluationError: disjoint spans.
    """
    t, position, attitude = trajectory_error_series(estimate, reference, window)
    norms = np.linalg.norm(position, axis=1)
    east, north, up = _rmse(position)
    roll, pitch, yaw = _rmse(attitude)
    return TrajectoryErrorReport(
        epochs=len(t),
        rmse_east=float(east),
        rmse_north=float(north),
        rmse_up=float(up),
        norm_mean=float(norms.mean()),
        norm_std=float(norms.std()),
        rmse_roll=float(roll),
        rmse_pitch=float(pitch),
        rmse_yaw=float(yaw),
    )


def pointcloud_errors(
    cloud_est: PointCloud, cloud_ref: PointCloud, bins: int = HISTOGRAM_BINS
) -> PointCloudErrorReport:
    """Compare two georeferencings of the same returns, point by point.

    Raises:
        EvaluationError: the clouds do not hold the same return ids.
    """
    if len(cloud_est) != len(cloud_ref):
        raise EvaluationError(
            f"Clouds hold {len(cloud_est)} and {len(cloud_ref)} points, ids cannot match"
        )
    if not len(cloud_est):
        raise EvaluationError("Empty point clouds")
    order_est = np.argsort(cloud_est.return_id, kind="stable")
    order_ref = np.argsort(cloud_ref.return_id, kind="stable")
    if not np.array_equal(cloud_est.return_id[order_est], cloud_ref.return_id[order_ref]):
        raise EvaluationError("Clouds hold different return ids")
    diff = cloud_est.xyz[order_est] - cloud_ref.xyz[order_ref]
    norms = np.linalg.norm(diff, axis=1)
    east, north, up = _rmse(diff)
    return PointCloudErrorReport(
        points=len(norms),
        rmse_east=float(east),
        rmse_north=float(north),
        rmse_up=float(up),
        norm_mean=float(norms.mean()),
        norm_std=float(norms.std()),
        norm_rmse=float(np.sqrt(np.mean(norms**2))),
        histogram=Histogram.of(norms, bins),
    )


def correspondence_separations(
    correspondences: list[Correspondence],
    truth: Trajectory,
    boresight: Rotation,
    lever_arm: np.ndarray,
) -> np.ndarray:
    """Distance between the two returns of each correspondence under the true geometry."""
    if not correspondences:
        return np.zeros(0)
    n = len(correspondences)
    ids = np.arange(n, dtype=np.uint64)
    sides = []
    for t_key, v_key, line_key in (("t_a", "v_a", "line_a"), ("t_b", "v_b", "line_b")):
        returns = LidarReturns(
            np.array([getattr(c, t_key) for c in correspondences]),
            np.array([getattr(c, v_key) for c in correspondences]),
            np.array([getattr(c, line_key) for c in correspondences]),
            ids,
        )
        sides.append(georeference(returns, truth, boresight, lever_arm).xyz)
    return np.linalg.norm(sides[0] - sides[1], axis=1)


def inlier_ratio_at(
    correspondences: list[Correspondence],
    truth: Trajectory,
    threshold: float,
    boresight: Optional[Rotation] = None,
    lever_arm: Optional[np.ndarray] = None,
) -> float:
    """Fraction of correspondences whose true separation is below a threshold."""
    if not correspondences:
        return 0.0
    separations = correspondence_separations(
        correspondences,
        truth,
        boresight or Rotation.identity(),
        np.zeros(3) if lever_arm is None else lever_arm,
    )
    return float(np.mean(separations < threshold))


def pair_inlier_ratio(
    cloud: PointCloud,
    index_a: np.ndarray,
    index_b: np.ndarray,
    truth: Trajectory,
    threshold: float,
    boresight: Rotation,
    lever_arm: np.ndarray,
) -> float:
    """Like inlier_ratio_at, for point index pairs into a cloud with provenance.

    Used on raw matches before RANSAC.
    """
    if not len(index_a):
        return 0.0
    returns = cloud.returns()
    sides = [
        georeference(returns.select(np.asarray(idx)), truth, boresight, lever_arm).xyz
        for idx in (index_a, index_b)
    ]
    return float(np.mean(np.linalg.norm(sides[0] - sides[1], axis=1) < threshold))


def correspondence_errors(
    correspondences: list[Correspondence],
    truth: Trajectory,
    boresight: Rotation,
    lever_arm: np.ndarray,
    bins: int = HISTOGRAM_BINS,
) -> CorrespondenceErrorReport:
    """Distribution of true separations of matched returns.

    Raises:
        EvaluationError: no correspondences.
    """
    separations = correspondence_separations(correspondences, truth, boresight, lever_arm)
    if not separations.size:
        raise EvaluationError("No correspondences to evaluate")
    return CorrespondenceErrorReport(
        count=len(separations),
        mean=float(separations.mean()),
        std=float(separations.std()),
        median=float(np.median(separations)),
        histogram=Histogram.of(separations, bins),
    )


def downsample(
    correspondences: list[Correspondence], fraction: float, seed: int
) -> list[Correspondence]:
    """Uniform subset without replacement of round(fraction * N) correspondences.

    Raises:
        ValueError: fraction outside (0, 1].
        EvaluationError: the subset would be empty.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"Fraction must lie in (0, 1], got {fraction}")
    if fraction == 1.0:
        return list(correspondences)
    size = int(round(fraction * len(correspondences)))
    if size == 0:
        raise EvaluationError(
            f"Keeping {fraction:.4%} of {len(correspondences)} correspondences leaves none"
        )
    rng = rng_stream(seed, STREAM_DOWNSAMPLE)
    keep = np.sort(rng.choice(len(correspondences), size=size, replace=False))
    logger.debug("Down-sampled %d to %d correspondences", len(correspondences), size)
    return [correspondences[i] for i in keep]
