# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Error metrics and the evaluation cases."""

from evaluation.config import CaseConfig
from evaluation.metrics import (
    CorrespondenceErrorReport,
    EvaluationError,
    EvaluationReport,
    Histogram,
    PointCloudErrorReport,
    TrajectoryErrorReport,
    correspondence_errors,
    correspondence_separations,
    downsample,
    inlier_ratio_at,
    pair_inlier_ratio,
    pointcloud_errors,
    trajectory_error_series,
    trajectory_errors,
)

__all__ = [
    "CaseConfig",
    "CorrespondenceErrorReport",
    "EvaluationError",
    "EvaluationReport",
    "Histogram",
    "PointCloudErrorReport",
    "TrajectoryErrorReport",
    "correspondence_errors",
    "correspondence_separations",
    "downsample",
    "inlier_ratio_at",
    "pair_inlier_ratio",
    "pointcloud_errors",
    "trajectory_error_series",
    "trajectory_errors",
]
