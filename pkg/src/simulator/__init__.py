# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Ground truth, sensor synthesis, scenes and LiDAR acquisition."""

from core.domain import TrajectorySpanError
from simulator.lidar import georeference, scan_scene
from simulator.scene import Scene, SceneSpec, generate_scene, scene_bounds
from simulator.sensors import RateMismatchError, synthesize_gnss, synthesize_imu
from simulator.specs import (
    FlightPlan,
    GnssSpec,
    ImuSpec,
    LidarSpec,
    spacing_for_overlap,
    swath_width,
)
from simulator.trajectory import FlightPlanError, generate_trajectory

__all__ = [
    "FlightPlan",
    "FlightPlanError",
    "GnssSpec",
    "ImuSpec",
    "LidarSpec",
    "RateMismatchError",
    "Scene",
    "SceneSpec",
    "TrajectorySpanError",
    "generate_scene",
    "generate_trajectory",
    "georeference",
    "scan_scene",
    "scene_bounds",
    "spacing_for_overlap",
    "swath_width",
    "synthesize_gnss",
    "synthesize_imu",
]
