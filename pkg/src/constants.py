# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""File containing constants."""

# Logging
LOG_ENV_VAR = "KINSCAN_LOG"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Physics (local-level ENU navigation frame, Earth rotation omitted)
GRAVITY = 9.80665
GRAVITY_VECTOR = (0.0, 0.0, -GRAVITY)

# Unit conversions
DEG_PER_HOUR = 1.0 / 3600.0
MILLI_G = 1e-3 * GRAVITY

# Random stream identifiers
STREAM_TRAJECTORY = 1
STREAM_IMU = 2
STREAM_GNSS = 3
STREAM_LIDAR = 4
STREAM_SCENE = 5
STREAM_RANSAC = 6
STREAM_DOWNSAMPLE = 7
STREAM_SUBSAMPLE = 8

# File format headers
POINTCLOUD_MAGIC = b"KSPOINTS"
RETURNS_MAGIC = b"KSRETURN"
POINTCLOUD_VERSION = 2
RETURNS_VERSION = 1

# Pipeline stage names, in execution order
STAGE_SIMULATE = "simulate"
STAGE_APPROX = "approx-trajectory"
STAGE_GEOREF = "georef"
STAGE_CORRESPOND = "correspond"
STAGE_ADJUST = "adjust"
STAGE_REGEOREF = "re-georef"
STAGE_EVALUATE = "evaluate"
PIPELINE_STAGES = (
    STAGE_SIMULATE,
    STAGE_APPROX,
    STAGE_GEOREF,
    STAGE_CORRESPOND,
    STAGE_ADJUST,
    STAGE_REGEOREF,
    STAGE_EVALUATE,
)
CHECKPOINT_FILE = "pipeline-state.json"

# Exit codes
EXIT_OK = 0
EXIT_STAGE_FAILED = 1
EXIT_CONFIG_INVALID = 2

# Artifact names inside the output directory
ARTIFACT_TRUTH = "truth.csv"
ARTIFACT_IMU = "imu.csv"
ARTIFACT_GNSS = "gnss.csv"
ARTIFACT_RETURNS = "returns.bin"
ARTIFACT_MOUNTING = "mounting.json"
ARTIFACT_APPROX = "approx.csv"
ARTIFACT_APPROX_REPORT = "approx-solve.json"
ARTIFACT_APPROX_CLOUD = "approx-cloud.bin"
ARTIFACT_CORRESPONDENCES = "correspondences.csv"
ARTIFACT_CORRESPOND_REPORT = "correspond.json"
ARTIFACT_TRAJECTORY = "trajectory.csv"
ARTIFACT_ADJUST_REPORT = "adjust-solve.json"
ARTIFACT_CLOUD = "cloud.bin"
ARTIFACT_EVALUATION = "evaluation.json"
