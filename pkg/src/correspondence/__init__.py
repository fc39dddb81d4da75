# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Point-to-point correspondences between overlapping flight lines."""

from core.domain import ProvenanceError
from correspondence.descriptor import DESCRIPTOR_SIZE, describe, describe_many
from correspondence.keypoints import KeyPoint, detect_keypoints_iss
from correspondence.matching import match
from correspondence.pipeline import (
    CorrespondenceConfig,
    CorrespondencePipeline,
    CorrespondenceRun,
    TileStats,
    correspond_lines,
    run_pipeline,
    trace_to_return,
)
from correspondence.ransac import (
    DegenerateSubsetError,
    RansacResult,
    TooFewCorrespondencesError,
    estimate_rigid,
    ransac_filter,
)
from correspondence.tiling import TilePair, estimate_gsd, extract_overlap_tiles, voxel_downsample

__all__ = [
    "DESCRIPTOR_SIZE",
    "CorrespondenceConfig",
    "CorrespondencePipeline",
    "CorrespondenceRun",
    "DegenerateSubsetError",
    "KeyPoint",
    "ProvenanceError",
    "RansacResult",
    "TilePair",
    "TileStats",
    "TooFewCorrespondencesError",
    "correspond_lines",
    "describe",
    "describe_many",
    "detect_keypoints_iss",
    "estimate_gsd",
    "estimate_rigid",
    "extract_overlap_tiles",
    "match",
    "ransac_filter",
    "run_pipeline",
    "trace_to_return",
    "voxel_downsample",
]
