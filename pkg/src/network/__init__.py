# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""The Dynamic Network: factor-graph fusion of inertial, GNSS and LiDAR observations."""

from network.edges import (
    BiasWalkEdge,
    CorrespondenceEdge,
    Edge,
    GeodesicEdge,
    GnssEdge,
    PoseAnchor,
    PreintImuEdge,
    PriorEdge,
    bias_walk_residual,
    correspondence_residual,
    geodesic_residual,
    gnss_residual,
)
from network.extract import NotEstimatedError, extract_boresight, extract_trajectory
from network.graph import FactorGraph, GraphConfig, GraphError, build_graph, keyframe_indices
from network.init import InitializationError, initial_state
from network.nodes import BiasNode, BoresightNode, InterpPoseNode, Node, PoseNode, VelocityNode
from network.preintegration import Preintegrated, preintegrate
from network.solver import LevenbergMarquardt, SolveReport, SolverConfig, SolverError, solve
from network.state import NavigationState

__all__ = [
    "BiasNode",
    "BiasWalkEdge",
    "BoresightNode",
    "CorrespondenceEdge",
    "Edge",
    "FactorGraph",
    "GeodesicEdge",
    "GnssEdge",
    "GraphConfig",
    "GraphError",
    "InitializationError",
    "InterpPoseNode",
    "LevenbergMarquardt",
    "NavigationState",
    "Node",
    "NotEstimatedError",
    "PoseAnchor",
    "PoseNode",
    "Preintegrated",
    "PreintImuEdge",
    "PriorEdge",
    "SolveReport",
    "SolverConfig",
    "SolverError",
    "VelocityNode",
    "bias_walk_residual",
    "build_graph",
    "correspondence_residual",
    "extract_boresight",
    "extract_trajectory",
    "geodesic_residual",
    "gnss_residual",
    "initial_state",
    "keyframe_indices",
    "preintegrate",
    "solve",
]
