#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Dynamic Network construction: keyframes, inertial chain, GNSS and LiDAR edges."""

import logging
from collections import Counter
from typing import Optional

import numpy as np
from pydantic import Field, model_validator

from constants import STREAM_SUBSAMPLE
from core.domain import Correspondence, GnssFix, ImuMeasurements
from core.models import BaseConfigModel
from geometry import Rotation, interpolate, so3
from network.edges import (
    BiasWalkEdge,
    CorrespondenceEdge,
    Edge,
    GeodesicEdge,
    GnssEdge,
    PoseAnchor,
    PreintImuEdge,
    PriorEdge,
)
from network.init import InitializationError, initial_state
from network.nodes import BiasNode, BoresightNode, InterpPoseNode, Node, PoseNode, VelocityNode
from network.preintegration import preintegrate
from network.state import NavigationState
from simulator.specs import ImuSpec, Vector3
from utils.random import rng_stream

logger = logging.getLogger(__name__)

_NAVCHIP = ImuSpec.navchip()

# rotation (rad), velocity (m/s), position (m)
IMU_COVARIANCE_FLOOR = np.array([1e-6] * 3 + [1e-5] * 3 + [1e-5] * 3)
GYRO_WALK_FLOOR = 1e-16
ACCEL_WALK_FLOOR = 1e-12
GYRO_BIAS_SIGMA_FLOOR = 1e-8
ACCEL_BIAS_SIGMA_FLOOR = 1e-6
GNSS_SIGMA_FLOOR = 1e-3


class GraphError(ValueError):
    """The graph cannot be built or is structurally inconsistent."""


class GraphConfig(BaseConfigModel):
    """How observations are turned into nodes and edges."""

    keyframe_hz: float = Field(default=10.0, gt=0.0)
    estimate_boresight: bool = False
    boresight: Vector3 = Field(default=(0.0, 0.0, 0.0), description="assumed, deg")
    lever_arm: Vector3 = (0.0, 0.0, -0.3)
    gnss_sigma: Optional[float] = Field(default=None, gt=0.0)
    geodesic_sigma_rot: float = Field(default=1e-4, gt=0.0)
    geodesic_sigma_trans: float = Field(default=1e-4, gt=0.0)
    huber: Optional[float] = Field(default=3.0, gt=0.0)
    interpolated_nodes: bool = True
    dedup_window: float = Field(default=1e-3, gt=0.0)
    gyro_noise_density: float = Field(default=_NAVCHIP.gyro_noise_density, ge=0.0)
    accel_noise_density: float = Field(default=_NAVCHIP.accel_noise_density, ge=0.0)
    gyro_bias_sigma: float = Field(default=_NAVCHIP.gyro_bias_sigma, ge=0.0)
    accel_bias_sigma: float = Field(default=_NAVCHIP.accel_bias_sigma, ge=0.0)
    gyro_bias_walk: float = Field(default=_NAVCHIP.gyro_bias_walk, ge=0.0)
    accel_bias_walk: float = Field(default=_NAVCHIP.accel_bias_walk, ge=0.0)
    max_correspondences: Optional[int] = Field(default=4000, ge=1)
    correspondence_sigma: Optional[float] = Field(default=None, gt=0.0)
    fix_first_pose: bool = False

    @model_validator(mode="after")
    def validate_dedup(self):
        """Node sharing must stay below the keyframe spacing."""
        if self.dedup_window >= 0.5 / self.keyframe_hz:
            raise ValueError("dedup-window must be shorter than half the keyframe interval")
        return self

    @classmethod
    def for_imu(cls, spec: ImuSpec, **overrides) -> "GraphConfig":
        """Stochastic model taken from a sensor error budget."""
        values = dict(
            gyro_noise_density=spec.gyro_noise_density,
            accel_noise_density=spec.accel_noise_density,
            gyro_bias_sigma=spec.gyro_bias_sigma,
            accel_bias_sigma=spec.accel_bias_sigma,
            gyro_bias_walk=spec.gyro_bias_walk,
            accel_bias_walk=spec.accel_bias_walk,
        )
        values.update(overrides)
        return cls(**values)


class FactorGraph:
    """Nodes and edges of one adjustment, in a fixed insertion order."""

    def __init__(self, lever_arm: Optional[np.ndarray] = None):
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self.keyframes: list[PoseNode] = []
        self.velocities: list[VelocityNode] = []
        self.biases: list[BiasNode] = []
        self.boresight: Optional[BoresightNode] = None
        lever_arm = np.zeros(3) if lever_arm is None else lever_arm
        self.lever_arm = np.asarray(lever_arm, dtype=float).reshape(3)
        self._members: set[int] = set()

    def add_node(self, node: Node) -> Node:
        """Register a node.

        Raises:
            GraphError: a second boresight node.
        """
        if isinstance(node, BoresightNode):
            if self.boresight is not None:
                raise GraphError("A graph holds at most one boresight node")
            self.boresight = node
        self.nodes.append(node)
        self._members.add(id(node))
        return node

    def add_edge(self, edge: Edge) -> Edge:
        """Register an edge whose nodes are already in the graph.

        Raises:
            GraphError: the edge references an unknown node.
        """
        missing = [node for node in edge.nodes() if id(node) not in self._members]
        if missing:
            raise GraphError(f"{edge.kind} edge references {len(missing)} unknown node(s)")
        self.edges.append(edge)
        return edge

    @property
    def times(self) -> np.ndarray:
        """Keyframe epochs."""
        return np.array([node.t for node in self.keyframes])

    @property
    def interp_nodes(self) -> list[InterpPoseNode]:
        """Interpolated pose nodes in creation order."""
        return [node for node in self.nodes if isinstance(node, InterpPoseNode)]

    def free_nodes(self) -> list[Node]:
        """Nodes the solver moves, with tangent offsets assigned in order."""
        offset = 0
        free = []
        for node in self.nodes:
            if node.fixed:
                node.offset = None
                continue
            node.offset = offset
            offset += node.dim
            free.append(node)
        return free

    def dimension(self) -> int:
        """Total tangent dimension of the free nodes."""
        return sum(node.dim for node in self.nodes if not node.fixed)

    def node_counts(self) -> dict[str, int]:
        """Number of nodes per kind."""
        return dict(Counter(node.kind for node in self.nodes))

    def edge_counts(self) -> dict[str, int]:
        """Number of edges per kind."""
        return dict(Counter(edge.kind for edge in self.edges))

    def cost(self) -> float:
        """Total robust cost."""
        return float(sum(edge.cost() for edge in self.edges))

    def chi2_by_kind(self) -> dict[str, float]:
        """Squared whitened residual norms summed per edge kind."""
        out: dict[str, float] = {}
        for edge in self.edges:
            r = edge.residual()
            out[edge.kind] = out.get(edge.kind, 0.0) + float(r @ r)
        return out

    def snapshot(self) -> list:
        """Values of all nodes."""
        return [node.snapshot() for node in self.nodes]

    def restore(self, values: list) -> None:
        """Reset all nodes from a snapshot."""
        for node, value in zip(self.nodes, values):
            node.restore(value)

    def state(self) -> NavigationState:
        """Keyframe poses, velocities and biases."""
        rotations = np.array([node.rotation for node in self.keyframes])
        biases = np.array([node.value for node in self.biases])
        return NavigationState(
            self.times,
            so3.matrix_to_quat(rotations),
            np.array([node.translation for node in self.keyframes]),
            np.array([node.value for node in self.velocities]),
            biases[:, :3],
            biases[:, 3:],
        )


def keyframe_indices(imu: ImuMeasurements, keyframe_hz: float) -> np.ndarray:
    """IMU sample indices kept as keyframes: every stride-th sample plus the last one."""
    stride = max(1, int(round(imu.rate / keyframe_hz)))
    idx = np.arange(0, len(imu), stride)
    if idx[-1] != len(imu) - 1:
        idx = np.append(idx, len(imu) - 1)
    return idx


class _Anchors:
    """Finds or creates the pose an observation at time t attaches to."""

    def __init__(self, graph: FactorGraph, config: GraphConfig):
        self.graph = graph
        self.config = config
        self.times = graph.times
        self.shared: dict[int, InterpPoseNode] = {}

    def __call__(self, t: float) -> PoseAnchor:
        times = self.times
        k = int(np.clip(np.searchsorted(times, t), 1, len(times) - 1))
        before, after = self.graph.keyframes[k - 1], self.graph.keyframes[k]
        for node in (before, after):
            if abs(node.t - t) <= self.config.dedup_window:
                return PoseAnchor.at(node)
        if not self.config.interpolated_nodes:
            return PoseAnchor.between(before, after, t)
        key = int(round(t / self.config.dedup_window))
        node = self.shared.get(key)
        if node is None:
            alpha = (t - before.t) / (after.t - before.t)
            pose = interpolate(before.transform, after.transform, alpha)
            node = InterpPoseNode(
                t, pose.rotation.as_matrix(), pose.translation, before, after
            )
            self.graph.add_node(node)
            self.graph.add_edge(
                GeodesicEdge(
                    node, self.config.geodesic_sigma_rot, self.config.geodesic_sigma_trans
                )
            )
            self.shared[key] = node
        return PoseAnchor.at(node)


def cap_correspondences(
    correspondences: list[Correspondence], limit: Optional[int], seed: int
) -> list[Correspondence]:
    """Seeded uniform subset of at most limit correspondences, in input order."""
    if limit is None or len(correspondences) <= limit:
        return list(correspondences)
    rng = rng_stream(seed, STREAM_SUBSAMPLE)
    keep = np.sort(rng.choice(len(correspondences), size=limit, replace=False))
    logger.info("Using %d of %d correspondences", limit, len(correspondences))
    return [correspondences[i] for i in keep]


def _start_state(
    imu: ImuMeasurements,
    gnss: list[GnssFix],
    times: np.ndarray,
    initial: Optional[NavigationState],
) -> NavigationState:
    if initial is not None:
        inside = np.clip(times, initial.t[0], initial.t[-1])
        state = initial.at(inside)
        state.t = times.copy()
        return state
    try:
        return initial_state(imu, gnss, times)
    except InitializationError as e:
        raise GraphError(str(e)) from e


def build_graph(
    imu: ImuMeasurements,
    gnss: list[GnssFix],
    correspondences: list[Correspondence],
    config: Optional[GraphConfig] = None,
    initial: Optional[NavigationState] = None,
    seed: int = 0,
) -> FactorGraph:
    """Assemble the Dynamic Network for one adjustment.

    Args:
        imu: inertial stream; keyframes are decimated from its epochs.
        gnss: position fixes, any order.
        correspondences: matched return pairs; each side becomes an interpolated pose.
        config: graph options.
        initial: warm start; otherwise GNSS-aligned dead reckoning.
        seed: run seed for the correspondence subsample.

    Raises:
        GraphError: too few IMU samples, no gauge (no GNSS and no fixed pose), no way to
            initialize, or a correspondence outside the IMU span.
    """
    config = config or GraphConfig()
    if len(imu) < 2:
        raise GraphError("The IMU stream needs at least two samples")
    if not gnss and not config.fix_first_pose:
        raise GraphError("No GNSS fixes: the graph has no datum unless the first pose is fixed")

    idx = keyframe_indices(imu, config.keyframe_hz)
    times = imu.t[idx]
    t0, t1 = times[0], times[-1]
    for c in correspondences:
        for t in (c.t_a, c.t_b):
            if not t0 <= t <= t1:
                raise GraphError(f"Correspondence time {t} outside the IMU span [{t0}, {t1}]")
    state = _start_state(imu, gnss, times, initial)

    graph = FactorGraph(np.asarray(config.lever_arm))
    rotations = so3.quat_to_matrix(state.quaternions)
    for k, t in enumerate(times):
        graph.keyframes.append(
            graph.add_node(PoseNode(t, rotations[k], state.positions[k]))
        )
        graph.velocities.append(graph.add_node(VelocityNode(t, state.velocities[k])))
        bias = np.concatenate([state.gyro_bias[k], state.accel_bias[k]])
        graph.biases.append(graph.add_node(BiasNode(t, bias)))
    if config.fix_first_pose:
        graph.keyframes[0].fixed = True
    boresight = BoresightNode(
        Rotation.from_euler(*config.boresight), fixed=not config.estimate_boresight
    )
    graph.add_node(boresight)

    prior_sigma = np.array(
        [max(config.gyro_bias_sigma, GYRO_BIAS_SIGMA_FLOOR)] * 3
        + [max(config.accel_bias_sigma, ACCEL_BIAS_SIGMA_FLOOR)] * 3
    )
    graph.add_edge(PriorEdge(graph.biases[0], np.zeros(6), prior_sigma))
    gyro_walk = max(config.gyro_bias_walk, GYRO_WALK_FLOOR)
    accel_walk = max(config.accel_bias_walk, ACCEL_WALK_FLOOR)
    for k in range(len(times) - 1):
        bias = graph.biases[k]
        preint = preintegrate(
            imu.segment(int(idx[k]), int(idx[k + 1])),
            bias.value,
            config.gyro_noise_density,
            config.accel_noise_density,
        )
        graph.add_edge(
            PreintImuEdge(
                graph.keyframes[k],
                graph.velocities[k],
                graph.keyframes[k + 1],
                graph.velocities[k + 1],
                bias,
                preint,
                IMU_COVARIANCE_FLOOR,
            )
        )
        graph.add_edge(BiasWalkEdge(bias, graph.biases[k + 1], gyro_walk, accel_walk))

    anchors = _Anchors(graph, config)
    outside = 0
    for fix in sorted(gnss, key=lambda f: f.t):
        if not t0 <= fix.t <= t1:
            outside += 1
            continue
        sigma = fix.sigma if config.gnss_sigma is None else config.gnss_sigma
        sigma = np.maximum(np.broadcast_to(sigma, (3,)), GNSS_SIGMA_FLOOR)
        graph.add_edge(GnssEdge(anchors(fix.t), fix.position, sigma))
    if outside:
        logger.warning("Ignored %d GNSS fixes outside the IMU span", outside)

    for c in cap_correspondences(correspondences, config.max_correspondences, seed):
        sigma = config.correspondence_sigma or c.sigma
        graph.add_edge(
            CorrespondenceEdge(
                anchors(c.t_a),
                anchors(c.t_b),
                boresight,
                c.v_a,
                c.v_b,
                graph.lever_arm,
                sigma,
                huber=config.huber,
            )
        )

    logger.info(
        "Graph with %d keyframes, nodes %s, edges %s",
        len(times),
        graph.node_counts(),
        graph.edge_counts(),
    )
    return graph
