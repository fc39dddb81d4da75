#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Edges of the Dynamic Network with whitened residuals and analytic Jacobians.

`linearize()` returns the whitened residual and one Jacobian block per free node, each
taken with respect to that node's retraction increment. Robust edges apply the kernel
as an iteratively reweighted square-root weight; `cost()` is the kernel value.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from constants import GRAVITY_VECTOR
from geometry import so3
from geometry.transform import (
    adjoint,
    interpolation_jacobians,
    se3_right_jacobian_inverse,
)
from network.nodes import BiasNode, BoresightNode, InterpPoseNode, Node, PoseNode, VelocityNode
from network.preintegration import Preintegrated

GRAVITY = np.asarray(GRAVITY_VECTOR)

Blocks = list[tuple[Node, np.ndarray]]


def huber_weight(norm: float, k: Optional[float]) -> float:
    """IRLS weight of the Huber kernel on a whitened residual norm."""
    if k is None or norm <= k:
        return 1.0
    return k / norm


def huber_cost(norm: float, k: Optional[float]) -> float:
    """Huber kernel value, half the squared norm inside the threshold."""
    if k is None or norm <= k:
        return 0.5 * norm * norm
    return k * norm - 0.5 * k * k


def _free(blocks: Blocks) -> Blocks:
    return [(node, jac) for node, jac in blocks if not node.fixed]


@dataclass
class PoseAnchor:
    """Where an observation takes its pose: a node, or the geodesic between two keyframes."""

    near: PoseNode
    far: Optional[PoseNode] = None
    alpha: float = 0.0

    @classmethod
    def at(cls, node: PoseNode) -> "PoseAnchor":
        """Anchor directly on a node."""
        return cls(node)

    @classmethod
    def between(cls, before: PoseNode, after: PoseNode, t: float) -> "PoseAnchor":
        """Anchor on the geodesic between two keyframes at time t."""
        return cls(before, after, (t - before.t) / (after.t - before.t))

    def nodes(self) -> list[PoseNode]:
        """Pose nodes this anchor depends on."""
        return [self.near] if self.far is None else [self.near, self.far]

    def evaluate(self) -> tuple[np.ndarray, np.ndarray, list[tuple[PoseNode, np.ndarray]]]:
        """Rotation, translation and d(right SE(3) perturbation)/d(node increment) maps."""
        if self.far is None:
            node = self.near
            return node.rotation, node.translation, [(node, node.tangent_map())]
        pose, jac_a, jac_b = interpolation_jacobians(
            self.near.transform, self.far.transform, self.alpha
        )
        maps = [
            (self.near, jac_a @ self.near.tangent_map()),
            (self.far, jac_b @ self.far.tangent_map()),
        ]
        return pose.rotation.as_matrix(), pose.translation, maps


class Edge:
    """Base edge."""

    kind = "edge"
    dim = 0
    robust: Optional[float] = None

    def nodes(self) -> list[Node]:
        """Nodes the residual depends on."""
        raise NotImplementedError

    def linearize(self) -> tuple[np.ndarray, Blocks]:
        """Whitened residual and Jacobian blocks of free nodes, robust weight applied."""
        residual, blocks = self.evaluate()
        weight = np.sqrt(huber_weight(float(np.linalg.norm(residual)), self.robust))
        return weight * residual, [(node, weight * jac) for node, jac in _free(blocks)]

    def evaluate(self) -> tuple[np.ndarray, Blocks]:
        """Whitened residual and Jacobian blocks of all nodes."""
        raise NotImplementedError

    def residual(self) -> np.ndarray:
        """Whitened residual."""
        return self.evaluate()[0]

    def cost(self) -> float:
        """Kernel value of the whitened residual."""
        return huber_cost(float(np.linalg.norm(self.residual())), self.robust)


class GnssEdge(Edge):
    """Position fix on a pose: (t - measured) / sigma per axis."""

    kind = "gnss"
    dim = 3

    def __init__(self, anchor: PoseAnchor, measured: np.ndarray, sigma: np.ndarray):
        sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (3,))
        if np.any(sigma <= 0.0):
            raise ValueError("GNSS sigma must be positive")
        self.anchor = anchor
        self.measured = np.asarray(measured, dtype=float).reshape(3)
        self.info = 1.0 / sigma

    def nodes(self) -> list[Node]:
        return list(self.anchor.nodes())

    def evaluate(self) -> tuple[np.ndarray, Blocks]:
        rotation, translation, maps = self.anchor.evaluate()
        r = self.info * (translation - self.measured)
        d_pose = np.zeros((3, 6))
        d_pose[:, 3:] = rotation
        return r, [(node, self.info[:, None] * d_pose @ m) for node, m in maps]


def gnss_residual(edge: GnssEdge) -> np.ndarray:
    """Whitened GNSS residual."""
    return edge.residual()


class PreintImuEdge(Edge):
    """Preintegrated inertial constraint between consecutive keyframes."""

    kind = "imu"
    dim = 9

    def __init__(
        self,
        pose_i: PoseNode,
        vel_i: VelocityNode,
        pose_j: PoseNode,
        vel_j: VelocityNode,
        bias: BiasNode,
        preint: Preintegrated,
        covariance_floor: np.ndarray,
    ):
        self.pose_i, self.vel_i = pose_i, vel_i
        self.pose_j, self.vel_j = pose_j, vel_j
        self.bias = bias
        self.preint = preint
        cov = preint.covariance + np.diag(np.asarray(covariance_floor, dtype=float) ** 2)
        # whitened r = L^T r with L L^T = cov^-1
        self.whiten = np.linalg.cholesky(np.linalg.inv(cov)).T

    def nodes(self) -> list[Node]:
        return [self.pose_i, self.vel_i, self.pose_j, self.vel_j, self.bias]

    def evaluate(self) -> tuple[np.ndarray, Blocks]:
        pre = self.preint
        dt = pre.dt
        ri, rj = self.pose_i.rotation, self.pose_j.rotation
        pi, pj = self.pose_i.translation, self.pose_j.translation
        vi, vj = self.vel_i.value, self.vel_j.value
        delta_r, delta_v, delta_p = pre.corrected(self.bias.value)
        dbg = self.bias.gyro - pre.bias[:3]

        r_rot = so3.log_matrix(delta_r.T @ ri.T @ rj)
        u_v = ri.T @ (vj - vi - GRAVITY * dt)
        u_p = ri.T @ (pj - pi - vi * dt - 0.5 * GRAVITY * dt * dt)
        residual = np.concatenate([r_rot, u_v - delta_v, u_p - delta_p])

        jr_inv = so3.right_jacobian_inverse(r_rot)
        d_pose_i = np.zeros((9, 6))
        d_pose_i[:3, :3] = -jr_inv @ rj.T @ ri
        d_pose_i[3:6, :3] = so3.hat(u_v)
        d_pose_i[6:, :3] = so3.hat(u_p)
        d_pose_i[6:, 3:] = -ri.T
        d_pose_j = np.zeros((9, 6))
        d_pose_j[:3, :3] = jr_inv
        d_pose_j[6:, 3:] = ri.T
        d_vel_i = np.zeros((9, 3))
        d_vel_i[3:6] = -ri.T
        d_vel_i[6:] = -ri.T * dt
        d_vel_j = np.zeros((9, 3))
        d_vel_j[3:6] = ri.T
        d_bias = np.zeros((9, 6))
        d_bias[:3, :3] = (
            -jr_inv
            @ so3.exp_matrix(-r_rot)
            @ so3.right_jacobian(pre.jac_r_bg @ dbg)
            @ pre.jac_r_bg
        )
        d_bias[3:6, :3] = -pre.jac_v_bg
        d_bias[3:6, 3:] = -pre.jac_v_ba
        d_bias[6:, :3] = -pre.jac_p_bg
        d_bias[6:, 3:] = -pre.jac_p_ba

        w = self.whiten
        return w @ residual, [
            (self.pose_i, w @ d_pose_i),
            (self.vel_i, w @ d_vel_i),
            (self.pose_j, w @ d_pose_j),
            (self.vel_j, w @ d_vel_j),
            (self.bias, w @ d_bias),
        ]


class GeodesicEdge(Edge):
    """Zero observation keeping an interpolated node on its keyframes' geodesic."""

    kind = "geodesic"
    dim = 6

    def __init__(self, node: InterpPoseNode, sigma_rot: float = 1e-4, sigma_trans: float = 1e-4):
        if sigma_rot <= 0.0 or sigma_trans <= 0.0:
            raise ValueError("Geodesic sigmas must be positive")
        self.node = node
        self.info = np.array([1.0 / sigma_rot] * 3 + [1.0 / sigma_trans] * 3)

    def nodes(self) -> list[Node]:
        return [self.node, self.node.before, self.node.after]

    def evaluate(self) -> tuple[np.ndarray, Blocks]:
        node = self.node
        interp, jac_a, jac_b = interpolation_jacobians(
            node.before.transform, node.after.transform, node.alpha
        )
        error = interp.inverse() * node.transform
        e = error.log()
        jr_inv = se3_right_jacobian_inverse(e)
        d_interp = -jr_inv @ adjoint(error.inverse())
        scale = self.info[:, None]
        return self.info * e, [
            (node, scale * jr_inv @ node.tangent_map()),
            (node.before, scale * d_interp @ jac_a @ node.before.tangent_map()),
            (node.after, scale * d_interp @ jac_b @ node.after.tangent_map()),
        ]


def geodesic_residual(edge: GeodesicEdge) -> np.ndarray:
    """Whitened tangent residual of a geodesic edge."""
    return edge.residual()


class CorrespondenceEdge(Edge):
    """Two returns of one physical point must georeference to the same place."""

    kind = "correspondence"
    dim = 3

    def __init__(
        self,
        anchor_a: PoseAnchor,
        anchor_b: PoseAnchor,
        boresight: BoresightNode,
        v_a: np.ndarray,
        v_b: np.ndarray,
        lever_arm: np.ndarray,
        sigma: float,
        huber: Optional[float] = 3.0,
    ):
        if sigma <= 0.0:
            raise ValueError("Correspondence sigma must be positive")
        self.anchor_a = anchor_a
        self.anchor_b = anchor_b
        self.boresight = boresight
        self.v_a = np.asarray(v_a, dtype=float).reshape(3)
        self.v_b = np.asarray(v_b, dtype=float).reshape(3)
        self.lever_arm = np.asarray(lever_arm, dtype=float).reshape(3)
        self.sigma = float(sigma)
        self.robust = huber

    def nodes(self) -> list[Node]:
        return [*self.anchor_a.nodes(), *self.anchor_b.nodes(), self.boresight]

    def evaluate(self) -> tuple[np.ndarray, Blocks]:
        mount = self.boresight.matrix
        ra, ta, maps_a = self.anchor_a.evaluate()
        rb, tb, maps_b = self.anchor_b.evaluate()
        qa = mount @ self.v_a + self.lever_arm
        qb = mount @ self.v_b + self.lever_arm
        scale = 1.0 / self.sigma
        residual = scale * (ra @ qa + ta - rb @ qb - tb)

        blocks: Blocks = []
        for sign, rot, q, maps in ((1.0, ra, qa, maps_a), (-1.0, rb, qb, maps_b)):
            d_pose = np.hstack([-rot @ so3.hat(q), rot])
            blocks.extend((node, sign * scale * d_pose @ m) for node, m in maps)
        d_mount = -ra @ mount @ so3.hat(self.v_a) + rb @ mount @ so3.hat(self.v_b)
        blocks.append((self.boresight, scale * d_mount))
        return residual, _merge(blocks)


def correspondence_residual(edge: CorrespondenceEdge) -> np.ndarray:
    """Whitened correspondence residual, before the robust weight."""
    return edge.residual()


class BiasWalkEdge(Edge):
    """Random-walk increment between consecutive bias nodes."""

    kind = "bias-walk"
    dim = 6

    def __init__(self, bias_i: BiasNode, bias_j: BiasNode, gyro_psd: float, accel_psd: float):
        dt = bias_j.t - bias_i.t
        if dt <= 0.0:
            raise ValueError("Bias nodes must be time ordered")
        if gyro_psd <= 0.0 or accel_psd <= 0.0:
            raise ValueError("Bias walk PSDs must be positive")
        self.bias_i, self.bias_j = bias_i, bias_j
        self.info = np.array(
            [1.0 / np.sqrt(gyro_psd * dt)] * 3 + [1.0 / np.sqrt(accel_psd * dt)] * 3
        )

    def nodes(self) -> list[Node]:
        return [self.bias_i, self.bias_j]

    def evaluate(self) -> tuple[np.ndarray, Blocks]:
        w = np.diag(self.info)
        r = self.info * (self.bias_j.value - self.bias_i.value)
        return r, [(self.bias_i, -w), (self.bias_j, w)]


def bias_walk_residual(edge: BiasWalkEdge) -> np.ndarray:
    """Whitened bias increment."""
    return edge.residual()


class PriorEdge(Edge):
    """Gaussian prior on a Euclidean node."""

    kind = "prior"

    def __init__(self, node: Node, mean: np.ndarray, sigma: np.ndarray):
        sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (node.dim,))
        if np.any(sigma <= 0.0):
            raise ValueError("Prior sigma must be positive")
        self.node = node
        self.mean = np.asarray(mean, dtype=float).reshape(node.dim)
        self.info = 1.0 / sigma
        self.dim = node.dim

    def nodes(self) -> list[Node]:
        return [self.node]

    def evaluate(self) -> tuple[np.ndarray, Blocks]:
        return self.info * (self.node.value - self.mean), [(self.node, np.diag(self.info))]


def _merge(blocks: Blocks) -> Blocks:
    """Sum blocks that refer to the same node (e.g. both sides on one keyframe)."""
    merged: dict[int, tuple[Node, np.ndarray]] = {}
    for node, jac in blocks:
        key = id(node)
        if key in merged:
            merged[key] = (node, merged[key][1] + jac)
        else:
            merged[key] = (node, jac)
    return list(merged.values())

