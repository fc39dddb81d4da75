# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for the Dynamic Network: edges, preintegration, graph and solver."""

import sys
from pathlib import Path

import numpy as np
import pytest
from conftest import random_quaternions
from pydantic import ValidationError

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from core.domain import Correspondence, ImuMeasurements  # noqa: E402
from geometry import Rotation, so3  # noqa: E402
from network import (  # noqa: E402
    BiasNode,
    BiasWalkEdge,
    BoresightNode,
    CorrespondenceEdge,
    FactorGraph,
    GeodesicEdge,
    GnssEdge,
    GraphConfig,
    GraphError,
    InterpPoseNode,
    LevenbergMarquardt,
    NavigationState,
    NotEstimatedError,
    PoseAnchor,
    PoseNode,
    PreintImuEdge,
    PriorEdge,
    SolverConfig,
    VelocityNode,
    build_graph,
    extract_boresight,
    extract_trajectory,
    keyframe_indices,
    preintegrate,
    solve,
)
from network.graph import IMU_COVARIANCE_FLOOR  # noqa: E402
from simulator import (  # noqa: E402
    FlightPlan,
    GnssSpec,
    ImuSpec,
    generate_trajectory,
    synthesize_gnss,
    synthesize_imu,
)

EPS = 1e-6


def _pose(rng, t, angle=0.5, fixed=False) -> PoseNode:
    q = random_quaternions(rng, 1, angle)[0]
    return PoseNode(t, so3.quat_to_matrix(q), rng.uniform(-50.0, 50.0, 3), fixed=fixed)


def _imu_segment(rng, count=11, rate=100.0) -> ImuMeasurements:
    t = np.arange(count) / rate
    gyro = rng.normal(0.0, 0.3, size=(count, 3))
    accel = np.array([0.0, 0.0, 9.81]) + rng.normal(0.0, 1.0, size=(count, 3))
    return ImuMeasurements(t, gyro, accel)


def _check_jacobians(edge, rtol=1e-4):
    """Compare every analytic block with central differences through the node retraction."""
    _, blocks = edge.evaluate()
    assert blocks
    for node, jac in blocks:
        numeric = np.zeros_like(jac)
        for k in range(node.dim):
            step = np.zeros(node.dim)
            step[k] = EPS
            saved = node.snapshot()
            node.retract(step)
            plus = edge.residual()
            node.restore(saved)
            node.retract(-step)
            minus = edge.residual()
            node.restore(saved)
            numeric[:, k] = (plus - minus) / (2.0 * EPS)
        scale = max(1.0, float(np.abs(jac).max()))
        assert np.allclose(jac, numeric, rtol=rtol, atol=1e-5 * scale), node.kind


@pytest.fixture(scope="module")
def flight():
    """Ten seconds of dithered flight with a perfect IMU and noiseless GNSS."""
    plan = FlightPlan(lines=1, line_length=120.0, run_in=0.0)
    truth = generate_trajectory(plan, 100.0, seed=11)
    imu = synthesize_imu(truth, ImuSpec.perfect(rate=100.0), seed=0)
    gnss = synthesize_gnss(truth, GnssSpec(sigma=(0.0, 0.0, 0.0)), seed=0)
    return truth, imu, gnss


class TestEdgeJacobians:
    """Analytic Jacobians agree with numeric differentiation."""

    def test_gnss_on_node(self, rng):
        """Position fix on a keyframe."""
        node = _pose(rng, 0.0)
        _check_jacobians(GnssEdge(PoseAnchor.at(node), rng.normal(size=3), [0.5, 0.5, 1.0]))

    def test_gnss_between_keyframes(self, rng):
        """Position fix on the geodesic between two keyframes."""
        a, b = _pose(rng, 0.0), _pose(rng, 0.1)
        b.rotation = a.rotation @ so3.exp_matrix(rng.normal(0.0, 0.05, 3))
        b.translation = a.translation + rng.normal(0.0, 1.0, 3)
        _check_jacobians(GnssEdge(PoseAnchor.between(a, b, 0.037), np.zeros(3), 0.02))

    def test_preintegrated_imu(self, rng):
        """Inertial edge with a bias away from the linearization point."""
        imu = _imu_segment(rng)
        bias0 = rng.normal(0.0, 1e-3, 6)
        pre = preintegrate(imu, bias0, 1e-3, 1e-2)
        pose_i = _pose(rng, 0.0)
        pose_j = PoseNode(
            0.1,
            pose_i.rotation @ pre.delta_r @ so3.exp_matrix(rng.normal(0.0, 0.02, 3)),
            pose_i.translation + rng.normal(0.0, 1.0, 3),
        )
        vel_i = VelocityNode(0.0, rng.normal(0.0, 10.0, 3))
        vel_j = VelocityNode(0.1, rng.normal(0.0, 10.0, 3))
        bias = BiasNode(0.0, bias0 + rng.normal(0.0, 1e-3, 6))
        edge = PreintImuEdge(pose_i, vel_i, pose_j, vel_j, bias, pre, IMU_COVARIANCE_FLOOR)
        _check_jacobians(edge)

    def test_geodesic(self, rng):
        """Interpolated node held on its keyframes' geodesic."""
        a, b = _pose(rng, 0.0), _pose(rng, 0.1)
        b.rotation = a.rotation @ so3.exp_matrix(rng.normal(0.0, 0.1, 3))
        node = InterpPoseNode(0.04, a.rotation, a.translation + 0.3, a, b)
        node.retract(rng.normal(0.0, 0.01, 6))
        _check_jacobians(GeodesicEdge(node, 1e-2, 1e-2))

    def test_correspondence(self, rng):
        """L-edge over a keyframe, an interpolated anchor and a free boresight."""
        a = _pose(rng, 0.0)
        b, c = _pose(rng, 5.0), _pose(rng, 5.1)
        c.rotation = b.rotation @ so3.exp_matrix(rng.normal(0.0, 0.05, 3))
        boresight = BoresightNode(Rotation.from_euler(0.3, -0.2, 1.0))
        edge = CorrespondenceEdge(
            PoseAnchor.at(a),
            PoseAnchor.between(b, c, 5.06),
            boresight,
            np.array([0.0, 20.0, -110.0]),
            np.array([0.0, -30.0, -100.0]),
            np.array([0.0, 0.0, -0.3]),
            sigma=0.05,
            huber=None,
        )
        _check_jacobians(edge)

    def test_fixed_nodes_have_no_blocks(self, rng):
        """linearize drops fixed nodes."""
        a = _pose(rng, 0.0)
        b = _pose(rng, 1.0)
        boresight = BoresightNode(Rotation.identity(), fixed=True)
        edge = CorrespondenceEdge(
            PoseAnchor.at(a), PoseAnchor.at(b), boresight, np.ones(3), np.ones(3), np.zeros(3), 1.0
        )
        _, blocks = edge.linearize()
        assert [node.kind for node, _ in blocks] == ["pose", "pose"]

    def test_bias_walk_and_prior(self, rng):
        """Euclidean edges."""
        b0 = BiasNode(0.0, rng.normal(size=6))
        b1 = BiasNode(0.1, rng.normal(size=6))
        _check_jacobians(BiasWalkEdge(b0, b1, 1e-10, 1e-6))
        _check_jacobians(PriorEdge(b0, np.zeros(6), np.full(6, 0.1)))

    def test_invalid_sigmas(self, rng):
        """Non-positive sigmas are rejected."""
        node = _pose(rng, 0.0)
        with pytest.raises(ValueError):
            GnssEdge(PoseAnchor.at(node), np.zeros(3), 0.0)
        with pytest.raises(ValueError):
            BiasWalkEdge(BiasNode(1.0, np.zeros(6)), BiasNode(0.0, np.zeros(6)), 1.0, 1.0)


class TestPreintegration:
    """Tests for inertial preintegration."""

    def test_constant_rate_and_force(self):
        """Constant inputs integrate in closed form."""
        count = 101
        t = np.arange(count) / 100.0
        w = np.array([0.0, 0.0, 0.2])
        f = np.array([1.0, 0.0, 0.0])
        imu = ImuMeasurements(t, np.tile(w, (count, 1)), np.tile([0.0, 0.0, 0.0], (count, 1)))
        pre = preintegrate(imu, np.zeros(6))
        assert np.allclose(pre.delta_r, so3.exp_matrix(w * 1.0), atol=1e-12)
        assert np.allclose(pre.delta_v, 0.0)
        still = ImuMeasurements(t, np.zeros((count, 3)), np.tile(f, (count, 1)))
        pre = preintegrate(still, np.zeros(6))
        assert np.allclose(pre.delta_v, f * 1.0, atol=1e-12)
        assert np.allclose(pre.delta_p, 0.5 * f, atol=1e-12)
        assert pre.dt == pytest.approx(1.0)

    def test_bias_correction_is_first_order(self, rng):
        """Corrected deltas match a re-integration with the new bias to second order."""
        imu = _imu_segment(rng, count=21)
        bias = rng.normal(0.0, 1e-3, 6)
        change = rng.normal(0.0, 1e-5, 6)
        pre = preintegrate(imu, bias)
        exact = preintegrate(imu, bias + change)
        delta_r, delta_v, delta_p = pre.corrected(bias + change)
        assert np.allclose(delta_r, exact.delta_r, atol=1e-9)
        assert np.allclose(delta_v, exact.delta_v, atol=1e-9)
        assert np.allclose(delta_p, exact.delta_p, atol=1e-9)

    def test_covariance_grows(self, rng):
        """Noise densities give a covariance growing with time."""
        imu = _imu_segment(rng, count=21)
        short = preintegrate(imu.segment(0, 10), np.zeros(6), 1e-3, 1e-2)
        long = preintegrate(imu, np.zeros(6), 1e-3, 1e-2)
        assert np.all(np.diag(short.covariance) > 0.0)
        assert np.trace(long.covariance) > np.trace(short.covariance)

    def test_needs_two_samples(self):
        """A single sample spans no time."""
        imu = ImuMeasurements(np.zeros(1), np.zeros((1, 3)), np.zeros((1, 3)))
        with pytest.raises(ValueError):
            preintegrate(imu, np.zeros(6))


class TestGraph:
    """Tests for graph assembly."""

    def test_keyframe_indices(self):
        """Every stride-th sample plus the last."""
        imu = ImuMeasurements(np.arange(1005) / 100.0, np.zeros((1005, 3)), np.zeros((1005, 3)))
        idx = keyframe_indices(imu, 10.0)
        assert idx[:3].tolist() == [0, 10, 20]
        assert idx[-1] == 1004

    def test_counts(self, flight):
        """One pose, velocity and bias per keyframe; GNSS shares keyframe poses."""
        _, imu, gnss = flight
        graph = build_graph(imu, gnss, [], GraphConfig.for_imu(ImuSpec.perfect()))
        assert graph.node_counts() == {"pose": 101, "velocity": 101, "bias": 101, "boresight": 1}
        assert graph.edge_counts() == {"prior": 1, "imu": 100, "bias-walk": 100, "gnss": 101}

    def test_correspondences_add_shared_interpolated_nodes(self, flight):
        """Each off-keyframe time gets one interpolated node and one geodesic edge."""
        _, imu, gnss = flight
        v = np.array([0.0, 0.0, -100.0])
        pairs = [
            Correspondence(2.345, v, 1, 7.5551, v, 1, 0.05),
            Correspondence(2.345, v, 1, 3.0004, v, 1, 0.05),
        ]
        graph = build_graph(imu, gnss, pairs)
        assert graph.node_counts()["interp-pose"] == 2
        assert graph.edge_counts()["geodesic"] == 2
        assert graph.edge_counts()["correspondence"] == 2

    def test_correspondence_outside_span(self, flight):
        """Correspondence times must lie inside the IMU span."""
        _, imu, gnss = flight
        v = np.ones(3)
        with pytest.raises(GraphError):
            build_graph(imu, gnss, [Correspondence(1.0, v, 1, 50.0, v, 2, 0.1)])

    def test_needs_a_datum(self, flight):
        """Without GNSS the first pose must be fixed."""
        _, imu, _ = flight
        with pytest.raises(GraphError):
            build_graph(imu, [], [])

    def test_fixed_first_pose_with_warm_start(self, flight):
        """A warm start replaces GNSS initialization."""
        truth, imu, _ = flight
        config = GraphConfig(fix_first_pose=True)
        graph = build_graph(imu, [], [], config, NavigationState.from_trajectory(truth))
        assert graph.keyframes[0].fixed
        assert graph.dimension() == (101 * 15 - 6)

    def test_second_boresight_rejected(self):
        """A graph has one mounting."""
        graph = FactorGraph()
        graph.add_node(BoresightNode(Rotation.identity()))
        with pytest.raises(GraphError):
            graph.add_node(BoresightNode(Rotation.identity()))

    def test_unknown_node_rejected(self, rng):
        """Edges may only reference registered nodes."""
        graph = FactorGraph()
        with pytest.raises(GraphError):
            graph.add_edge(GnssEdge(PoseAnchor.at(_pose(rng, 0.0)), np.zeros(3), 1.0))

    def test_dedup_window_validated(self):
        """Node sharing must stay below half the keyframe spacing."""
        with pytest.raises(ValidationError):
            GraphConfig(keyframe_hz=1000.0, dedup_window=1e-3)


class TestSolver:
    """Tests for Levenberg-Marquardt."""

    def _robust_problem(self):
        graph = FactorGraph()
        node = graph.add_node(PoseNode(0.0, np.eye(3), np.array([5.0, 0.0, 0.0])))
        for x in (0.0, 0.0, 10.0):
            edge = GnssEdge(PoseAnchor.at(node), np.array([x, 0.0, 0.0]), 1.0)
            edge.robust = 1.0
            graph.add_edge(edge)
        return graph, node

    def test_prior_problem_converges(self):
        """A quadratic problem is solved exactly."""
        graph = FactorGraph()
        node = graph.add_node(BiasNode(0.0, np.ones(6)))
        graph.add_edge(PriorEdge(node, np.arange(6.0), np.full(6, 0.1)))
        report = solve(graph, SolverConfig(use_cholmod=False))
        assert report.converged
        assert np.allclose(node.value, np.arange(6.0), atol=1e-8)
        assert report.final_cost < 1e-12
        assert report.boresight is None

    def test_huber_limits_outlier_pull(self):
        """With Huber at 1 the minimum sits at 0.5, least squares at the mean."""
        graph, node = self._robust_problem()
        solve(graph, SolverConfig(use_cholmod=False, relative_tolerance=1e-12))
        assert node.translation[0] == pytest.approx(0.5, abs=1e-4)
        graph, node = self._robust_problem()
        config = SolverConfig(use_cholmod=False, robust_kernel="none", relative_tolerance=1e-12)
        solve(graph, config)
        assert node.translation[0] == pytest.approx(10.0 / 3.0, abs=1e-4)

    def test_no_free_nodes(self):
        """An all-fixed graph terminates immediately."""
        graph = FactorGraph()
        graph.add_node(BoresightNode(Rotation.identity(), fixed=True))
        report = solve(graph)
        assert report.termination == "no-free-nodes"
        assert report.iterations == 0

    def test_gnss_imu_adjustment(self, flight):
        """Noisy GNSS fused with a perfect IMU tracks the truth to centimetres."""
        truth, imu, _ = flight
        gnss = synthesize_gnss(truth, GnssSpec(), seed=5)
        graph = build_graph(imu, gnss, [], GraphConfig.for_imu(ImuSpec.perfect()))
        report = solve(graph, SolverConfig(use_cholmod=False))
        assert report.final_cost < report.initial_cost
        assert report.cost_trace[0] == report.initial_cost
        adjusted = extract_trajectory(graph, 100.0)
        _, positions = truth.interpolate(adjusted.t)
        error = np.linalg.norm(adjusted.positions - positions, axis=1)
        assert np.sqrt(np.mean(error**2)) < 0.05
        with pytest.raises(NotEstimatedError):
            extract_boresight(graph)

    def test_extracted_grid_keeps_keyframes(self, flight):
        """Output epochs include the first and last keyframe at the requested rate."""
        _, imu, gnss = flight
        graph = build_graph(imu, gnss, [])
        out = extract_trajectory(graph, 50.0)
        assert out.t[0] == graph.keyframes[0].t
        assert out.t[-1] == graph.keyframes[-1].t
        assert np.allclose(np.diff(out.t), 0.02)
        with pytest.raises(ValueError):
            extract_trajectory(graph, 0.0)

    def test_boresight_recovery(self, flight):
        """Noiseless correspondences recover a mounting offset."""
        truth, imu, gnss = flight
        rng = np.random.default_rng(21)
        true_mount = Rotation.from_euler(0.3, -0.2, 0.4)
        lever = np.array([0.0, 0.0, -0.3])
        model = truth.resample(truth.t[::10])
        pairs = []
        while len(pairs) < 100:
            ta, tb = np.sort(rng.uniform(0.5, 9.5, 2))
            if tb - ta < 1.0:
                continue
            (qa, qb), (pa, pb) = model.interpolate([ta, tb])
            angle = np.radians(rng.uniform(-25.0, 25.0))
            v_a = rng.uniform(100.0, 130.0) * np.array([0.0, np.sin(angle), -np.cos(angle)])
            ground = so3.quat_rotate(qa, true_mount.apply(v_a) + lever) + pa
            v_b = true_mount.inverse().apply(
                so3.quat_rotate(so3.quat_conjugate(qb), ground - pb) - lever
            )
            pairs.append(Correspondence(ta, v_a, 1, tb, v_b, 1, 0.05))
        config = GraphConfig.for_imu(ImuSpec.perfect(), estimate_boresight=True)
        graph = build_graph(imu, gnss, pairs, config, NavigationState.from_trajectory(truth))
        report = solve(graph, SolverConfig(use_cholmod=False))
        estimated = extract_boresight(graph)
        assert np.degrees(estimated.distance(true_mount)) < 0.01
        assert report.boresight is not None
        assert np.allclose(report.boresight, true_mount.to_euler(), atol=0.01)


class TestRelativeObservability:
    """Tests for what correspondences alone can pin down."""

    @pytest.fixture
    def information(self, rng):
        """Fisher information of three poses tied only by consistent correspondences."""
        graph = FactorGraph()
        boresight = graph.add_node(BoresightNode(Rotation.identity(), fixed=True))
        poses = [graph.add_node(_pose(rng, float(i))) for i in range(3)]
        for a, b in ((0, 1), (1, 2), (0, 2)):
            for point in rng.uniform([-40.0, -40.0, -5.0], [40.0, 40.0, 5.0], size=(8, 3)):
                v = [poses[k].rotation.T @ (point - poses[k].translation) for k in (a, b)]
                graph.add_edge(
                    CorrespondenceEdge(
                        PoseAnchor.at(poses[a]),
                        PoseAnchor.at(poses[b]),
                        boresight,
                        v[0],
                        v[1],
                        np.zeros(3),
                        sigma=0.05,
                        huber=None,
                    )
                )
        graph.free_nodes()
        solver = LevenbergMarquardt(SolverConfig(robust_kernel="none"))
        hessian, _ = solver.linearize(graph, graph.dimension())
        return hessian.toarray()

    @staticmethod
    def _null_space(matrix):
        values, vectors = np.linalg.eigh(matrix)
        small = values < 1e-10 * values.max()
        return vectors[:, small]

    def test_common_translation_is_unobservable(self, information):
        """Shifting every pose together leaves the correspondences unchanged."""
        for axis in range(3):
            shift = np.zeros(18)
            shift[[3 + axis, 9 + axis, 15 + axis]] = 1.0
            assert np.allclose(information @ shift, 0.0, atol=1e-8 * np.abs(information).max())
        single = np.zeros(18)
        single[9] = 1.0
        assert single @ information @ single > 1.0

    def test_known_attitude_leaves_only_common_translation(self, information):
        """With attitude held the null space is exactly the three common shifts."""
        translation = np.concatenate([np.arange(6 * k + 3, 6 * k + 6) for k in range(3)])
        null = self._null_space(information[np.ix_(translation, translation)])
        assert null.shape[1] == 3
        common = np.tile(np.eye(3), (3, 1)) / np.sqrt(3.0)
        # The null space and the common shifts span the same subspace.
        assert np.allclose(null @ null.T, common @ common.T, atol=1e-8)

    def test_free_attitude_adds_common_rotation(self, information):
        """With attitude free a rigid motion of the whole block is also unobservable."""
        assert self._null_space(information).shape[1] == 6
