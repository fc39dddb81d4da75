# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for flight, sensor and LiDAR synthesis."""

import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from constants import GRAVITY  # noqa: E402
from core.domain import Trajectory  # noqa: E402
from geometry import Rotation, so3  # noqa: E402
from simulator import (  # noqa: E402
    FlightPlan,
    FlightPlanError,
    GnssSpec,
    ImuSpec,
    LidarSpec,
    RateMismatchError,
    Scene,
    SceneSpec,
    generate_scene,
    generate_trajectory,
    georeference,
    scan_scene,
    scene_bounds,
    spacing_for_overlap,
    swath_width,
    synthesize_gnss,
    synthesize_imu,
)


@pytest.fixture
def plan() -> FlightPlan:
    """Two short lines, 40% side overlap at 120 m."""
    return FlightPlan(line_length=120.0, run_in=24.0).with_spacing_for(
        LidarSpec().swath(120.0)
    )


@pytest.fixture
def level_plan() -> FlightPlan:
    """One straight undithered line."""
    return FlightPlan(
        lines=1,
        line_length=120.0,
        run_in=0.0,
        roll_amplitude=0.0,
        pitch_amplitude=0.0,
        yaw_amplitude=0.0,
    )


class TestSpecs:
    """Tests for the plan and sensor specifications."""

    def test_swath_and_spacing(self):
        """Swath follows the scan half angle; spacing keeps the overlap."""
        swath = swath_width(120.0, 45.0)
        assert swath == pytest.approx(240.0)
        assert spacing_for_overlap(swath, 0.4) == pytest.approx(144.0)

    def test_overlap_out_of_range(self):
        """Overlap must lie strictly between 0 and 1."""
        with pytest.raises(ValueError):
            spacing_for_overlap(100.0, 1.0)

    def test_explicit_spacing_is_kept(self):
        """with_spacing_for leaves an explicit spacing alone."""
        plan = FlightPlan(line_spacing=50.0)
        assert plan.with_spacing_for(500.0).line_spacing == 50.0

    def test_overlapping_outages_rejected(self):
        """Outage windows may not overlap."""
        with pytest.raises(ValidationError):
            GnssSpec(outages=[(0.0, 10.0), (5.0, 20.0)])

    def test_outage_is_inclusive(self):
        """Both window ends count as outage."""
        spec = GnssSpec(outages=[(10.0, 20.0)])
        assert spec.in_outage(10.0) and spec.in_outage(20.0)
        assert not spec.in_outage(20.1)

    def test_imu_presets(self):
        """The reference unit is far better than the MEMS unit."""
        assert ImuSpec.airins().gyro_bias_sigma < ImuSpec.navchip().gyro_bias_sigma / 100
        assert ImuSpec.perfect().gyro_noise_density == 0.0


class TestTrajectoryGeneration:
    """Tests for ground-truth flight generation."""

    def test_sampled_at_rate_with_windows(self, plan):
        """Epochs are spaced 1/rate; one window per survey line."""
        truth = generate_trajectory(plan, 200.0, seed=1)
        assert np.allclose(np.diff(truth.t), 1.0 / 200.0)
        assert len(truth.line_windows) == 2
        (s0, e0), (s1, e1) = truth.line_windows
        assert e0 - s0 == pytest.approx(plan.line_duration, rel=1e-3)
        assert s1 > e0

    def test_speed_on_lines(self, plan):
        """Ground speed on the lines is the plan speed."""
        truth = generate_trajectory(plan, 100.0, seed=1)
        s0, e0 = truth.line_windows[0]
        mid = 0.5 * (s0 + e0)
        on_line = np.abs(truth.t - mid) < 2.0
        speed = np.linalg.norm(truth.velocities[on_line], axis=1)
        assert np.allclose(speed, plan.speed, rtol=1e-2)

    def test_heading_follows_track(self, level_plan):
        """Without dither the body x axis points along the flight line (East)."""
        truth = generate_trajectory(level_plan, 100.0, seed=1)
        euler = truth.euler()
        assert np.allclose(euler[:, 2], 0.0, atol=1e-6)
        assert np.allclose(euler[:, :2], 0.0, atol=1e-9)

    def test_dither_amplitudes(self, plan):
        """Roll and pitch stay within their dither amplitudes."""
        truth = generate_trajectory(plan, 100.0, seed=3)
        euler = truth.euler()
        assert np.abs(euler[:, 0]).max() <= plan.roll_amplitude + 1e-9
        assert np.abs(euler[:, 1]).max() <= plan.pitch_amplitude + 1e-9
        assert np.abs(euler[:, 0]).max() > 0.1

    def test_same_seed_same_flight(self, plan):
        """The trajectory is a function of plan and seed."""
        a = generate_trajectory(plan, 100.0, seed=5)
        b = generate_trajectory(plan, 100.0, seed=5)
        assert np.array_equal(a.quaternions, b.quaternions)

    def test_unresolved_spacing(self):
        """Several lines need a spacing."""
        with pytest.raises(FlightPlanError):
            generate_trajectory(FlightPlan(lines=3), 100.0, seed=0)

    def test_coincident_waypoints(self):
        """Repeated waypoints cannot be flown."""
        plan = FlightPlan(waypoints=[(0.0, 0.0, 100.0), (0.0, 0.0, 100.0)])
        with pytest.raises(FlightPlanError):
            generate_trajectory(plan, 100.0, seed=0)

    def test_body_rates_match_attitude(self, plan):
        """Angular rates integrate to the attitude change between samples."""
        truth = generate_trajectory(plan, 200.0, seed=2)
        dt = 1.0 / 200.0
        for k in range(0, len(truth) - 1, 97):
            step = so3.quat_multiply(
                so3.quat_conjugate(truth.quaternions[k]), truth.quaternions[k + 1]
            )
            mid = 0.5 * (truth.angular_rates[k] + truth.angular_rates[k + 1])
            assert np.allclose(so3.log_quat(step) / dt, mid, atol=2e-3)


class TestSensors:
    """Tests for IMU and GNSS synthesis."""

    def test_perfect_imu_at_rest_reads_gravity(self):
        """A level hovering body senses +g on its z axis and no rotation."""
        t = np.arange(0.0, 1.0, 0.01)
        truth = Trajectory(
            t,
            np.tile([1.0, 0.0, 0.0, 0.0], (len(t), 1)),
            np.zeros((len(t), 3)),
            velocities=np.zeros((len(t), 3)),
            angular_rates=np.zeros((len(t), 3)),
            accelerations=np.zeros((len(t), 3)),
        )
        imu = synthesize_imu(truth, ImuSpec.perfect(rate=100.0), seed=0)
        assert np.allclose(imu.gyro, 0.0)
        assert np.allclose(imu.accel, [0.0, 0.0, GRAVITY])

    def test_rate_mismatch(self, plan):
        """The truth must be sampled at the IMU rate."""
        truth = generate_trajectory(plan, 100.0, seed=0)
        with pytest.raises(RateMismatchError):
            synthesize_imu(truth, ImuSpec(rate=200.0), seed=0)

    def test_bias_series_attached(self, plan):
        """The true biases travel with the measurements."""
        truth = generate_trajectory(plan, 200.0, seed=0)
        imu = synthesize_imu(truth, ImuSpec.navchip(), seed=0)
        assert imu.gyro_bias.shape == imu.gyro.shape
        assert np.abs(imu.gyro_bias[0]).max() > 0.0

    def test_gnss_outage_removes_fixes(self, plan):
        """No fix falls inside an outage; fixes outside it are unchanged."""
        truth = generate_trajectory(plan, 100.0, seed=0)
        clean = synthesize_gnss(truth, GnssSpec(), seed=4)
        gappy = synthesize_gnss(truth, GnssSpec(outages=[(5.0, 10.0)]), seed=4)
        assert not any(5.0 <= f.t <= 10.0 for f in gappy)
        assert len(clean) - len(gappy) == 51
        outside = {f.t: f.position for f in clean if not 5.0 <= f.t <= 10.0}
        for fix in gappy:
            assert np.array_equal(outside[fix.t], fix.position)

    def test_gnss_rate(self, plan):
        """Fixes come at the receiver rate."""
        truth = generate_trajectory(plan, 100.0, seed=0)
        fixes = synthesize_gnss(truth, GnssSpec(rate=5.0), seed=0)
        assert np.allclose(np.diff([f.t for f in fixes]), 0.2)


class TestScene:
    """Tests for scene generation and ray casting."""

    def test_flat_ground_range(self):
        """A nadir ray from 100 m hits flat ground at range 100."""
        scene = Scene.flat((-50.0, -50.0, 50.0, 50.0))
        ranges = scene.intersect(np.array([[0.0, 0.0, 100.0]]), np.array([[0.0, 0.0, -1.0]]))
        assert ranges[0] == pytest.approx(100.0)

    def test_upward_ray_misses(self):
        """Rays away from the ground return inf."""
        scene = Scene.flat((-50.0, -50.0, 50.0, 50.0))
        ranges = scene.intersect(np.array([[0.0, 0.0, 100.0]]), np.array([[0.0, 0.0, 1.0]]))
        assert np.isinf(ranges[0])

    def test_bounds_cover_footprint(self):
        """Bounds pad the flight extent by half swath plus margin."""
        positions = np.array([[0.0, 0.0, 100.0], [200.0, 50.0, 100.0]])
        assert scene_bounds(positions, 50.0, 10.0) == (-60.0, -60.0, 260.0, 110.0)

    def test_generation_is_seeded(self):
        """The same seed gives the same primitives."""
        spec = SceneSpec(bounds=(0.0, 0.0, 300.0, 200.0))
        a = generate_scene(spec, seed=9)
        b = generate_scene(spec, seed=9)
        assert a.primitive_count == b.primitive_count > 0
        assert np.array_equal(a.ground.heights, b.ground.heights)

    def test_unresolved_bounds(self):
        """Generation needs bounds."""
        with pytest.raises(ValueError):
            generate_scene(SceneSpec(), seed=0)


class TestLidar:
    """Tests for scanning and direct georeferencing."""

    @pytest.fixture
    def truth(self, level_plan) -> Trajectory:
        """Level line flown at 100 Hz."""
        return generate_trajectory(level_plan, 100.0, seed=0)

    @pytest.fixture
    def spec(self) -> LidarSpec:
        """Slow noiseless scanner."""
        return LidarSpec(point_rate=2000.0, range_noise=0.0)

    def test_thread_count_does_not_change_output(self, truth):
        """Scanning with 1 or 4 threads gives identical returns."""
        scene = Scene.flat(scene_bounds(truth.positions, 100.0, 50.0))
        spec = LidarSpec(point_rate=2000.0)
        one = scan_scene(truth, scene, spec, seed=3, threads=1)
        four = scan_scene(truth, scene, spec, seed=3, threads=4)
        assert len(one) > 0
        assert np.array_equal(one.v, four.v)
        assert np.array_equal(one.return_id, four.return_id)

    def test_georeference_recovers_ground(self, truth, spec):
        """Noiseless returns georeferenced with the true mounting lie on the ground."""
        scene = Scene.flat(scene_bounds(truth.positions, 100.0, 50.0))
        returns = scan_scene(truth, scene, spec, seed=0)
        cloud = georeference(returns, truth, spec.boresight_rotation, spec.lever_arm)
        assert len(cloud) == len(returns)
        assert np.allclose(cloud.xyz[:, 2], 0.0, atol=1e-5)
        assert np.all(cloud.line_id == 1)

    def test_wrong_boresight_tilts_ground(self, truth, spec):
        """A mounting error shows up as a height error across the swath."""
        scene = Scene.flat(scene_bounds(truth.positions, 100.0, 50.0))
        returns = scan_scene(truth, scene, spec, seed=0)
        cloud = georeference(returns, truth, Rotation.from_euler(0.5, 0.0, 0.0), spec.lever_arm)
        assert np.abs(cloud.xyz[:, 2]).max() > 0.1

    def test_provenance_round_trip(self, truth, spec):
        """Each point traces back to its pulse."""
        scene = Scene.flat(scene_bounds(truth.positions, 100.0, 50.0))
        returns = scan_scene(truth, scene, spec, seed=0)
        cloud = georeference(returns, truth, spec.boresight_rotation, spec.lever_arm)
        t, v = cloud.trace_to_return(7)
        assert t == returns.t[7]
        assert np.array_equal(v, returns.v[7])
