# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for the SO(3)/SE(3) algebra."""

import sys
from pathlib import Path

import numpy as np
import pytest
from conftest import random_quaternions

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from geometry import (  # noqa: E402
    InterpolationRangeError,
    LogAmbiguityError,
    RigidTransform,
    Rotation,
    TimedPose,
    geodesic_interpolate,
    so3,
)
from geometry.transform import (  # noqa: E402
    adjoint,
    interpolate_poses,
    interpolation_jacobians,
    se3_left_jacobian,
    se3_left_jacobian_inverse,
)

CASES = 10_000


def _random_transform(rng, max_angle=3.0, scale=100.0) -> RigidTransform:
    q = random_quaternions(rng, 1, max_angle)[0]
    return RigidTransform(Rotation(q), rng.uniform(-scale, scale, 3))


class TestQuaternions:
    """Tests for the array-level quaternion algebra."""

    def test_batched_products_stay_unit_and_canonical(self, rng):
        """Products of random quaternions are unit-norm with w >= 0."""
        a = random_quaternions(rng, CASES)
        b = random_quaternions(rng, CASES)
        product = so3.quat_multiply(a, b)
        assert np.allclose(np.linalg.norm(product, axis=1), 1.0, atol=1e-12)
        assert np.all(product[:, 0] >= 0.0)

    def test_exp_log_round_trip(self, rng):
        """Log(Exp(phi)) == phi for angles below pi."""
        axes = rng.normal(size=(CASES, 3))
        axes /= np.linalg.norm(axes, axis=1, keepdims=True)
        phi = axes * rng.uniform(0.0, 3.0, size=(CASES, 1))
        assert np.allclose(so3.log_quat(so3.exp_quat(phi)), phi, atol=1e-9)

    def test_tiny_angles_round_trip(self):
        """The small-angle branch keeps full precision."""
        phi = np.array([1e-10, -2e-10, 3e-11])
        assert np.allclose(so3.log_quat(so3.exp_quat(phi)), phi, atol=1e-18)

    def test_log_at_pi_is_ambiguous(self):
        """A half turn has no unique logarithm."""
        with pytest.raises(LogAmbiguityError):
            so3.log_quat(np.array([0.0, 1.0, 0.0, 0.0]))

    def test_matrix_round_trip(self, rng):
        """Quaternion -> matrix -> quaternion is the identity on canonical quaternions."""
        q = random_quaternions(rng, 1000)
        assert np.allclose(so3.matrix_to_quat(so3.quat_to_matrix(q)), q, atol=1e-9)

    def test_rotate_matches_matrix(self, rng):
        """quat_rotate agrees with the rotation matrix."""
        q = random_quaternions(rng, 100)
        v = rng.normal(size=(100, 3))
        expected = np.einsum("nij,nj->ni", so3.quat_to_matrix(q), v)
        assert np.allclose(so3.quat_rotate(q, v), expected, atol=1e-12)


class TestEuler:
    """Tests for ZYX Euler conversions."""

    def test_yaw_turns_east_to_north(self):
        """Yaw is counter-clockwise about Up: 90 deg maps East onto North."""
        r = Rotation.from_euler(0.0, 0.0, 90.0)
        assert np.allclose(r.apply([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)

    def test_round_trip(self, rng):
        """from_euler / to_euler round trip away from gimbal lock."""
        for _ in range(100):
            angles = (rng.uniform(-170, 170), rng.uniform(-80, 80), rng.uniform(-170, 170))
            assert np.allclose(Rotation.from_euler(*angles).to_euler(), angles, atol=1e-9)

    def test_batched_matches_scalar(self, rng):
        """Array conversion agrees with the Rotation class."""
        angles = rng.uniform(-60.0, 60.0, size=(20, 3))
        q = so3.euler_to_quat(angles[:, 0], angles[:, 1], angles[:, 2])
        for row, quat in zip(angles, q):
            assert np.allclose(Rotation.from_euler(*row).quaternion, quat, atol=1e-12)


class TestRigidTransform:
    """Tests for SE(3) transforms and Jacobians."""

    def test_compose_with_inverse_is_identity(self, rng):
        """T * T^-1 == I for random transforms."""
        for _ in range(CASES):
            a = _random_transform(rng)
            assert (a * a.inverse()).allclose(RigidTransform.identity(), atol=1e-9)

    def test_composition_is_associative(self, rng):
        """(a b) c == a (b c)."""
        for _ in range(1000):
            a, b, c = (_random_transform(rng) for _ in range(3))
            assert ((a * b) * c).allclose(a * (b * c), atol=1e-9)

    def test_exp_log_round_trip(self, rng):
        """Exp(Log(T)) == T."""
        for _ in range(1000):
            a = _random_transform(rng)
            assert RigidTransform.exp(a.log()).allclose(a, atol=1e-9)

    def test_apply_matches_matrix(self, rng):
        """apply agrees with the homogeneous matrix."""
        a = _random_transform(rng)
        v = rng.normal(size=(10, 3))
        homogeneous = np.column_stack([v, np.ones(10)]) @ a.as_matrix().T
        assert np.allclose(a.apply(v), homogeneous[:, :3], atol=1e-9)

    def test_adjoint_conjugation(self, rng):
        """Exp(Ad_T xi) == T Exp(xi) T^-1."""
        t = _random_transform(rng, scale=10.0)
        xi = rng.normal(scale=0.3, size=6)
        lhs = RigidTransform.exp(adjoint(t) @ xi)
        rhs = t * RigidTransform.exp(xi) * t.inverse()
        assert lhs.allclose(rhs, atol=1e-9)

    def test_left_jacobian_inverse(self, rng):
        """The closed-form inverse inverts the SE(3) left Jacobian."""
        for _ in range(100):
            xi = rng.normal(scale=0.8, size=6)
            product = se3_left_jacobian(xi) @ se3_left_jacobian_inverse(xi)
            assert np.allclose(product, np.eye(6), atol=1e-9)


class TestGeodesic:
    """Tests for geodesic interpolation."""

    def test_endpoints(self, rng):
        """Interpolating at the bracket ends returns the end poses exactly."""
        a, b = _random_transform(rng), _random_transform(rng)
        pa, pb = TimedPose(1.0, a), TimedPose(2.0, b)
        assert geodesic_interpolate(pa, pb, 1.0) is a
        assert geodesic_interpolate(pa, pb, 2.0) is b

    def test_midpoint_symmetry(self, rng):
        """The midpoint from a to b equals the midpoint from b to a."""
        for _ in range(1000):
            a, b = _random_transform(rng, 1.5), _random_transform(rng, 1.5)
            forward = geodesic_interpolate(TimedPose(0.0, a), TimedPose(1.0, b), 0.5)
            backward = geodesic_interpolate(TimedPose(0.0, b), TimedPose(1.0, a), 0.5)
            assert forward.allclose(backward, atol=1e-9)

    def test_out_of_range(self, rng):
        """Times outside the bracket are rejected."""
        a, b = TimedPose(0.0, RigidTransform()), TimedPose(1.0, RigidTransform())
        with pytest.raises(InterpolationRangeError):
            geodesic_interpolate(a, b, 1.5)
        with pytest.raises(InterpolationRangeError):
            geodesic_interpolate(b, a, 0.5)

    def test_batched_matches_scalar(self, rng):
        """interpolate_poses agrees with pairwise geodesic interpolation."""
        poses = [_random_transform(rng, 1.0, 10.0) for _ in range(5)]
        times = np.array([0.0, 1.0, 2.5, 3.0, 4.0])
        quats = np.array([p.rotation.quaternion for p in poses])
        trans = np.array([p.translation for p in poses])
        query = np.array([0.0, 0.3, 1.0, 2.7, 3.99, 4.0])
        q, t = interpolate_poses(times, quats, trans, query)
        for qi, ti, s in zip(q, t, query):
            k = min(int(np.searchsorted(times, s, side="right")) - 1, len(times) - 2)
            expected = geodesic_interpolate(
                TimedPose(times[k], poses[k]), TimedPose(times[k + 1], poses[k + 1]), s
            )
            assert RigidTransform(Rotation(qi), ti).allclose(expected, atol=1e-9)

    def test_interpolation_jacobians(self, rng):
        """Analytic interpolant Jacobians agree with central differences."""
        eps = 1e-6
        for _ in range(20):
            a, b = _random_transform(rng, 1.0, 5.0), _random_transform(rng, 1.0, 5.0)
            alpha = rng.uniform(0.05, 0.95)
            pose, jac_a, jac_b = interpolation_jacobians(a, b, alpha)
            for which, jac in ((0, jac_a), (1, jac_b)):
                numeric = np.zeros((6, 6))
                for k in range(6):
                    d = np.zeros(6)
                    d[k] = eps
                    ends = [a, b]
                    plus, minus = list(ends), list(ends)
                    plus[which] = ends[which] * RigidTransform.exp(d)
                    minus[which] = ends[which] * RigidTransform.exp(-d)
                    up = interpolation_jacobians(*plus, alpha)[0]
                    down = interpolation_jacobians(*minus, alpha)[0]
                    numeric[:, k] = (
                        (pose.inverse() * up).log() - (pose.inverse() * down).log()
                    ) / (2 * eps)
                assert np.allclose(jac, numeric, atol=1e-6)
