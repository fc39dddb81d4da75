#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Inertial and GNSS measurement synthesis from a ground-truth trajectory."""

import logging
import math

import numpy as np

from constants import GRAVITY_VECTOR, STREAM_GNSS, STREAM_IMU
from core.domain import GnssFix, ImuMeasurements, Trajectory
from geometry import so3
from simulator.specs import GnssSpec, ImuSpec
from utils.random import rng_stream

logger = logging.getLogger(__name__)

RATE_TOLERANCE = 1e-6


class RateMismatchError(ValueError):
    """The truth trajectory is not sampled at the sensor rate."""


def _bias_series(
    rng: np.random.Generator, count: int, sigma: float, walk_psd: float, dt: float
) -> np.ndarray:
    """Turn-on constant plus first-order random walk, (count, 3)."""
    bias = np.tile(rng.normal(0.0, 1.0, size=3) * sigma, (count, 1))
    steps = rng.normal(0.0, 1.0, size=(count - 1, 3)) * math.sqrt(walk_psd * dt)
    bias[1:] += np.cumsum(steps, axis=0)
    return bias


def synthesize_imu(truth: Trajectory, spec: ImuSpec, seed: int) -> ImuMeasurements:
    """Corrupt the true body rates and specific force with biases and white noise.

    The navigation frame is local-level ENU with constant gravity; Earth rotation is folded
    into the gyro bias.

    Args:
        truth: trajectory sampled at spec.rate, carrying angular rates and accelerations.
        spec: sensor error budget.
        seed: run seed.

    Returns:
        Measurements at the truth epochs, with the true bias series attached.

    Raises:
        RateMismatchError: truth epochs are not spaced at 1 / spec.rate.
    """
    if truth.angular_rates is None or truth.accelerations is None:
        raise ValueError("Truth trajectory carries no kinematic derivatives")
    if len(truth) < 2:
        raise RateMismatchError("Truth trajectory needs at least two epochs")
    dt = 1.0 / spec.rate
    steps = np.diff(truth.t)
    if np.max(np.abs(steps - dt)) > RATE_TOLERANCE * max(1.0, dt):
        raise RateMismatchError(
            f"Truth sampled at {1.0 / np.mean(steps):.6g} Hz, IMU runs at {spec.rate:.6g} Hz"
        )

    count = len(truth)
    rng = rng_stream(seed, STREAM_IMU)
    gyro_bias = _bias_series(rng, count, spec.gyro_bias_sigma, spec.gyro_bias_walk, dt)
    accel_bias = _bias_series(rng, count, spec.accel_bias_sigma, spec.accel_bias_walk, dt)
    gyro_noise = rng.normal(0.0, 1.0, size=(count, 3)) * spec.gyro_noise_density / math.sqrt(dt)
    accel_noise = (
        rng.normal(0.0, 1.0, size=(count, 3)) * spec.accel_noise_density / math.sqrt(dt)
    )

    rotations = so3.quat_to_matrix(truth.quaternions)
    force_nav = truth.accelerations - np.asarray(GRAVITY_VECTOR)
    specific_force = np.einsum("nji,nj->ni", rotations, force_nav)

    logger.debug(
        "Synthesized %d IMU samples, turn-on gyro bias %s rad/s", count, gyro_bias[0]
    )
    return ImuMeasurements(
        t=truth.t.copy(),
        gyro=truth.angular_rates + gyro_bias + gyro_noise,
        accel=specific_force + accel_bias + accel_noise,
        gyro_bias=gyro_bias,
        accel_bias=accel_bias,
    )


def gnss_epochs(start: float, end: float, rate: float) -> np.ndarray:
    """Receiver epochs on the 1/rate grid anchored at start, within [start, end]."""
    count = int(math.floor((end - start) * rate + 1e-9)) + 1
    return start + np.arange(count) / rate


def synthesize_gnss(truth: Trajectory, spec: GnssSpec, seed: int) -> list[GnssFix]:
    """Noisy position fixes at the receiver rate, dropping epochs inside outages.

    Noise is drawn for every epoch before the outage mask is applied, so a given seed
    produces the same fixes outside the windows whatever the outages are.
    """
    start, end = truth.span
    times = gnss_epochs(start, end, spec.rate)
    _, positions = truth.interpolate(times)
    sigma = np.asarray(spec.sigma, dtype=float)
    rng = rng_stream(seed, STREAM_GNSS)
    noisy = positions + rng.normal(0.0, 1.0, size=positions.shape) * sigma

    keep = np.ones(len(times), dtype=bool)
    for lo, hi in spec.outages:
        keep &= ~((times >= lo) & (times <= hi))
    logger.debug("Synthesized %d GNSS fixes, %d in outages", keep.sum(), (~keep).sum())
    return [GnssFix(float(t), p, sigma.copy()) for t, p in zip(times[keep], noisy[keep])]
