#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Flight plan and sensor specifications."""

import math
from typing import Optional

from pydantic import Field, model_validator

from constants import DEG_PER_HOUR, MILLI_G
from core.models import BaseConfigModel
from geometry import Rotation

Vector3 = tuple[float, float, float]


def swath_width(altitude_agl: float, fov_half_angle: float) -> float:
    """Ground swath of a linear scanner over flat terrain, in meters."""
    return 2.0 * altitude_agl * math.tan(math.radians(fov_half_angle))


def spacing_for_overlap(swath: float, overlap: float) -> float:
    """Line spacing giving the requested side overlap between adjacent swaths."""
    if not 0.0 < overlap < 1.0:
        raise ValueError(f"Side overlap must lie in (0, 1), got {overlap}")
    return swath * (1.0 - overlap)


class FlightPlan(BaseConfigModel):
    """Parallel survey lines joined by semicircular turns, or explicit waypoints."""

    waypoints: Optional[list[Vector3]] = None
    speed: float = Field(default=12.0, gt=0.0)
    lines: int = Field(default=2, ge=1)
    line_length: float = Field(default=600.0, gt=0.0)
    line_spacing: Optional[float] = Field(default=None, gt=0.0)
    side_overlap: float = Field(default=0.4, gt=0.0, lt=1.0)
    altitude_agl: float = Field(default=120.0, gt=0.0)
    heading: float = 0.0
    run_in: float = Field(default=60.0, ge=0.0)
    origin: tuple[float, float] = (0.0, 0.0)
    start_time: float = 0.0
    roll_amplitude: float = Field(default=2.0, ge=0.0)
    pitch_amplitude: float = Field(default=2.0, ge=0.0)
    yaw_amplitude: float = Field(default=5.0, ge=0.0)
    min_period: float = Field(default=8.0, gt=0.0)
    max_period: float = Field(default=20.0, gt=0.0)

    @model_validator(mode="after")
    def validate_plan(self):
        """Check waypoint count and dither periods."""
        if self.waypoints is not None and len(self.waypoints) < 2:
            raise ValueError("A flight plan needs at least two waypoints")
        if self.min_period > self.max_period:
            raise ValueError("min_period must not exceed max_period")
        return self

    @property
    def has_dither(self) -> bool:
        """True when any attitude dither amplitude is set."""
        return max(self.roll_amplitude, self.pitch_amplitude, self.yaw_amplitude) > 0.0

    @property
    def line_duration(self) -> float:
        """Seconds spent on one survey line."""
        return self.line_length / self.speed

    def with_spacing_for(self, swath: float) -> "FlightPlan":
        """Return a copy whose line spacing realizes the configured side overlap."""
        if self.line_spacing is not None:
            return self
        return self.model_copy(
            update={"line_spacing": spacing_for_overlap(swath, self.side_overlap)}
        )


class ImuSpec(BaseConfigModel):
    """Inertial sensor error budget."""

    rate: float = Field(default=200.0, ge=50.0)
    gyro_bias_instability: float = Field(default=20.0, ge=0.0, description="deg/h")
    accel_bias: float = Field(default=2.0, ge=0.0, description="mg")
    gyro_white_noise: float = Field(default=0.2, ge=0.0, description="deg/sqrt(h)")
    accel_white_noise: float = Field(default=0.0005, ge=0.0, description="m/s^2/sqrt(Hz)")
    gyro_bias_walk: float = Field(default=1e-12, ge=0.0, description="(rad/s)^2/s")
    accel_bias_walk: float = Field(default=1e-8, ge=0.0, description="(m/s^2)^2/s")

    @classmethod
    def navchip(cls) -> "ImuSpec":
        """MEMS grade unit of the survey helicopter."""
        return cls(gyro_bias_instability=20.0, accel_bias=2.0, gyro_white_noise=0.2)

    @classmethod
    def airins(cls) -> "ImuSpec":
        """Navigation grade reference unit."""
        return cls(
            gyro_bias_instability=0.01,
            accel_bias=0.05,
            gyro_white_noise=0.002,
            accel_white_noise=5e-5,
            gyro_bias_walk=1e-16,
            accel_bias_walk=1e-11,
        )

    @classmethod
    def perfect(cls, rate: float = 200.0) -> "ImuSpec":
        """Error-free sensor."""
        return cls(
            rate=rate,
            gyro_bias_instability=0.0,
            accel_bias=0.0,
            gyro_white_noise=0.0,
            accel_white_noise=0.0,
            gyro_bias_walk=0.0,
            accel_bias_walk=0.0,
        )

    @property
    def gyro_bias_sigma(self) -> float:
        """Turn-on gyro bias sigma in rad/s."""
        return math.radians(self.gyro_bias_instability * DEG_PER_HOUR)

    @property
    def accel_bias_sigma(self) -> float:
        """Turn-on accelerometer bias sigma in m/s^2."""
        return self.accel_bias * MILLI_G

    @property
    def gyro_noise_density(self) -> float:
        """Angular random walk in rad/s/sqrt(Hz)."""
        return math.radians(self.gyro_white_noise) / 60.0

    @property
    def accel_noise_density(self) -> float:
        """Velocity random walk in m/s^2/sqrt(Hz)."""
        return self.accel_white_noise


class GnssSpec(BaseConfigModel):
    """GNSS receiver output model."""

    rate: float = Field(default=10.0, gt=0.0)
    sigma: Vector3 = (0.02, 0.02, 0.02)
    outages: list[tuple[float, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_outages(self):
        """Outage windows are ordered and disjoint."""
        if any(s < 0.0 for s in self.sigma):
            raise ValueError("GNSS sigma must be nonnegative")
        windows = sorted(self.outages)
        for start, end in windows:
            if not start < end:
                raise ValueError(f"Outage window ({start}, {end}) is empty")
        for (_, end), (start, _) in zip(windows, windows[1:]):
            if start <= end:
                raise ValueError("Outage windows overlap")
        return self

    def in_outage(self, t: float) -> bool:
        """True when t lies in a window, both ends inclusive."""
        return any(start <= t <= end for start, end in self.outages)


class LidarSpec(BaseConfigModel):
    """Linear scanner sweeping across track, plus its mounting on the body."""

    point_rate: float = Field(default=25_000.0, gt=0.0)
    scan_rate: float = Field(default=50.0, gt=0.0)
    fov_half_angle: float = Field(default=25.0, gt=0.0, lt=90.0)
    range_noise: float = Field(default=0.02, ge=0.0)
    max_range: float = Field(default=1000.0, gt=0.0)
    boresight: Vector3 = (0.0, 0.0, 0.0)
    lever_arm: Vector3 = (0.0, 0.0, -0.3)

    @classmethod
    def vq480(cls) -> "LidarSpec":
        """Survey-grade unit of the helicopter pod."""
        return cls(point_rate=200_000.0, scan_rate=100.0, fov_half_angle=30.0)

    @property
    def boresight_rotation(self) -> Rotation:
        """Mounting rotation from roll, pitch, yaw in degrees."""
        roll, pitch, yaw = self.boresight
        return Rotation.from_euler(roll, pitch, yaw)

    def swath(self, altitude_agl: float) -> float:
        """Swath width at a flying height."""
        return swath_width(altitude_agl, self.fov_half_angle)
