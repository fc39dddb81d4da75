#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Sensor data: synthesized from a simulated flight, or ingested from files."""

import argparse

from commands.base import BaseCommand, Mounting, given
from constants import (
    ARTIFACT_GNSS,
    ARTIFACT_IMU,
    ARTIFACT_MOUNTING,
    ARTIFACT_RETURNS,
    ARTIFACT_TRUTH,
    STAGE_SIMULATE,
)
from evaluation.scenario import simulate, stage
from formats.binary import read_returns, write_returns
from formats.text import (
    read_gnss,
    read_imu,
    read_trajectory,
    write_gnss,
    write_imu,
    write_trajectory,
)


class SimulateCommand(BaseCommand):
    """Fly the configured plan and write truth, IMU, GNSS and LiDAR returns."""

    name = STAGE_SIMULATE
    help = "simulate a survey flight and its sensor data"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Flight-plan shortcuts."""
        parser.add_argument("--lines", type=int, help="number of flight lines")
        parser.add_argument("--line-length", type=float, help="flight line length (m)")
        parser.add_argument("--altitude", type=float, help="altitude above ground (m)")

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> dict:
        """Map the shortcuts onto the flight section."""
        flight = given(
            lines=getattr(args, "lines", None),
            line_length=getattr(args, "line_length", None),
            altitude_agl=getattr(args, "altitude", None),
        )
        return {"flight": flight} if flight else {}

    def run(self, args: argparse.Namespace) -> None:
        """Simulate, or copy external data when the inputs section names files."""
        if self.config.inputs.ingests:
            self.ingest()
        else:
            self.simulate()

    def simulate(self) -> None:
        """Write the simulated artifacts."""
        with stage(STAGE_SIMULATE):
            sim = simulate(self.config, self.seed)
            self.write(STAGE_SIMULATE, ARTIFACT_TRUTH, write_trajectory, sim.truth)
            self.write(STAGE_SIMULATE, ARTIFACT_IMU, write_imu, sim.imu)
            self.write(STAGE_SIMULATE, ARTIFACT_GNSS, write_gnss, sim.gnss)
            self.write(STAGE_SIMULATE, ARTIFACT_RETURNS, write_returns, sim.returns)
            mounting = Mounting(
                boresight=sim.boresight.to_euler(), lever_arm=tuple(sim.lever_arm.tolist())
            )
            self.write_report(STAGE_SIMULATE, ARTIFACT_MOUNTING, mounting)

    def ingest(self) -> None:
        """Re-write external IMU, GNSS and returns files in canonical form.

        The mounting written next to them is the configured LiDAR mounting.
        """
        inputs = self.config.inputs
        with stage(STAGE_SIMULATE):
            missing = [
                name for name in ("imu", "gnss", "returns") if getattr(inputs, name) is None
            ]
            if missing:
                raise ValueError(f"Ingesting needs the {', '.join(missing)} input file(s)")
            self.logger.info("Ingesting %s, %s and %s", inputs.imu, inputs.gnss, inputs.returns)
            self.write(STAGE_SIMULATE, ARTIFACT_IMU, write_imu, read_imu(inputs.imu))
            self.write(STAGE_SIMULATE, ARTIFACT_GNSS, write_gnss, read_gnss(inputs.gnss))
            self.write(
                STAGE_SIMULATE, ARTIFACT_RETURNS, write_returns, read_returns(inputs.returns)
            )
            if inputs.truth is not None:
                truth = read_trajectory(inputs.truth)
                self.write(STAGE_SIMULATE, ARTIFACT_TRUTH, write_trajectory, truth)
            lidar = self.config.lidar
            mounting = Mounting(boresight=lidar.boresight, lever_arm=lidar.lever_arm)
            self.write_report(STAGE_SIMULATE, ARTIFACT_MOUNTING, mounting)
