#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Dynamic Network adjustment of IMU, GNSS and correspondences."""

import argparse
from pathlib import Path
from typing import Optional

from commands.base import BaseCommand, given
from constants import (
    ARTIFACT_ADJUST_REPORT,
    ARTIFACT_GNSS,
    ARTIFACT_IMU,
    ARTIFACT_TRAJECTORY,
    STAGE_ADJUST,
)
from evaluation.scenario import adjust, stage
from formats.text import read_correspondences, read_gnss, read_imu, write_trajectory
from network.graph import GraphConfig
from network.solver import SolveReport


class AdjustCommand(BaseCommand):
    """Build and solve the network, write the adjusted trajectory and the solve report."""

    name = STAGE_ADJUST
    help = "adjust the trajectory with the Dynamic Network"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Inputs, network switches and output names."""
        parser.add_argument("--imu", type=Path, help="IMU CSV (default: simulated)")
        parser.add_argument("--gnss", type=Path, help="GNSS CSV (default: simulated)")
        parser.add_argument("--correspondences", type=Path, help="correspondence CSV")
        parser.add_argument(
            "--estimate-boresight",
            action="store_true",
            default=None,
            help="estimate the LiDAR boresight",
        )
        parser.add_argument("--keyframe-hz", type=float, help="keyframe rate (Hz)")
        parser.add_argument("--huber", type=float, help="Huber threshold (whitened units)")
        parser.add_argument("--no-huber", action="store_true", help="plain least squares")
        parser.add_argument("--max-iter", type=int, help="solver iteration cap")
        parser.add_argument("--out-trajectory", default=ARTIFACT_TRAJECTORY)
        parser.add_argument("--report-json", default=ARTIFACT_ADJUST_REPORT)

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> dict:
        """Map the flags onto the network section."""
        section = given(
            estimate_boresight=args.estimate_boresight,
            keyframe_hz=args.keyframe_hz,
            huber=args.huber,
            max_iter=args.max_iter,
        )
        if args.no_huber:
            section["robust_kernel"] = "none"
        return {"network": section} if section else {}

    def run(self, args: argparse.Namespace) -> None:
        """Adjust the given data, defaulting to the simulated streams."""
        self.adjust(
            args.imu or self.context.path(ARTIFACT_IMU),
            args.gnss or self.context.path(ARTIFACT_GNSS),
            args.correspondences,
            args.out_trajectory,
            args.report_json,
        )

    def adjust(
        self,
        imu_path: Path,
        gnss_path: Path,
        correspondences_path: Optional[Path],
        out_trajectory: str,
        report_json: str,
        stage_name: str = STAGE_ADJUST,
        graph_config: Optional[GraphConfig] = None,
    ) -> SolveReport:
        """Read the inputs, solve and write trajectory plus report."""
        with stage(stage_name):
            imu = read_imu(imu_path)
            gnss = read_gnss(gnss_path)
            correspondences = []
            if correspondences_path is not None:
                correspondences = read_correspondences(correspondences_path)
            result = adjust(
                imu,
                gnss,
                correspondences,
                graph_config or self.config.graph_config(),
                self.config.network.solver(),
                self.seed,
                self.config.run.output_hz,
            )
            if not result.report.converged:
                self.logger.warning(
                    "Solver stopped without converging (%s)", result.report.termination
                )
            self.write(stage_name, out_trajectory, write_trajectory, result.trajectory)
            self.write_report(stage_name, report_json, result.report)
        return result.report
