#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Direct georeferencing of LiDAR returns with a trajectory."""

import argparse
from pathlib import Path
from typing import Optional

from commands.base import BaseCommand
from constants import ARTIFACT_CLOUD, ARTIFACT_RETURNS, STAGE_GEOREF
from core.domain import PointCloud
from evaluation.scenario import georeference_with, stage
from formats.binary import read_returns, write_pointcloud
from formats.reports import read_json
from formats.text import read_trajectory, write_pointcloud_csv
from geometry import Rotation


class GeorefCommand(BaseCommand):
    """Turn raw returns into a navigation-frame point cloud."""

    name = STAGE_GEOREF
    help = "georeference LiDAR returns with a trajectory"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Inputs and output names."""
        parser.add_argument("--returns", type=Path, help="returns file (default: simulated)")
        parser.add_argument("--trajectory", type=Path, required=True, help="trajectory CSV")
        parser.add_argument(
            "--solve-report", type=Path, help="use the boresight estimated by this solve"
        )
        parser.add_argument("--out", default=ARTIFACT_CLOUD, help="point-cloud file name")
        parser.add_argument("--csv", action="store_true", help="also write a CSV copy")

    def run(self, args: argparse.Namespace) -> None:
        """Georeference with the assumed or the estimated boresight."""
        boresight = self.boresight(args.solve_report)
        returns = args.returns or self.context.path(ARTIFACT_RETURNS)
        self.georeference(returns, args.trajectory, args.out, boresight, csv=args.csv)

    def boresight(self, solve_report: Optional[Path] = None) -> Rotation:
        """Estimated boresight from a solve report, else the configured one."""
        if solve_report is not None:
            angles = read_json(solve_report).get("boresight")
            if angles is not None:
                return Rotation.from_euler(*angles)
        return Rotation.from_euler(*self.config.network.boresight)

    def georeference(
        self,
        returns_path: Path,
        trajectory_path: Path,
        out_name: str,
        boresight: Rotation,
        stage_name: str = STAGE_GEOREF,
        csv: bool = False,
    ) -> PointCloud:
        """Read, georeference and write one cloud."""
        with stage(stage_name):
            returns = read_returns(returns_path)
            trajectory = read_trajectory(trajectory_path)
            cloud = georeference_with(
                returns, trajectory, boresight, self.config.network.lever_arm
            )
            self.write(stage_name, out_name, write_pointcloud, cloud)
            if csv:
                name = str(Path(out_name).with_suffix(".csv"))
                self.write(stage_name, name, write_pointcloud_csv, cloud)
            self.logger.info("Georeferenced %d points", len(cloud))
        return cloud
