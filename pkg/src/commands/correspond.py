#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Correspondences between adjacent flight lines of a georeferenced cloud."""

import argparse
from pathlib import Path

from pydantic import BaseModel

from commands.base import BaseCommand, given
from constants import (
    ARTIFACT_APPROX_CLOUD,
    ARTIFACT_CORRESPOND_REPORT,
    ARTIFACT_CORRESPONDENCES,
    STAGE_CORRESPOND,
)
from correspondence.pipeline import CorrespondenceRun, TileStats
from evaluation.scenario import correspond, stage
from formats.binary import read_pointcloud
from formats.text import write_correspondences


class CorrespondReport(BaseModel):
    """Counts and per-tile statistics of a correspondence run."""

    raw_matches: int
    kept: int
    sigma: float
    skipped_tiles: int
    tiles: list[TileStats]

    @classmethod
    def of(cls, run: CorrespondenceRun) -> "CorrespondReport":
        """Summary of a run."""
        return cls(
            raw_matches=run.raw_count,
            kept=len(run.correspondences),
            sigma=run.sigma,
            skipped_tiles=run.skipped_tiles,
            tiles=run.tiles,
        )


class CorrespondCommand(BaseCommand):
    """Key point to point matching and RANSAC filtering over overlap tiles."""

    name = STAGE_CORRESPOND
    help = "find correspondences between adjacent flight lines"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Input cloud and matching parameters."""
        parser.add_argument("--cloud", type=Path, help="point cloud with provenance")
        parser.add_argument("--tile-size", type=float, help="overlap tile edge (m)")
        parser.add_argument("--iss-radius", type=float, help="key point salient radius (m)")
        parser.add_argument("--iss-ratio", type=float, help="key point eigenvalue ratio")
        parser.add_argument("--desc-radius", type=float, help="descriptor support radius (m)")
        parser.add_argument("--tau", type=float, help="RANSAC inlier tolerance (m)")
        parser.add_argument("--min-tile-points", type=int, help="points a tile needs per line")
        parser.add_argument(
            "--out", default=ARTIFACT_CORRESPONDENCES, help="correspondence file name"
        )

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> dict:
        """Map the flags onto the correspondence section."""
        section = given(
            tile_size=args.tile_size,
            iss_radius=args.iss_radius,
            iss_ratio=args.iss_ratio,
            desc_radius=args.desc_radius,
            tau=args.tau,
            min_tile_points=args.min_tile_points,
        )
        return {"correspondence": section} if section else {}

    def run(self, args: argparse.Namespace) -> None:
        """Match the given cloud, default the approximate cloud of a pipeline run."""
        cloud = args.cloud or self.context.path(ARTIFACT_APPROX_CLOUD)
        self.correspond(cloud, args.out)

    def correspond(
        self,
        cloud_path: Path,
        out_name: str = ARTIFACT_CORRESPONDENCES,
        report_name: str = ARTIFACT_CORRESPOND_REPORT,
    ) -> CorrespondenceRun:
        """Read a cloud, match it and write the correspondences with their summary."""
        with stage(STAGE_CORRESPOND):
            cloud = read_pointcloud(cloud_path)
            run = correspond(cloud, self.config.correspondence, self.seed, self.threads)
            self.write(STAGE_CORRESPOND, out_name, write_correspondences, run.correspondences)
            self.write_report(STAGE_CORRESPOND, report_name, CorrespondReport.of(run))
        return run
