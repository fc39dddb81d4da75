#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Error reports against a reference trajectory, and the four evaluation cases."""

import argparse
from pathlib import Path
from typing import Optional

from commands.base import BaseCommand, Mounting, given
from commands.georef import GeorefCommand
from constants import (
    ARTIFACT_EVALUATION,
    ARTIFACT_MOUNTING,
    ARTIFACT_RETURNS,
    ARTIFACT_TRAJECTORY,
    ARTIFACT_TRUTH,
    STAGE_EVALUATE,
)
from core.domain import LidarReturns, Trajectory
from evaluation.cases import improvement, run_case
from evaluation.metrics import (
    EvaluationReport,
    correspondence_errors,
    pointcloud_errors,
    trajectory_error_series,
    trajectory_errors,
)
from evaluation.scenario import georeference_with, stage
from formats.binary import read_returns
from formats.text import read_correspondences, read_trajectory
from geometry import Rotation


class EvaluateCommand(BaseCommand):
    """Compare an adjusted trajectory, its cloud and its correspondences with the truth."""

    name = STAGE_EVALUATE
    help = "evaluate a trajectory against the truth"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Estimate, truth and optional extras."""
        parser.add_argument("--trajectory", type=Path, help="adjusted trajectory CSV")
        parser.add_argument("--truth", type=Path, help="reference trajectory CSV")
        parser.add_argument("--returns", type=Path, help="returns for point-cloud errors")
        parser.add_argument("--mounting", type=Path, help="true scanner mounting JSON")
        parser.add_argument("--baseline", type=Path, help="baseline trajectory CSV")
        parser.add_argument("--solve-report", type=Path, help="solve with estimated boresight")
        parser.add_argument("--correspondences", type=Path, help="correspondences to grade")
        parser.add_argument(
            "--window", type=float, nargs=2, metavar=("START", "END"), help="time window (s)"
        )
        parser.add_argument("--out", default=ARTIFACT_EVALUATION, help="report file name")

    def run(self, args: argparse.Namespace) -> None:
        """Evaluate, defaulting every input to the pipeline artifacts."""
        returns = args.returns
        if returns is None and self.context.path(ARTIFACT_RETURNS).is_file():
            returns = self.context.path(ARTIFACT_RETURNS)
        self.evaluate(
            args.trajectory or self.context.path(ARTIFACT_TRAJECTORY),
            args.truth or self.context.path(ARTIFACT_TRUTH),
            returns=returns,
            mounting_path=args.mounting,
            baseline_path=args.baseline,
            solve_report=args.solve_report,
            correspondences_path=args.correspondences,
            window=tuple(args.window) if args.window else None,
            out_name=args.out,
        )

    def _mounting(self, path: Optional[Path]) -> Mounting:
        if path is None and self.context.path(ARTIFACT_MOUNTING).is_file():
            path = self.context.path(ARTIFACT_MOUNTING)
        if path is not None:
            return Mounting.read(path)
        lidar = self.config.lidar
        return Mounting(boresight=lidar.boresight, lever_arm=lidar.lever_arm)

    def _cloud_errors(
        self,
        returns: LidarReturns,
        trajectory: Trajectory,
        boresight: Rotation,
        reference,
    ):
        estimated = georeference_with(
            returns, trajectory, boresight, self.config.network.lever_arm
        )
        return pointcloud_errors(estimated, reference, self.config.case.histogram_bins)

    def evaluate(
        self,
        trajectory_path: Path,
        truth_path: Path,
        returns: Optional[Path] = None,
        mounting_path: Optional[Path] = None,
        baseline_path: Optional[Path] = None,
        solve_report: Optional[Path] = None,
        correspondences_path: Optional[Path] = None,
        window: Optional[tuple[float, float]] = None,
        out_name: str = ARTIFACT_EVALUATION,
    ) -> EvaluationReport:
        """Write the evaluation report, histograms and error time series."""
        with stage(STAGE_EVALUATE):
            bins = self.config.case.histogram_bins
            estimate = read_trajectory(trajectory_path)
            truth = read_trajectory(truth_path)
            mounting = self._mounting(mounting_path)
            georef = GeorefCommand(self.context)
            report = EvaluationReport(trajectory=trajectory_errors(estimate, truth, window))
            series = trajectory_error_series(estimate, truth, window)
            baseline = read_trajectory(baseline_path) if baseline_path else None
            if baseline is not None:
                report.baseline_trajectory = trajectory_errors(baseline, truth, window)
            if returns is not None:
                raw = read_returns(returns)
                spans = [estimate.span, truth.span] + ([baseline.span] if baseline else [])
                lo, hi = max(s[0] for s in spans), min(s[1] for s in spans)
                raw = raw.select((raw.t >= lo) & (raw.t <= hi))
                reference = georeference_with(
                    raw, truth, mounting.rotation, mounting.lever_arm
                )
                report.pointcloud = self._cloud_errors(
                    raw, estimate, georef.boresight(solve_report), reference
                )
                if baseline is not None:
                    report.baseline_pointcloud = self._cloud_errors(
                        raw, baseline, georef.boresight(), reference
                    )
            if correspondences_path is not None:
                matches = read_correspondences(correspondences_path)
                if matches:
                    report.correspondences = correspondence_errors(
                        matches, truth, mounting.rotation, mounting.lever_arm, bins
                    )
            report.factors = self._factors(report)
            self.write_report(STAGE_EVALUATE, out_name, report)
            prefix = Path(out_name).stem
            t, position, attitude = series
            self.write_errors(
                STAGE_EVALUATE,
                prefix,
                report.pointcloud,
                [[ti, *p, *a] for ti, p, a in zip(t, position, attitude)],
            )
        self.logger.info(
            "Yaw RMSE %.4f deg, Up RMSE %.3f m",
            report.trajectory.rmse_yaw,
            report.trajectory.rmse_up,
        )
        return report

    @staticmethod
    def _factors(report: EvaluationReport) -> dict[str, float]:
        factors = {}
        if report.baseline_trajectory is not None:
            base, best = report.baseline_trajectory, report.trajectory
            factors["yaw"] = improvement(base.rmse_yaw, best.rmse_yaw)
            factors["pitch"] = improvement(base.rmse_pitch, best.rmse_pitch)
            factors["up"] = improvement(base.rmse_up, best.rmse_up)
        if report.baseline_pointcloud is not None and report.pointcloud is not None:
            factors["pointcloud-mean"] = improvement(
                report.baseline_pointcloud.norm_mean, report.pointcloud.norm_mean
            )
        return factors


class CaseCommand(BaseCommand):
    """Run one evaluation case over the configured seeds."""

    case_id: int = 1

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Seeds to repeat the case with."""
        parser.add_argument("--seeds", type=int, nargs="+", help="seeds (default: config)")

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> dict:
        """Select the case and the seeds."""
        return {"case": {"case_id": cls.case_id, **given(seeds=args.seeds)}}

    def run(self, args: argparse.Namespace) -> None:
        """Write one report per seed plus the histograms and error series of every row."""
        for report in run_case(self.config):
            prefix = f"case{report.case}-seed{report.seed}"
            self.write_report(STAGE_EVALUATE, f"{prefix}.json", report)
            for row in report.rows:
                self.write_errors(
                    STAGE_EVALUATE, f"{prefix}-{row.name}", row.pointcloud, row.error_series
                )
            summary = ", ".join(f"{k} {v:.2f}" for k, v in sorted(report.factors.items()))
            self.logger.info("Case %d seed %d factors: %s", report.case, report.seed, summary)


class Case1Command(CaseCommand):
    """Network with and without correspondences."""

    case_id = 1
    name = "case1"
    help = "network with and without correspondences"


class Case2Command(CaseCommand):
    """Progressively thinned correspondences."""

    case_id = 2
    name = "case2"
    help = "progressively thinned correspondences"


class Case3Command(CaseCommand):
    """Boresight estimation."""

    case_id = 3
    name = "case3"
    help = "boresight estimation"


class Case4Command(CaseCommand):
    """GNSS outages over the flight lines."""

    case_id = 4
    name = "case4"
    help = "GNSS outages over the flight lines"
