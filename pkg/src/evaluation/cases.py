#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""The four evaluation cases.

Every case simulates one flight per seed and solves the network at least twice on the
same data: once without correspondences (the baseline) and once with them. Improvement
factors are same-seed ratios baseline / candidate.
"""

import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from constants import (
    STAGE_ADJUST,
    STAGE_APPROX,
    STAGE_CORRESPOND,
    STAGE_EVALUATE,
    STAGE_GEOREF,
    STAGE_SIMULATE,
)
from core.domain import Correspondence, GnssFix, PointCloud, Trajectory
from core.run_config import RunConfig
from correspondence.pipeline import CorrespondenceRun
from correspondence.tiling import estimate_gsd
from evaluation.metrics import (
    CorrespondenceErrorReport,
    EvaluationError,
    PointCloudErrorReport,
    TrajectoryErrorReport,
    correspondence_errors,
    downsample,
    pair_inlier_ratio,
    pointcloud_errors,
    trajectory_error_series,
    trajectory_errors,
)
from evaluation.scenario import (
    Adjustment,
    Simulation,
    adjust,
    correspond,
    georeference_with,
    simulate,
    stage,
    with_outages,
)
from formats.text import read_trajectory
from geometry import Rotation
from network.graph import GraphConfig, cap_correspondences
from network.solver import SolveReport
from simulator.specs import Vector3
from utils.logging import WithLogging

logger = logging.getLogger(__name__)

INLIER_THRESHOLD = 0.3
FACTOR_FLOOR = 1e-12


class CaseRow(BaseModel):
    """One estimated trajectory and the cloud it georeferences."""

    name: str
    correspondences: int = 0
    fraction: Optional[float] = None
    trajectory: TrajectoryErrorReport
    pointcloud: PointCloudErrorReport
    solve: Optional[SolveReport] = None
    boresight: Optional[Vector3] = None
    error_series: list[list[float]] = Field(default_factory=list, exclude=True)


class ExperimentReport(BaseModel):
    """All rows of one case for one seed, with the same-seed improvement factors."""

    case: int
    seed: int
    line: int
    window: tuple[float, float]
    gsd: float
    truth_boresight: Vector3
    rows: list[CaseRow]
    factors: dict[str, float] = Field(default_factory=dict)
    correspondence_quality: Optional[CorrespondenceErrorReport] = None
    raw_inlier_ratio: Optional[float] = None
    outages: list[tuple[float, float]] = Field(default_factory=list)

    def row(self, name: str) -> CaseRow:
        """Row by name.

        Raises:
            KeyError: no such row.
        """
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)


def improvement(baseline: float, candidate: float) -> float:
    """Ratio baseline / candidate, guarded against a zero candidate."""
    return float(baseline / max(candidate, FACTOR_FLOOR))


def retention_subsets(
    correspondences: list[Correspondence],
    fractions: list[float],
    limit: Optional[int],
    seed: int,
) -> list[tuple[float, list[Correspondence]]]:
    """Thinned copies of one capped base set, largest fraction first.

    The base is the set the network uses at full retention and every fraction is taken of
    that base. Fractions leaving no correspondence, or no fewer than the previous one, are
    skipped, so set sizes fall strictly.
    """
    base = cap_correspondences(correspondences, limit, seed)
    subsets = [(1.0, base)]
    for fraction in sorted(set(fractions) - {1.0}, reverse=True):
        try:
            subset = downsample(base, fraction, seed)
        except EvaluationError as e:
            logger.warning("Skipping fraction %g: %s", fraction, e)
            continue
        if len(subset) >= len(subsets[-1][1]):
            logger.warning("Skipping fraction %g: no fewer than %d pairs", fraction, len(subset))
            continue
        subsets.append((fraction, subset))
    return subsets


class CaseRunner(WithLogging):
    """Runs the cases for one seed of a configuration."""

    def __init__(self, config: RunConfig, seed: int):
        self.config = config
        self.seed = seed
        self.graph_config = config.graph_config()
        self.solver_config = config.network.solver()
        self.bins = config.case.histogram_bins
        self.sim: Optional[Simulation] = None

    @property
    def assumed_boresight(self) -> Rotation:
        """Boresight the estimator starts from."""
        return Rotation.from_euler(*self.graph_config.boresight)

    @property
    def line_window(self) -> tuple[float, float]:
        """Time window of the first flight line."""
        windows = self.sim.truth.line_windows
        return windows[0] if windows else self.sim.truth.span

    def _simulate(self, **kwargs) -> Simulation:
        with stage(STAGE_SIMULATE):
            self.sim = simulate(self.config, self.seed, **kwargs)
        return self.sim

    def _adjust(
        self,
        gnss: list[GnssFix],
        correspondences: list[Correspondence],
        graph_config: Optional[GraphConfig] = None,
        name: str = STAGE_ADJUST,
    ) -> Adjustment:
        with stage(name):
            return adjust(
                self.sim.imu,
                gnss,
                correspondences,
                graph_config or self.graph_config,
                self.solver_config,
                self.seed,
                self.config.run.output_hz,
            )

    def _correspond(
        self, trajectory: Trajectory, boresight: Rotation
    ) -> tuple[PointCloud, CorrespondenceRun]:
        with stage(STAGE_GEOREF):
            cloud = georeference_with(
                self.sim.returns, trajectory, boresight, self.graph_config.lever_arm
            )
        with stage(STAGE_CORRESPOND):
            run = correspond(
                cloud, self.config.correspondence, self.seed, self.config.run.threads
            )
        return cloud, run

    def _row(
        self,
        name: str,
        trajectory: Trajectory,
        boresight: Rotation,
        window: tuple[float, float],
        adjustment: Optional[Adjustment] = None,
        fraction: Optional[float] = None,
    ) -> CaseRow:
        sim = self.sim
        with stage(STAGE_EVALUATE):
            returns = sim.returns.for_line(sim.first_line)
            estimated = georeference_with(
                returns, trajectory, boresight, self.graph_config.lever_arm
            )
            reference = georeference_with(returns, sim.truth, sim.boresight, sim.lever_arm)
            t, position, attitude = trajectory_error_series(trajectory, sim.truth, window)
            row = CaseRow(
                name=name,
                correspondences=adjustment.correspondences if adjustment else 0,
                fraction=fraction,
                trajectory=trajectory_errors(trajectory, sim.truth, window),
                pointcloud=pointcloud_errors(estimated, reference, self.bins),
                solve=adjustment.report if adjustment else None,
                error_series=np.column_stack([t, position, attitude]).tolist(),
            )
        self.logger.info(
            "%s: yaw %.4f deg, up %.3f m, cloud mean %.3f m",
            name,
            row.trajectory.rmse_yaw,
            row.trajectory.rmse_up,
            row.pointcloud.norm_mean,
        )
        return row

    def _report(self, case: int, rows: list[CaseRow], **extra) -> ExperimentReport:
        sim = self.sim
        window = extra.pop("window", self.line_window)
        line_cloud = georeference_with(
            sim.returns.for_line(sim.first_line), sim.truth, sim.boresight, sim.lever_arm
        )
        return ExperimentReport(
            case=case,
            seed=self.seed,
            line=sim.first_line,
            window=window,
            gsd=estimate_gsd(line_cloud.xyz),
            truth_boresight=sim.boresight.to_euler(),
            rows=rows,
            **extra,
        )

    def _quality(self, cloud: PointCloud, run: CorrespondenceRun) -> dict:
        sim = self.sim
        quality = None
        if run.correspondences:
            quality = correspondence_errors(
                run.correspondences, sim.truth, sim.boresight, sim.lever_arm, self.bins
            )
        raw = pair_inlier_ratio(
            cloud,
            run.raw_a,
            run.raw_b,
            sim.truth,
            INLIER_THRESHOLD,
            sim.boresight,
            sim.lever_arm,
        )
        return {"correspondence_quality": quality, "raw_inlier_ratio": raw}

    def case1(self) -> ExperimentReport:
        """Network without and with correspondences on the same flight."""
        sim = self._simulate()
        window = self.line_window
        boresight = self.assumed_boresight
        dn = self._adjust(sim.gnss, [], name=STAGE_APPROX)
        cloud, run = self._correspond(dn.trajectory, boresight)
        dnc = self._adjust(sim.gnss, run.correspondences)
        rows = [
            self._row("dn", dn.trajectory, boresight, window, dn),
            self._row("dnc", dnc.trajectory, boresight, window, dnc),
        ]
        external_path = self.config.inputs.approx_trajectory
        if external_path is not None:
            with stage(STAGE_APPROX):
                external = read_trajectory(external_path)
            _, external_run = self._correspond(external, boresight)
            ext = self._adjust(sim.gnss, external_run.correspondences)
            rows.append(self._row("dnc-external", ext.trajectory, boresight, window, ext))
        base, best = rows[0], rows[1]
        factors = {
            "yaw": improvement(base.trajectory.rmse_yaw, best.trajectory.rmse_yaw),
            "pitch": improvement(base.trajectory.rmse_pitch, best.trajectory.rmse_pitch),
            "roll": improvement(base.trajectory.rmse_roll, best.trajectory.rmse_roll),
            "pointcloud-mean": improvement(
                base.pointcloud.norm_mean, best.pointcloud.norm_mean
            ),
        }
        return self._report(1, rows, factors=factors, **self._quality(cloud, run))

    def case2(self) -> ExperimentReport:
        """Thin the correspondences progressively and re-solve.

        Fractions are taken of the capped set the full run uses, and every solve runs
        uncapped so each row's edge count is its fraction of that set.
        """
        sim = self._simulate()
        window = self.line_window
        boresight = self.assumed_boresight
        dn = self._adjust(sim.gnss, [], name=STAGE_APPROX)
        cloud, run = self._correspond(dn.trajectory, boresight)
        subsets = retention_subsets(
            run.correspondences,
            self.config.case.fractions,
            self.graph_config.max_correspondences,
            self.seed,
        )
        uncapped = self.graph_config.model_copy(update={"max_correspondences": None})
        rows = [self._row("dn", dn.trajectory, boresight, window, dn)]
        factors = {}
        for fraction, subset in subsets:
            solved = self._adjust(sim.gnss, subset, uncapped)
            name = "dnc" if fraction == 1.0 else f"fraction-{fraction:g}"
            row = self._row(name, solved.trajectory, boresight, window, solved, fraction)
            rows.append(row)
            if fraction != 1.0:
                factors[f"rmse-ratio-{fraction:g}"] = improvement(
                    row.pointcloud.norm_rmse, rows[1].pointcloud.norm_rmse
                )
        return self._report(2, rows, factors=factors, **self._quality(cloud, run))

    def case3(self) -> ExperimentReport:
        """Recover a boresight offset the direct georeferencing ignores."""
        offset = self.config.case.boresight_offset
        lidar = self.config.lidar.model_copy(update={"boresight": offset})
        sim = self._simulate(lidar=lidar)
        window = self.line_window
        assumed = self.assumed_boresight
        dn = self._adjust(sim.gnss, [], name=STAGE_APPROX)
        cloud, run = self._correspond(dn.trajectory, assumed)
        known_config = self.graph_config.model_copy(
            update={"boresight": tuple(offset), "estimate_boresight": False}
        )
        known = self._adjust(sim.gnss, run.correspondences, known_config)
        rows = [
            self._row("direct-uncalibrated", dn.trajectory, assumed, window, dn),
            self._row("dnc-known", known.trajectory, sim.boresight, window, known),
        ]
        factors = {}
        if not self.config.case.boresight_known:
            estimate_config = self.graph_config.model_copy(update={"estimate_boresight": True})
            estimated = self._adjust(sim.gnss, run.correspondences, estimate_config)
            row = self._row(
                "dnc-estimated", estimated.trajectory, estimated.boresight, window, estimated
            )
            row.boresight = estimated.boresight.to_euler()
            rows.append(row)
            factors = {
                "estimated-vs-known": improvement(
                    row.pointcloud.norm_mean, rows[1].pointcloud.norm_mean
                ),
                "uncalibrated-vs-estimated": improvement(
                    rows[0].pointcloud.norm_mean, row.pointcloud.norm_mean
                ),
            }
        return self._report(3, rows, factors=factors, **self._quality(cloud, run))

    def outage_windows(self) -> list[tuple[float, float]]:
        """Configured outage windows, or ones centred on the first two flight lines.

        Raises:
            EvaluationError: a window is not inside a flight line.
        """
        case = self.config.case
        lines = self.sim.truth.line_windows or [self.sim.truth.span]
        if case.outages is not None:
            windows = [tuple(w) for w in case.outages]
        else:
            windows = []
            for lo, hi in lines[:2]:
                mid = 0.5 * (lo + hi)
                half = 0.5 * case.outage_duration
                windows.append((mid - half, mid + half))
        for start, end in windows:
            if not any(lo <= start and end <= hi for lo, hi in lines):
                raise EvaluationError(
                    f"Outage window ({start:.1f}, {end:.1f}) is not inside a flight line"
                )
        return windows

    def _outage_rows(
        self, label: str, outages: list[tuple[float, float]], window: tuple[float, float]
    ) -> list[CaseRow]:
        boresight = self.assumed_boresight
        with stage(STAGE_SIMULATE):
            fixes = with_outages(self.config, self.sim.truth, self.seed, outages)
        dn = self._adjust(fixes, [], name=STAGE_APPROX)
        _, run = self._correspond(dn.trajectory, boresight)
        dnc = self._adjust(fixes, run.correspondences)
        return [
            self._row(f"dn-{label}", dn.trajectory, boresight, window, dn),
            self._row(f"dnc-{label}", dnc.trajectory, boresight, window, dnc),
        ]

    def case4(self) -> ExperimentReport:
        """GNSS outages over one or two flight lines."""
        self._simulate()
        with stage(STAGE_EVALUATE):
            windows = self.outage_windows()
        window = windows[0]
        rows = self._outage_rows("single", windows[:1], window)
        factors = {
            "single-pointcloud-mean": improvement(
                rows[0].pointcloud.norm_mean, rows[1].pointcloud.norm_mean
            ),
        }
        if self.config.case.double_outage:
            if len(windows) < 2:
                self.logger.warning("Only one outage window, skipping the double outage")
            else:
                double = self._outage_rows("double", windows[:2], window)
                rows.extend(double)
                base, best = double[0].trajectory, double[1].trajectory
                factors["double-up"] = improvement(base.rmse_up, best.rmse_up)
                factors["double-east"] = improvement(base.rmse_east, best.rmse_east)
                factors["double-north"] = improvement(base.rmse_north, best.rmse_north)
        return self._report(4, rows, factors=factors, window=window, outages=windows)

    def run(self, case_id: int) -> ExperimentReport:
        """Run one case."""
        self.logger.info("Case %d, seed %d", case_id, self.seed)
        return getattr(self, f"case{case_id}")()


def run_case(config: RunConfig) -> list[ExperimentReport]:
    """Run the configured case once per seed."""
    return [
        CaseRunner(config, seed).run(config.case.case_id) for seed in config.case.seeds
    ]
