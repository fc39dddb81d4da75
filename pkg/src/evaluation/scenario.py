#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Stages shared by the pipeline command and the evaluation cases."""

import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from core.domain import (
    Correspondence,
    GnssFix,
    ImuMeasurements,
    LidarReturns,
    PointCloud,
    Trajectory,
)
from core.run_config import RunConfig
from correspondence.pipeline import CorrespondenceConfig, CorrespondenceRun, correspond_lines
from geometry import Rotation
from network.extract import extract_boresight, extract_trajectory
from network.graph import FactorGraph, GraphConfig, build_graph
from network.solver import SolveReport, SolverConfig, solve
from network.state import NavigationState
from simulator.lidar import georeference, scan_scene
from simulator.scene import generate_scene, scene_bounds
from simulator.sensors import synthesize_gnss, synthesize_imu
from simulator.specs import FlightPlan, GnssSpec, LidarSpec
from simulator.trajectory import generate_trajectory

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"Stage {stage} failed: {cause}")


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Label any error raised inside the block with a stage name."""
    logger.info("Stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e


@dataclass
class Simulation:
    """Ground truth and the sensor data synthesized from it."""

    truth: Trajectory
    imu: ImuMeasurements
    gnss: list[GnssFix]
    returns: LidarReturns
    boresight: Rotation
    lever_arm: np.ndarray

    @property
    def first_line(self) -> int:
        """Smallest flight-line id with returns."""
        return int(self.returns.line_id.min())


@dataclass
class Adjustment:
    """Output of one network solve."""

    trajectory: Trajectory
    report: SolveReport
    boresight: Rotation
    graph: FactorGraph
    correspondences: int


def resolved_plan(flight: FlightPlan, lidar: LidarSpec) -> FlightPlan:
    """Flight plan with the line spacing derived from the scanner swath."""
    return flight.with_spacing_for(lidar.swath(flight.altitude_agl))


def simulate(
    config: RunConfig,
    seed: int,
    gnss: Optional[GnssSpec] = None,
    lidar: Optional[LidarSpec] = None,
) -> Simulation:
    """Fly the plan over a generated scene and synthesize every sensor."""
    gnss = gnss or config.gnss
    lidar = lidar or config.lidar
    plan = resolved_plan(config.flight, lidar)
    truth = generate_trajectory(plan, config.imu.rate, seed)
    imu = synthesize_imu(truth, config.imu, seed)
    fixes = synthesize_gnss(truth, gnss, seed)
    spec = config.scene
    if spec.bounds is None:
        half_swath = 0.5 * lidar.swath(plan.altitude_agl)
        spec = spec.model_copy(
            update={"bounds": scene_bounds(truth.positions, half_swath, spec.margin)}
        )
    scene = generate_scene(spec, seed)
    returns = scan_scene(truth, scene, lidar, seed, config.run.threads)
    logger.info(
        "Simulated %.1f s: %d IMU samples, %d GNSS fixes, %d returns",
        truth.t[-1] - truth.t[0],
        len(imu),
        len(fixes),
        len(returns),
    )
    return Simulation(
        truth, imu, fixes, returns, lidar.boresight_rotation, np.asarray(lidar.lever_arm)
    )


def with_outages(
    config: RunConfig, truth: Trajectory, seed: int, outages: list[tuple[float, float]]
) -> list[GnssFix]:
    """GNSS fixes of the same seed with extra outage windows."""
    spec = config.gnss.model_copy(update={"outages": sorted(config.gnss.outages + outages)})
    return synthesize_gnss(truth, GnssSpec.model_validate(spec.model_dump()), seed)


def adjust(
    imu: ImuMeasurements,
    gnss: list[GnssFix],
    correspondences: list[Correspondence],
    graph_config: GraphConfig,
    solver_config: Optional[SolverConfig] = None,
    seed: int = 0,
    output_hz: Optional[float] = None,
    initial: Optional[NavigationState] = None,
) -> Adjustment:
    """Build, solve and read out the Dynamic Network."""
    graph = build_graph(imu, gnss, correspondences, graph_config, initial, seed)
    report = solve(graph, solver_config)
    trajectory = extract_trajectory(graph, output_hz or graph_config.keyframe_hz)
    if graph_config.estimate_boresight:
        boresight = extract_boresight(graph)
    else:
        boresight = Rotation.from_euler(*graph_config.boresight)
    used = graph.edge_counts().get("correspondence", 0)
    return Adjustment(trajectory, report, boresight, graph, used)


def georeference_with(
    returns: LidarReturns, trajectory: Trajectory, boresight: Rotation, lever_arm
) -> PointCloud:
    """Direct georeferencing of the returns covered by a trajectory."""
    start, end = trajectory.span
    inside = (returns.t >= start) & (returns.t <= end)
    if not np.all(inside):
        logger.warning("Dropping %d returns outside the trajectory", int((~inside).sum()))
        returns = returns.select(inside)
    return georeference(returns, trajectory, boresight, np.asarray(lever_arm, dtype=float))


def correspond(
    cloud: PointCloud, config: CorrespondenceConfig, seed: int, threads: int
) -> CorrespondenceRun:
    """Correspondences between adjacent flight lines of a cloud."""
    run = correspond_lines(cloud, config, seed, threads)
    logger.info(
        "Kept %d of %d raw matches over %d tiles (sigma %.3f m)",
        run.kept_count,
        run.raw_count,
        len(run.tiles),
        run.sigma,
    )
    return run
