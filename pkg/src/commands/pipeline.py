#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""End-to-end run: data, approximate trajectory, correspondences, adjustment, evaluation.

Every stage reads its inputs from the artifacts of the previous ones, so a resumed run
computes exactly what an uninterrupted one does.
"""

import argparse
from typing import Optional

from commands.adjust import AdjustCommand
from commands.base import BaseCommand
from commands.correspond import CorrespondCommand
from commands.evaluate import EvaluateCommand
from commands.georef import GeorefCommand
from commands.simulate import SimulateCommand
from constants import (
    ARTIFACT_ADJUST_REPORT,
    ARTIFACT_APPROX,
    ARTIFACT_APPROX_CLOUD,
    ARTIFACT_APPROX_REPORT,
    ARTIFACT_CLOUD,
    ARTIFACT_CORRESPONDENCES,
    ARTIFACT_GNSS,
    ARTIFACT_IMU,
    ARTIFACT_MOUNTING,
    ARTIFACT_RETURNS,
    ARTIFACT_TRAJECTORY,
    ARTIFACT_TRUTH,
    PIPELINE_STAGES,
    STAGE_ADJUST,
    STAGE_APPROX,
    STAGE_CORRESPOND,
    STAGE_EVALUATE,
    STAGE_GEOREF,
    STAGE_REGEOREF,
    STAGE_SIMULATE,
)
from evaluation.scenario import stage
from formats.text import read_trajectory, write_trajectory


class PipelineCommand(BaseCommand):
    """Run every stage in order, checkpointing after each one."""

    name = "pipeline"
    help = "run the full georeferencing flow"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Resume and early-stop switches."""
        parser.add_argument(
            "--resume", action="store_true", help="skip stages completed by a previous run"
        )
        parser.add_argument(
            "--stop-after", choices=PIPELINE_STAGES, help="stop once this stage completes"
        )

    def run(self, args: argparse.Namespace) -> None:
        """Execute the pending stages."""
        self.execute(resume=args.resume, stop_after=args.stop_after)

    def execute(self, resume: bool = False, stop_after: Optional[str] = None) -> list[str]:
        """Run the stages not yet completed.

        Returns:
            The stages executed by this call.
        """
        if resume:
            self.context.resume()
        steps = {
            STAGE_SIMULATE: self._simulate,
            STAGE_APPROX: self._approx,
            STAGE_GEOREF: self._georef,
            STAGE_CORRESPOND: self._correspond,
            STAGE_ADJUST: self._adjust,
            STAGE_REGEOREF: self._regeoref,
            STAGE_EVALUATE: self._evaluate,
        }
        executed = []
        for name in PIPELINE_STAGES:
            if self.context.is_done(name):
                self.logger.info("Skipping completed stage %s", name)
            else:
                steps[name]()
                self.context.mark_done(name)
                executed.append(name)
            if name == stop_after:
                self.logger.info("Stopping after %s", name)
                break
        return executed

    def _simulate(self) -> None:
        command = SimulateCommand(self.context)
        if self.config.inputs.ingests:
            command.ingest()
        else:
            command.simulate()

    def _approx(self) -> None:
        external = self.config.inputs.approx_trajectory
        if external is not None:
            with stage(STAGE_APPROX):
                trajectory = read_trajectory(external)
                self.write(STAGE_APPROX, ARTIFACT_APPROX, write_trajectory, trajectory)
            return
        # Without correspondences the boresight is unobservable.
        graph_config = self.config.graph_config().model_copy(
            update={"estimate_boresight": False}
        )
        AdjustCommand(self.context).adjust(
            self.context.path(ARTIFACT_IMU),
            self.context.path(ARTIFACT_GNSS),
            None,
            ARTIFACT_APPROX,
            ARTIFACT_APPROX_REPORT,
            stage_name=STAGE_APPROX,
            graph_config=graph_config,
        )

    def _georef(self) -> None:
        command = GeorefCommand(self.context)
        command.georeference(
            self.context.path(ARTIFACT_RETURNS),
            self.context.path(ARTIFACT_APPROX),
            ARTIFACT_APPROX_CLOUD,
            command.boresight(),
        )

    def _correspond(self) -> None:
        CorrespondCommand(self.context).correspond(self.context.path(ARTIFACT_APPROX_CLOUD))

    def _adjust(self) -> None:
        AdjustCommand(self.context).adjust(
            self.context.path(ARTIFACT_IMU),
            self.context.path(ARTIFACT_GNSS),
            self.context.path(ARTIFACT_CORRESPONDENCES),
            ARTIFACT_TRAJECTORY,
            ARTIFACT_ADJUST_REPORT,
        )

    def _regeoref(self) -> None:
        command = GeorefCommand(self.context)
        command.georeference(
            self.context.path(ARTIFACT_RETURNS),
            self.context.path(ARTIFACT_TRAJECTORY),
            ARTIFACT_CLOUD,
            command.boresight(self.context.path(ARTIFACT_ADJUST_REPORT)),
            stage_name=STAGE_REGEOREF,
        )

    def _evaluate(self) -> None:
        truth = self.context.path(ARTIFACT_TRUTH)
        if not truth.is_file():
            self.logger.warning("No reference trajectory, nothing to evaluate")
            return
        EvaluateCommand(self.context).evaluate(
            self.context.path(ARTIFACT_TRAJECTORY),
            truth,
            returns=self.context.path(ARTIFACT_RETURNS),
            mounting_path=self.context.path(ARTIFACT_MOUNTING),
            baseline_path=self.context.path(ARTIFACT_APPROX),
            solve_report=self.context.path(ARTIFACT_ADJUST_REPORT),
            correspondences_path=self.context.path(ARTIFACT_CORRESPONDENCES),
        )
