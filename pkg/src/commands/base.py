#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Base utilities exposing common functionalities for all command classes."""

import argparse
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from pydantic import BaseModel

from core.context import RunContext
from evaluation.metrics import PointCloudErrorReport
from evaluation.scenario import StageError
from formats.reports import read_json, write_json
from formats.text import write_error_series, write_histogram
from geometry import Rotation
from simulator.specs import Vector3
from utils.logging import WithLogging

__all__ = ["BaseCommand", "Mounting", "StageError", "given"]


class Mounting(BaseModel):
    """Scanner mounting: boresight angles (deg) and lever arm (m)."""

    boresight: Vector3 = (0.0, 0.0, 0.0)
    lever_arm: Vector3 = (0.0, 0.0, 0.0)

    @property
    def rotation(self) -> Rotation:
        """Boresight as a rotation."""
        return Rotation.from_euler(*self.boresight)

    @classmethod
    def read(cls, path: Path) -> "Mounting":
        """Load a mounting file."""
        return cls.model_validate(read_json(path))


def given(**values: Any) -> dict:
    """Keyword values that were actually supplied on the command line."""
    return {key: value for key, value in values.items() if value is not None}


class BaseCommand(WithLogging):
    """Base class for all command handlers.

    A handler declares its arguments, the configuration overrides its flags map to, and
    runs against a RunContext.
    """

    name: str = ""
    help: str = ""

    def __init__(self, context: RunContext):
        self.context = context

    @property
    def config(self):
        """Validated run configuration."""
        return self.context.config

    @property
    def seed(self) -> int:
        """Run seed."""
        return self.config.run.seed

    @property
    def threads(self) -> int:
        """Worker thread cap."""
        return self.config.run.threads

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Declare the command's own arguments."""

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> dict:
        """Configuration values set through the command's flags."""
        return {}

    def run(self, args: argparse.Namespace) -> None:
        """Execute the command."""
        raise NotImplementedError

    def write(self, stage: str, name: Any, writer: Callable[[Path, Any], Any], obj: Any) -> Path:
        """Write one artifact inside the output directory and register it."""
        path = self.context.path(name)
        writer(path, obj)
        return self.context.record(stage, path)

    def write_report(self, stage: str, name: Any, report: Any) -> Path:
        """Write a JSON report."""
        return self.write(stage, name, write_json, report)

    def write_errors(
        self,
        stage: str,
        prefix: str,
        pointcloud: Optional[PointCloudErrorReport],
        series: Optional[list[list[float]]],
    ) -> None:
        """Histogram and error time series of one evaluated trajectory."""
        if pointcloud is not None:
            histogram = pointcloud.histogram
            path = self.context.path(f"{prefix}-histogram.csv")
            write_histogram(path, histogram.edges, histogram.counts)
            self.context.record(stage, path)
        if series:
            table = np.asarray(series, dtype=float)
            path = self.context.path(f"{prefix}-errors.csv")
            write_error_series(path, table[:, 0], table[:, 1:4], table[:, 4:7])
            self.context.record(stage, path)
