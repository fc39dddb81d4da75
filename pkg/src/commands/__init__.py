# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Command handlers, one class per subcommand."""

from commands.adjust import AdjustCommand
from commands.base import BaseCommand, StageError
from commands.correspond import CorrespondCommand
from commands.evaluate import (
    Case1Command,
    Case2Command,
    Case3Command,
    Case4Command,
    EvaluateCommand,
)
from commands.georef import GeorefCommand
from commands.pipeline import PipelineCommand
from commands.simulate import SimulateCommand

COMMANDS: list[type[BaseCommand]] = [
    SimulateCommand,
    GeorefCommand,
    CorrespondCommand,
    AdjustCommand,
    EvaluateCommand,
    PipelineCommand,
    Case1Command,
    Case2Command,
    Case3Command,
    Case4Command,
]

__all__ = [
    "COMMANDS",
    "AdjustCommand",
    "BaseCommand",
    "Case1Command",
    "Case2Command",
    "Case3Command",
    "Case4Command",
    "CorrespondCommand",
    "EvaluateCommand",
    "GeorefCommand",
    "PipelineCommand",
    "SimulateCommand",
    "StageError",
]
