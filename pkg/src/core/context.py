#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Run context definition: configuration, output directory and pipeline checkpoint."""

import hashlib
from pathlib import Path
from typing import Optional, Union

from constants import CHECKPOINT_FILE, PIPELINE_STAGES
from core.run_config import RunConfig
from formats.reports import dumps, read_json, write_json
from utils.logging import WithLogging


class OutputPathError(ValueError):
    """An artifact path escapes the output directory."""


class RunContext(WithLogging):
    """Properties of a run - single source of truth for its state."""

    def __init__(self, config: RunConfig, out_dir: Optional[Union[str, Path]] = None):
        self.config = config
        self.out_dir = Path(out_dir if out_dir is not None else config.run.out_dir).resolve()
        self.artifacts: dict[str, list[str]] = {}
        self.completed: list[str] = []

    @property
    def digest(self) -> str:
        """Fingerprint of the validated configuration."""
        text = dumps(self.config.model_dump(mode="json"))
        return hashlib.sha256(text.encode()).hexdigest()

    @property
    def checkpoint(self) -> Path:
        """Path of the pipeline checkpoint file."""
        return self.out_dir / CHECKPOINT_FILE

    def path(self, name: Union[str, Path]) -> Path:
        """Resolve an artifact name inside the output directory.

        Raises:
            OutputPathError: the name resolves outside the output directory.
        """
        target = (self.out_dir / name).resolve()
        if not target.is_relative_to(self.out_dir):
            raise OutputPathError(f"{name} resolves outside {self.out_dir}")
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def record(self, stage: str, path: Path) -> Path:
        """Register a written artifact under its stage."""
        name = str(Path(path).resolve().relative_to(self.out_dir))
        self.artifacts.setdefault(stage, [])
        if name not in self.artifacts[stage]:
            self.artifacts[stage].append(name)
        self.logger.info("Wrote %s", name)
        return path

    def is_done(self, stage: str) -> bool:
        """True when a stage completed in this run or a resumed one."""
        return stage in self.completed

    def mark_done(self, stage: str) -> None:
        """Record a completed stage and persist the checkpoint."""
        if stage not in self.completed:
            self.completed.append(stage)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        write_json(
            self.checkpoint,
            {
                "artifacts": self.artifacts,
                "completed": self.completed,
                "config": self.digest,
            },
        )

    def resume(self) -> list[str]:
        """Load the checkpoint of a previous run with the same configuration.

        Stages whose artifacts went missing, and every stage after them, are run again.

        Returns:
            Completed stages in pipeline order.
        """
        if not self.checkpoint.is_file():
            self.logger.info("No checkpoint in %s, starting from scratch", self.out_dir)
            return []
        state = read_json(self.checkpoint)
        if state.get("config") != self.digest:
            self.logger.warning("Configuration changed since the checkpoint, starting over")
            return []
        artifacts = state.get("artifacts", {})
        done = set(state.get("completed", []))
        self.completed = []
        for stage in PIPELINE_STAGES:
            if stage not in done:
                break
            files = artifacts.get(stage, [])
            if not all((self.out_dir / name).is_file() for name in files):
                self.logger.warning("Artifacts of %s are missing, rerunning from there", stage)
                break
            self.completed.append(stage)
            self.artifacts[stage] = list(files)
        self.logger.info("Resuming after %s", self.completed[-1] if self.completed else "nothing")
        return list(self.completed)
