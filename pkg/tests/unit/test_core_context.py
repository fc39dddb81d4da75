# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for RunContext."""

import sys
from pathlib import Path

import pytest

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from constants import STAGE_APPROX, STAGE_GEOREF, STAGE_SIMULATE  # noqa: E402
from core.context import OutputPathError, RunContext  # noqa: E402
from core.run_config import RunConfig  # noqa: E402


@pytest.fixture
def context(tmp_path):
    """Context writing under a temporary directory."""
    return RunContext(RunConfig(), tmp_path / "out")


def _complete(context: RunContext, stage: str, name: str) -> None:
    path = context.path(name)
    path.write_text(stage)
    context.record(stage, path)
    context.mark_done(stage)


class TestOutputPaths:
    """Tests for artifact path confinement."""

    def test_nested_names_are_created(self, context):
        """Parents of an artifact are created inside the output directory."""
        path = context.path("clouds/line-1.bin")
        assert path.parent.is_dir()
        assert path.is_relative_to(context.out_dir)

    def test_escape_is_rejected(self, context):
        """Names resolving outside the output directory are refused."""
        with pytest.raises(OutputPathError):
            context.path("../elsewhere.csv")
        with pytest.raises(OutputPathError):
            context.path("/etc/passwd")


class TestCheckpoint:
    """Tests for pipeline checkpoint and resume."""

    def test_no_checkpoint(self, context):
        """A fresh directory resumes nothing."""
        assert context.resume() == []
        assert not context.is_done(STAGE_SIMULATE)

    def test_resume_after_completed_stages(self, context):
        """Completed stages with their artifacts are skipped on resume."""
        _complete(context, STAGE_SIMULATE, "truth.csv")
        _complete(context, STAGE_APPROX, "approx.csv")
        again = RunContext(RunConfig(), context.out_dir)
        assert again.resume() == [STAGE_SIMULATE, STAGE_APPROX]
        assert again.is_done(STAGE_APPROX)
        assert again.artifacts[STAGE_SIMULATE] == ["truth.csv"]

    def test_missing_artifact_reruns_from_there(self, context):
        """A deleted artifact invalidates its stage and every later one."""
        _complete(context, STAGE_SIMULATE, "truth.csv")
        _complete(context, STAGE_APPROX, "approx.csv")
        _complete(context, STAGE_GEOREF, "approx-cloud.bin")
        (context.out_dir / "approx.csv").unlink()
        again = RunContext(RunConfig(), context.out_dir)
        assert again.resume() == [STAGE_SIMULATE]

    def test_changed_configuration_starts_over(self, context):
        """A checkpoint of another configuration is ignored."""
        _complete(context, STAGE_SIMULATE, "truth.csv")
        changed = RunConfig(run={"seed": 5})
        assert RunContext(changed, context.out_dir).resume() == []

    def test_digest_tracks_configuration(self, tmp_path):
        """Equal configurations share a digest."""
        a = RunContext(RunConfig(), tmp_path)
        b = RunContext(RunConfig(), tmp_path)
        c = RunContext(RunConfig(run={"threads": 4}), tmp_path)
        assert a.digest == b.digest
        assert a.digest != c.digest
