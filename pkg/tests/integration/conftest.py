# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Fixtures for the end-to-end and acceptance runs."""

import sys
from pathlib import Path

import pytest

# Add src and this directory to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))
sys.path.insert(0, str(Path(__file__).parent))

from helpers import write_config  # noqa: E402


@pytest.fixture
def config_file(tmp_path):
    """The small run configuration on disk."""
    return write_config(tmp_path / "config.yaml")
