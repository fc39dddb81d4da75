# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Helper functions for integration tests."""

import logging
from pathlib import Path
from typing import Optional

import yaml

from cli import main
from constants import CHECKPOINT_FILE, EXIT_OK

logger = logging.getLogger(__name__)

# Two short lines over an urban block; big enough for correspondences, small enough for CI.
SMALL_RUN = {
    "run": {"seed": 7, "threads": 1},
    "flight": {"lines": 2, "line-length": 160.0, "run-in": 10.0},
    "lidar": {"point-rate": 10000.0},
    "scene": {"typology": "urban"},
    "network": {"max-iter": 15},
}


def merged(base: dict, overrides: Optional[dict]) -> dict:
    """Nested copy of base with overrides applied section by section."""
    out = {section: dict(values) for section, values in base.items()}
    for section, values in (overrides or {}).items():
        out.setdefault(section, {}).update(values)
    return out


def write_config(path: Path, overrides: Optional[dict] = None) -> Path:
    """Write the small run configuration, with overrides, as YAML."""
    path.write_text(yaml.safe_dump(merged(SMALL_RUN, overrides), sort_keys=False))
    return path


def run(*argv: str) -> int:
    """Invoke the command line in process."""
    logger.info("kinscan %s", " ".join(argv))
    return main(list(argv))


def run_ok(*argv: str) -> None:
    """Invoke the command line and require success."""
    code = run(*argv)
    assert code == EXIT_OK, f"kinscan {' '.join(argv)} exited with {code}"


def artifacts(out_dir: Path) -> dict[str, bytes]:
    """Contents of every output except the checkpoint."""
    return {
        str(path.relative_to(out_dir)): path.read_bytes()
        for path in sorted(out_dir.rglob("*"))
        if path.is_file() and path.name != CHECKPOINT_FILE
    }
