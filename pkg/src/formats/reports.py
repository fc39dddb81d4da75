#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""JSON reports: sorted keys, two-space indent, shortest round-trip floats."""

import json
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel

from formats.base import PathLike, atomic_write


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _plain(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def dumps(report: Union[BaseModel, dict]) -> str:
    """Canonical JSON text of a report."""
    return json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: PathLike, report: Union[BaseModel, dict]) -> Path:
    """Atomically write a report."""
    return atomic_write(path, dumps(report))


def read_json(path: PathLike) -> dict:
    """Load a report."""
    return json.loads(Path(path).read_text())
