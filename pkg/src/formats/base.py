#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Shared pieces of the file codecs: errors, atomic writes and float text."""

import os
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

PathLike = Union[str, Path]


class FormatError(ValueError):
    """A file does not follow its documented layout."""


def atomic_write(path: PathLike, data: Union[bytes, str]) -> Path:
    """Write a whole file through a sibling temporary file and a rename.

    Readers never observe a half-written file; on failure the temporary file is removed
    and the previous content, if any, is untouched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def shortest(value: float) -> str:
    """Shortest text that parses back to the same double."""
    return repr(float(value))


def significant(value: float, digits: int = 10) -> str:
    """Fixed number of significant digits."""
    return f"{float(value):.{digits}g}"


def check_finite(name: str, values: np.ndarray) -> None:
    """Raise FormatError when an array holds NaN or infinite values."""
    bad = ~np.isfinite(np.asarray(values, dtype=float))
    if np.any(bad):
        row = int(np.argwhere(bad)[0][0])
        raise FormatError(f"{name}: non-finite value in record {row}")
