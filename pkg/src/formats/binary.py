#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Binary point-cloud and raw-return files.

Layout: 8-byte magic, little-endian u32 version, u64 record count, then packed
little-endian records.
"""

import logging
from pathlib import Path

import numpy as np

from constants import POINTCLOUD_MAGIC, POINTCLOUD_VERSION, RETURNS_MAGIC, RETURNS_VERSION
from core.domain import LidarReturns, PointCloud
from formats.base import FormatError, PathLike, atomic_write, check_finite

logger = logging.getLogger(__name__)

HEADER = np.dtype([("magic", "S8"), ("version", "<u4"), ("count", "<u8")])

POINT_V1 = np.dtype(
    [
        ("x", "<f8"),
        ("y", "<f8"),
        ("z", "<f8"),
        ("t", "<f8"),
        ("return_id", "<u8"),
        ("line_id", "<u4"),
    ]
)
POINT_V2 = np.dtype(POINT_V1.descr + [("vx", "<f8"), ("vy", "<f8"), ("vz", "<f8")])
POINT_RECORDS = {1: POINT_V1, 2: POINT_V2}

RETURN_V1 = np.dtype(
    [
        ("t", "<f8"),
        ("vx", "<f8"),
        ("vy", "<f8"),
        ("vz", "<f8"),
        ("return_id", "<u8"),
        ("line_id", "<u4"),
    ]
)
RETURN_RECORDS = {1: RETURN_V1}


def _pack(magic: bytes, version: int, records: np.ndarray) -> bytes:
    header = np.array([(magic, version, len(records))], dtype=HEADER)
    return header.tobytes() + records.tobytes()


def _unpack(
    path: PathLike, magic: bytes, layouts: dict[int, np.dtype]
) -> tuple[int, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.itemsize:
        raise FormatError(f"{path}: file shorter than its header")
    header = np.frombuffer(raw[: HEADER.itemsize], dtype=HEADER)[0]
    if bytes(header["magic"]) != magic:
        raise FormatError(f"{path}: bad magic {bytes(header['magic'])!r}, expected {magic!r}")
    version = int(header["version"])
    if version not in layouts:
        raise FormatError(f"{path}: unsupported version {version}")
    layout = layouts[version]
    expected = int(header["count"])
    body = raw[HEADER.itemsize :]
    actual, extra = divmod(len(body), layout.itemsize)
    if actual != expected or extra:
        raise FormatError(
            f"{path}: header announces {expected} records, file holds {actual}"
            + (f" and {extra} stray bytes" if extra else "")
        )
    return version, np.frombuffer(body, dtype=layout)


def write_pointcloud(path: PathLike, cloud: PointCloud) -> Path:
    """Write a cloud; version 2 when scanner vectors are present, version 1 otherwise."""
    check_finite(f"{path}: xyz", cloud.xyz)
    check_finite(f"{path}: t", cloud.t)
    version = POINTCLOUD_VERSION if cloud.has_provenance else 1
    records = np.zeros(len(cloud), dtype=POINT_RECORDS[version])
    records["x"], records["y"], records["z"] = cloud.xyz.T
    records["t"] = cloud.t
    records["return_id"] = cloud.return_id
    records["line_id"] = cloud.line_id
    if version == POINTCLOUD_VERSION:
        check_finite(f"{path}: v", cloud.v)
        records["vx"], records["vy"], records["vz"] = cloud.v.T
    atomic_write(path, _pack(POINTCLOUD_MAGIC, version, records))
    logger.debug("Wrote %d points to %s (v%d)", len(cloud), path, version)
    return Path(path)


def read_pointcloud(path: PathLike) -> PointCloud:
    """Read a version 1 or version 2 cloud.

    Raises:
        FormatError: magic mismatch, unknown version, truncation or NaN fields.
    """
    version, records = _unpack(path, POINTCLOUD_MAGIC, POINT_RECORDS)
    xyz = np.column_stack([records["x"], records["y"], records["z"]])
    check_finite(f"{path}: xyz", xyz)
    check_finite(f"{path}: t", records["t"])
    v = None
    if version == POINTCLOUD_VERSION:
        v = np.column_stack([records["vx"], records["vy"], records["vz"]])
        check_finite(f"{path}: v", v)
    return PointCloud(
        xyz,
        records["t"].copy(),
        records["return_id"].copy(),
        records["line_id"].copy(),
        v,
    )


def write_returns(path: PathLike, returns: LidarReturns) -> Path:
    """Write raw scanner-frame returns."""
    check_finite(f"{path}: t", returns.t)
    check_finite(f"{path}: v", returns.v)
    records = np.zeros(len(returns), dtype=RETURN_V1)
    records["t"] = returns.t
    records["vx"], records["vy"], records["vz"] = returns.v.T
    records["return_id"] = returns.return_id
    records["line_id"] = returns.line_id
    atomic_write(path, _pack(RETURNS_MAGIC, RETURNS_VERSION, records))
    logger.debug("Wrote %d returns to %s", len(returns), path)
    return Path(path)


def read_returns(path: PathLike) -> LidarReturns:
    """Read raw returns.

    Raises:
        FormatError: magic mismatch, unknown version, truncation or NaN fields.
    """
    _, records = _unpack(path, RETURNS_MAGIC, RETURN_RECORDS)
    v = np.column_stack([records["vx"], records["vy"], records["vz"]])
    check_finite(f"{path}: t", records["t"])
    check_finite(f"{path}: v", v)
    return LidarReturns(
        records["t"].copy(), v, records["line_id"].copy(), records["return_id"].copy()
    )
