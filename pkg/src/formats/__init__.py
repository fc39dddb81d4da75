# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""File codecs shared by every command."""

from formats.base import FormatError, atomic_write
from formats.binary import read_pointcloud, read_returns, write_pointcloud, write_returns
from formats.reports import dumps, read_json, write_json
from formats.text import (
    read_correspondences,
    read_error_series,
    read_gnss,
    read_imu,
    read_pointcloud_csv,
    read_trajectory,
    write_correspondences,
    write_error_series,
    write_gnss,
    write_histogram,
    write_imu,
    write_pointcloud_csv,
    write_trajectory,
)

__all__ = [
    "FormatError",
    "atomic_write",
    "dumps",
    "read_correspondences",
    "read_error_series",
    "read_gnss",
    "read_imu",
    "read_json",
    "read_pointcloud",
    "read_pointcloud_csv",
    "read_returns",
    "read_trajectory",
    "write_correspondences",
    "write_error_series",
    "write_gnss",
    "write_histogram",
    "write_imu",
    "write_json",
    "write_pointcloud",
    "write_pointcloud_csv",
    "write_returns",
    "write_trajectory",
]
