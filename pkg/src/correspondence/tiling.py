#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Overlap tiling, voxel thinning and ground sampling distance."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

GSD_SAMPLE = 20_000


@dataclass(frozen=True)
class TilePair:
    """One square of the overlap with the indices of both clouds' points inside it.

    Args:
        index: position of the tile in row-major grid order.
        bounds: (x_min, y_min, x_max, y_max) in meters.
        points_a: indices into the first cloud.
        points_b: indices into the second cloud.
    """

    index: int
    bounds: tuple[float, float, float, float]
    points_a: np.ndarray
    points_b: np.ndarray


def _cells(xy: np.ndarray, origin: np.ndarray, size: float, shape: tuple[int, int]):
    """Grid cell of every point, -1 outside; the far edge belongs to the last cell."""
    rel = (xy - origin) / size
    col = np.floor(rel[:, 0]).astype(np.int64)
    row = np.floor(rel[:, 1]).astype(np.int64)
    col = np.where((col == shape[1]) & (rel[:, 0] <= shape[1]), shape[1] - 1, col)
    row = np.where((row == shape[0]) & (rel[:, 1] <= shape[0]), shape[0] - 1, row)
    inside = (col >= 0) & (col < shape[1]) & (row >= 0) & (row < shape[0])
    return np.where(inside, row * shape[1] + col, -1)


def extract_overlap_tiles(
    xyz_a: np.ndarray, xyz_b: np.ndarray, tile_size: float = 50.0, min_points: int = 100
) -> list[TilePair]:
    """Square tiles over the intersection of the clouds' xy bounding boxes.

    The grid starts at the lower corner of the intersection. Each point belongs to the
    tile containing it; tiles with fewer than min_points on either side are dropped.
    """
    if tile_size <= 0.0:
        raise ValueError(f"Tile size must be positive, got {tile_size}")
    if not len(xyz_a) or not len(xyz_b):
        return []
    lo = np.maximum(xyz_a[:, :2].min(axis=0), xyz_b[:, :2].min(axis=0))
    hi = np.minimum(xyz_a[:, :2].max(axis=0), xyz_b[:, :2].max(axis=0))
    if np.any(hi <= lo):
        return []
    cols = max(1, int(math.ceil((hi[0] - lo[0]) / tile_size - 1e-9)))
    rows = max(1, int(math.ceil((hi[1] - lo[1]) / tile_size - 1e-9)))
    cell_a = _cells(xyz_a[:, :2], lo, tile_size, (rows, cols))
    cell_b = _cells(xyz_b[:, :2], lo, tile_size, (rows, cols))
    order_a = np.argsort(cell_a, kind="stable")
    order_b = np.argsort(cell_b, kind="stable")
    bins = np.arange(rows * cols + 1)
    start_a = np.searchsorted(cell_a[order_a], bins)
    start_b = np.searchsorted(cell_b[order_b], bins)

    tiles = []
    for cell in range(rows * cols):
        idx_a = order_a[start_a[cell] : start_a[cell + 1]]
        idx_b = order_b[start_b[cell] : start_b[cell + 1]]
        if len(idx_a) < min_points or len(idx_b) < min_points:
            continue
        row, col = divmod(cell, cols)
        x0 = float(lo[0] + col * tile_size)
        y0 = float(lo[1] + row * tile_size)
        tiles.append(TilePair(cell, (x0, y0, x0 + tile_size, y0 + tile_size), idx_a, idx_b))
    logger.debug("Overlap %dx%d grid, %d tiles kept", cols, rows, len(tiles))
    return tiles


def voxel_downsample(xyz: np.ndarray, voxel: float) -> np.ndarray:
    """Indices of one point per occupied voxel, the lowest index in each."""
    if not len(xyz):
        return np.zeros(0, dtype=np.int64)
    if voxel <= 0.0:
        return np.arange(len(xyz))
    keys = np.floor(xyz / voxel).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return np.sort(first)


def estimate_gsd(xyz: np.ndarray) -> float:
    """Mean nearest-neighbour distance, over an evenly strided sample of large clouds."""
    if len(xyz) < 2:
        raise ValueError("At least two points are needed to estimate the GSD")
    tree = cKDTree(xyz)
    stride = max(1, len(xyz) // GSD_SAMPLE)
    distances, _ = tree.query(xyz[::stride], k=2)
    return float(np.mean(distances[:, 1]))
