#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Cylindrical occupancy descriptor.

Neighbours are re-expressed about the described point in a frame spanned by the vertical
axis and the neighbourhood's horizontal principal direction, then binned on a
4 (azimuth) x 4 (equal-area rings) x 6 (height) grid. Three eigenvalue shape features
are appended and the vector is L2-normalized.
"""

import math
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from correspondence.keypoints import neighbour_pairs

AZIMUTH_BINS = 4
RADIAL_BINS = 4
HEIGHT_BINS = 6
HISTOGRAM_SIZE = AZIMUTH_BINS * RADIAL_BINS * HEIGHT_BINS
DESCRIPTOR_SIZE = HISTOGRAM_SIZE + 3
SHAPE_WEIGHT = 0.25
CHUNK = 2048


def _moment(owner: np.ndarray, values: np.ndarray, count: int) -> np.ndarray:
    return np.bincount(owner, weights=values, minlength=count)


def _describe_chunk(
    xyz: np.ndarray, centers: np.ndarray, tree: cKDTree, radius: float, min_neighbors: int
) -> tuple[np.ndarray, np.ndarray]:
    count = len(centers)
    owner, neighbour, sizes = neighbour_pairs(tree, centers, radius)
    rel = xyz[neighbour] - centers[owner]
    n = np.maximum(sizes, 1).astype(float)

    mean = np.stack([_moment(owner, rel[:, k], count) for k in range(3)], axis=1) / n[:, None]
    dev = rel - mean[owner]
    cov = np.zeros((count, 3, 3))
    for a in range(3):
        for b in range(a, 3):
            value = _moment(owner, dev[:, a] * dev[:, b], count) / n
            cov[:, a, b] = value
            cov[:, b, a] = value

    angle = 0.5 * np.arctan2(2.0 * cov[:, 0, 1], cov[:, 0, 0] - cov[:, 1, 1])
    ex, ey = np.cos(angle)[owner], np.sin(angle)[owner]
    along = rel[:, 0] * ex + rel[:, 1] * ey
    across = -rel[:, 0] * ey + rel[:, 1] * ex
    flip = np.where(_moment(owner, along**3, count) < 0.0, -1.0, 1.0)[owner]
    along, across = along * flip, across * flip

    azimuth = np.mod(np.arctan2(across, along), 2.0 * math.pi)
    az_bin = np.minimum((azimuth / (2.0 * math.pi) * AZIMUTH_BINS).astype(np.int64), 3)
    ring = (along**2 + across**2) / radius**2
    ring_bin = np.clip((ring * RADIAL_BINS).astype(np.int64), 0, RADIAL_BINS - 1)
    height = (rel[:, 2] + radius) / (2.0 * radius)
    height_bin = np.clip((height * HEIGHT_BINS).astype(np.int64), 0, HEIGHT_BINS - 1)
    cell = (az_bin * RADIAL_BINS + ring_bin) * HEIGHT_BINS + height_bin
    histogram = np.bincount(
        owner * HISTOGRAM_SIZE + cell, minlength=count * HISTOGRAM_SIZE
    ).reshape(count, HISTOGRAM_SIZE) / n[:, None]

    eig = np.clip(np.linalg.eigvalsh(cov)[:, ::-1], 0.0, None)
    top = np.where(eig[:, 0] > 0.0, eig[:, 0], 1.0)
    shape = np.stack(
        [(eig[:, 0] - eig[:, 1]) / top, (eig[:, 1] - eig[:, 2]) / top, eig[:, 2] / top], axis=1
    )
    vectors = np.hstack([histogram, SHAPE_WEIGHT * shape])
    norm = np.linalg.norm(vectors, axis=1, keepdims=True)
    vectors /= np.where(norm > 0.0, norm, 1.0)
    valid = sizes >= min_neighbors
    vectors[~valid] = 0.0
    return vectors, valid


def describe_many(
    xyz: np.ndarray,
    centers: np.ndarray,
    radius: float = 2.0,
    min_neighbors: int = 16,
    tree: Optional[cKDTree] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Descriptors of many centers over one cloud.

    Args:
        xyz: cloud the neighbourhoods are drawn from.
        centers: described locations (K, 3), usually points of xyz.
        radius: support radius in meters.
        min_neighbors: neighbourhoods smaller than this get no descriptor.
        tree: prebuilt KD tree over xyz.

    Returns:
        Vectors (K, DESCRIPTOR_SIZE), zero rows where invalid, and the validity mask.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, 3)
    if tree is None:
        tree = cKDTree(xyz)
    vectors = np.zeros((len(centers), DESCRIPTOR_SIZE))
    valid = np.zeros(len(centers), dtype=bool)
    for start in range(0, len(centers), CHUNK):
        part = slice(start, start + CHUNK)
        vectors[part], valid[part] = _describe_chunk(
            xyz, centers[part], tree, radius, min_neighbors
        )
    return vectors, valid


def describe(
    xyz: np.ndarray, center: np.ndarray, radius: float = 2.0, min_neighbors: int = 16
) -> Optional[np.ndarray]:
    """Descriptor of one location, None when its neighbourhood is too sparse."""
    vectors, valid = describe_many(xyz, np.asarray(center)[None, :], radius, min_neighbors)
    return vectors[0] if valid[0] else None
