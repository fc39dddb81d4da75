#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Intrinsic Shape Signature key point detection."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

SALIENCY_FLOOR = 1e-10


@dataclass(frozen=True)
class KeyPoint:
    """A detected key point.

    Args:
        index: point index in the input array.
        eigenvalues: (l1, l2, l3) of the weighted covariance, descending.
    """

    index: int
    eigenvalues: tuple[float, float, float]

    @property
    def saliency(self) -> float:
        """Smallest eigenvalue."""
        return self.eigenvalues[2]


def neighbour_pairs(tree: cKDTree, centers: np.ndarray, radius: float):
    """Flattened (owner, neighbour) index pairs of spherical neighbourhoods."""
    lists = tree.query_ball_point(centers, radius, return_sorted=False)
    sizes = np.fromiter((len(x) for x in lists), dtype=np.int64, count=len(lists))
    owner = np.repeat(np.arange(len(lists)), sizes)
    if sizes.sum():
        neighbour = np.concatenate([np.asarray(x, dtype=np.int64) for x in lists])
    else:
        neighbour = np.zeros(0, dtype=np.int64)
    return owner, neighbour, sizes


def weighted_eigenvalues(
    xyz: np.ndarray, radius: float
) -> tuple[np.ndarray, np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """Descending eigenvalues (N, 3) of each point's density-weighted scatter matrix.

    Neighbour j contributes with weight 1 / |N(p_j)|, the scatter is taken about the point
    itself. Also returns the neighbour counts (self excluded) and the neighbour pairs.
    """
    tree = cKDTree(xyz)
    owner, neighbour, sizes = neighbour_pairs(tree, xyz, radius)
    others = neighbour != owner
    owner, neighbour = owner[others], neighbour[others]
    weight = 1.0 / sizes[neighbour]
    rel = xyz[neighbour] - xyz[owner]
    count = len(xyz)
    scatter = np.zeros((count, 3, 3))
    for a in range(3):
        for b in range(a, 3):
            value = np.bincount(owner, weights=weight * rel[:, a] * rel[:, b], minlength=count)
            scatter[:, a, b] = value
            scatter[:, b, a] = value
    total = np.bincount(owner, weights=weight, minlength=count)
    valid = total > 0.0
    scatter[valid] /= total[valid, None, None]
    eigenvalues = np.clip(np.linalg.eigvalsh(scatter)[:, ::-1], 0.0, None)
    return eigenvalues, sizes - 1, (owner, neighbour)


def detect_keypoints_iss(
    xyz: np.ndarray,
    support_radius: float = 1.0,
    ratio21: float = 0.5,
    ratio32: float = 0.5,
    min_neighbors: int = 5,
) -> list[KeyPoint]:
    """Points with three distinct principal spreads, thinned by non-maximum suppression.

    A point is a candidate when l2 / l1 < ratio21, l3 / l2 < ratio32 and l3 is not
    vanishing; a candidate survives when its l3 is the largest among candidates within the
    support radius. Points with too few neighbours are skipped.
    """
    if support_radius <= 0.0:
        raise ValueError(f"Support radius must be positive, got {support_radius}")
    if len(xyz) == 0:
        return []
    eig, counts, (owner, neighbour) = weighted_eigenvalues(xyz, support_radius)
    l1, l2, l3 = eig[:, 0], eig[:, 1], eig[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        candidate = (
            (counts >= min_neighbors)
            & (l1 > 0.0)
            & (l2 < ratio21 * l1)
            & (l3 < ratio32 * l2)
            & (l3 > SALIENCY_FLOOR * l1)
        )
    saliency = np.where(candidate, l3, -np.inf)
    strongest = np.full(len(xyz), -np.inf)
    np.maximum.at(strongest, owner, saliency[neighbour])
    keep = np.flatnonzero(candidate & (saliency >= strongest))
    return [KeyPoint(int(i), (float(l1[i]), float(l2[i]), float(l3[i]))) for i in keep]
