#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Nearest-neighbour matching in descriptor space."""

from typing import Optional

import numpy as np

CHUNK = 1024


def match(
    descriptors_a: np.ndarray, descriptors_b: np.ndarray, ratio: Optional[float] = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Match every row of a to its nearest row of b by Euclidean distance.

    Args:
        descriptors_a: key point descriptors (K, D).
        descriptors_b: descriptors of all candidate points (M, D).
        ratio: optional nearest / second-nearest distance threshold.

    Returns:
        Row indices into a, row indices into b and the descriptor distances.
    """
    empty = np.zeros(0, dtype=np.int64)
    if not len(descriptors_a) or not len(descriptors_b):
        return empty, empty, np.zeros(0)
    norm_b = np.sum(descriptors_b**2, axis=1)
    rows, best, dist = [], [], []
    for start in range(0, len(descriptors_a), CHUNK):
        a = descriptors_a[start : start + CHUNK]
        sq = np.sum(a**2, axis=1)[:, None] + norm_b[None, :] - 2.0 * a @ descriptors_b.T
        sq = np.maximum(sq, 0.0)
        nearest = np.argmin(sq, axis=1)
        d1 = sq[np.arange(len(a)), nearest]
        keep = np.ones(len(a), dtype=bool)
        if ratio is not None and sq.shape[1] > 1:
            second = np.partition(sq, 1, axis=1)[:, 1]
            keep = np.sqrt(d1) < ratio * np.sqrt(second)
        rows.append(start + np.flatnonzero(keep))
        best.append(nearest[keep])
        dist.append(np.sqrt(d1[keep]))
    return np.concatenate(rows), np.concatenate(best), np.concatenate(dist)
