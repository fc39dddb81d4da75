#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Rigid fitting and per-tile RANSAC outlier rejection."""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from geometry import RigidTransform, Rotation

logger = logging.getLogger(__name__)

BATCH = 256
RANK_TOLERANCE = 1e-10


class DegenerateSubsetError(ValueError):
    """The point pairs do not determine a rotation (too few, coincident or collinear)."""


class TooFewCorrespondencesError(ValueError):
    """A tile holds fewer correspondences than the sample size."""


@dataclass(frozen=True)
class RansacResult:
    """Best rigid model of a tile and the inlier classification under it."""

    transform: RigidTransform
    inliers: np.ndarray
    residuals: np.ndarray
    iterations: int
    degenerate: bool = False

    @property
    def inlier_ratio(self) -> float:
        """Fraction of correspondences classified as inliers."""
        return float(self.inliers.mean()) if len(self.inliers) else 0.0


def _kabsch(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched Procrustes over (..., n, 3) pairs: rotations, translations, singular values."""
    ca = a.mean(axis=-2, keepdims=True)
    cb = b.mean(axis=-2, keepdims=True)
    h = np.swapaxes(a - ca, -1, -2) @ (b - cb)
    u, s, vt = np.linalg.svd(h)
    v = np.swapaxes(vt, -1, -2)
    ut = np.swapaxes(u, -1, -2)
    d = np.sign(np.linalg.det(v @ ut))
    d = np.where(d == 0.0, 1.0, d)
    fix = np.ones(h.shape[:-2] + (3,))
    fix[..., 2] = d
    r = (v * fix[..., None, :]) @ ut
    t = cb[..., 0, :] - np.einsum("...ij,...j->...i", r, ca[..., 0, :])
    return r, t, s


def _degenerate(s: np.ndarray) -> np.ndarray:
    return s[..., 1] <= RANK_TOLERANCE * np.maximum(s[..., 0], 1e-300)


def estimate_rigid(points_a: np.ndarray, points_b: np.ndarray) -> RigidTransform:
    """Least-squares (R, T) minimizing sum ||R a + T - b||^2, with det(R) = +1.

    Raises:
        DegenerateSubsetError: fewer than three pairs, or pairs that are collinear.
    """
    points_a = np.asarray(points_a, dtype=float)
    points_b = np.asarray(points_b, dtype=float)
    if len(points_a) != len(points_b):
        raise ValueError("Point pair arrays differ in length")
    if len(points_a) < 3:
        raise DegenerateSubsetError(f"Need at least 3 pairs, got {len(points_a)}")
    r, t, s = _kabsch(points_a, points_b)
    if _degenerate(s):
        raise DegenerateSubsetError("Point pairs are collinear or coincident")
    return RigidTransform(Rotation.from_matrix(r), t)


def _residuals(r: np.ndarray, t: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.einsum("...ij,nj->...ni", r, a) + t[..., None, :] - b, axis=-1)


def required_iterations(inlier_ratio: float, sample: int, confidence: float) -> float:
    """Draws needed to hit one all-inlier sample with the given confidence."""
    good = inlier_ratio**sample
    if good >= 1.0:
        return 0.0
    if good <= 0.0:
        return math.inf
    return math.log(1.0 - confidence) / math.log(1.0 - good)


def ransac_filter(
    points_a: np.ndarray,
    points_b: np.ndarray,
    tau: float = 0.25,
    sample: int = 4,
    iterations: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    confidence: float = 0.999,
    max_iterations: int = 10_000,
) -> RansacResult:
    """Classify correspondences by the rigid model with most pairs under tau.

    Hypotheses are drawn in batches. Without a fixed iteration count, the number of
    draws follows the running inlier ratio. Ties on inlier count go to the lower mean
    inlier residual. The winner is refit on its inliers and the refit kept when it does
    not lose inliers. When every hypothesis is degenerate the result is flagged and has no
    inliers.

    Args:
        points_a: georeferenced points of the first cloud (N, 3).
        points_b: matched points of the second cloud (N, 3).
        tau: inlier distance in meters.
        sample: pairs per hypothesis.
        iterations: fixed hypothesis count, adaptive when None.
        rng: random generator of the tile.
        confidence: success probability of the adaptive count.
        max_iterations: cap on hypotheses.

    Raises:
        TooFewCorrespondencesError: fewer than `sample` pairs.
    """
    if tau <= 0.0:
        raise ValueError(f"RANSAC threshold must be positive, got {tau}")
    a = np.asarray(points_a, dtype=float)
    b = np.asarray(points_b, dtype=float)
    count = len(a)
    if count < max(sample, 3):
        raise TooFewCorrespondencesError(f"{count} correspondences, need {max(sample, 3)}")
    rng = rng if rng is not None else np.random.default_rng(0)
    budget = iterations if iterations is not None else max_iterations

    best_count, best_mean = -1, math.inf
    best_r, best_t = np.eye(3), np.zeros(3)
    done = 0
    while done < budget:
        size = min(BATCH, budget - done)
        picks = np.argpartition(rng.random((size, count)), sample - 1, axis=1)[:, :sample]
        r, t, s = _kabsch(a[picks], b[picks])
        done += size
        residuals = _residuals(r, t, a, b)
        inside = residuals < tau
        counts = np.where(_degenerate(s), -1, inside.sum(axis=1))
        with np.errstate(invalid="ignore"):
            means = np.where(inside, residuals, 0.0).sum(axis=1) / np.maximum(counts, 1)
        order = np.lexsort((means, -counts))
        top = order[0]
        better = counts[top] > best_count or (
            counts[top] == best_count and means[top] < best_mean
        )
        if counts[top] >= 0 and better:
            best_count, best_mean = int(counts[top]), float(means[top])
            best_r, best_t = r[top], t[top]
        if iterations is None:
            needed = required_iterations(max(best_count, 0) / count, sample, confidence)
            budget = int(min(max_iterations, max(needed, size)))

    if best_count < 0:
        logger.warning("All %d hypotheses over %d pairs were degenerate", done, count)
        model = RigidTransform.identity()
        residuals = _residuals(np.eye(3), np.zeros(3), a, b)
        return RansacResult(model, np.zeros(count, bool), residuals, done, degenerate=True)

    residuals = _residuals(best_r, best_t, a, b)
    inliers = residuals < tau
    if inliers.sum() >= 3:
        try:
            refit = estimate_rigid(a[inliers], b[inliers])
            refit_residuals = _residuals(refit.rotation.as_matrix(), refit.translation, a, b)
            if (refit_residuals < tau).sum() >= inliers.sum():
                best_r, best_t = refit.rotation.as_matrix(), refit.translation
                residuals = refit_residuals
                inliers = residuals < tau
        except DegenerateSubsetError:
            logger.debug("Inlier refit degenerate, keeping the sampled model")
    model = RigidTransform(Rotation.from_matrix(best_r), best_t)
    residuals = _residuals(model.rotation.as_matrix(), model.translation, a, b)
    inliers = residuals < tau
    return RansacResult(model, inliers, residuals, done)
