#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Tile, detect, describe, match and filter correspondences between two flight lines."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial import cKDTree

from constants import STREAM_RANSAC
from core.domain import Correspondence, PointCloud, ProvenanceError
from core.models import BaseConfigModel
from correspondence.descriptor import describe_many
from correspondence.keypoints import detect_keypoints_iss
from correspondence.matching import match
from correspondence.ransac import TooFewCorrespondencesError, ransac_filter
from correspondence.tiling import TilePair, estimate_gsd, extract_overlap_tiles, voxel_downsample
from utils.logging import WithLogging
from utils.random import rng_stream


class CorrespondenceConfig(BaseConfigModel):
    """Parameters of the correspondence pipeline."""

    tile_size: float = Field(default=50.0, gt=0.0)
    min_tile_points: int = Field(default=100, ge=1)
    iss_radius: float = Field(default=1.0, gt=0.0)
    iss_ratio: float = Field(default=0.5, gt=0.0, le=1.0)
    iss_ratio32: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    iss_min_neighbors: int = Field(default=5, ge=1)
    desc_radius: float = Field(default=2.0, gt=0.0)
    desc_min_neighbors: int = Field(default=16, ge=1)
    match_voxel: float = Field(default=0.2, ge=0.0)
    ratio_test: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    tau: float = Field(default=0.25, gt=0.0)
    ransac_sample: int = Field(default=4, ge=3)
    ransac_iterations: Optional[int] = Field(default=None, ge=1)
    ransac_confidence: float = Field(default=0.999, gt=0.0, lt=1.0)
    ransac_max_iterations: int = Field(default=10_000, ge=1)
    sigma: Optional[float] = Field(default=None, gt=0.0)

    @property
    def ratio32(self) -> float:
        """Second ISS eigenvalue ratio, the first one unless set."""
        return self.iss_ratio if self.iss_ratio32 is None else self.iss_ratio32


class TileStats(BaseModel):
    """Outcome of one tile, serialised in the correspondence report."""

    line_a: int
    line_b: int
    index: int
    bounds: tuple[float, float, float, float]
    points_a: int
    points_b: int
    keypoints: int = 0
    raw_matches: int = 0
    inliers: int = 0
    inlier_ratio: float = 0.0
    skipped: Optional[str] = None


@dataclass
class CorrespondenceRun:
    """Filtered correspondences with the raw matches and per-tile statistics.

    Index arrays point into the two clouds given to the run; for multi-line runs they
    point into the combined cloud.
    """

    correspondences: list[Correspondence]
    sigma: float
    raw_a: np.ndarray
    raw_b: np.ndarray
    kept_a: np.ndarray
    kept_b: np.ndarray
    tiles: list[TileStats] = field(default_factory=list)

    @property
    def raw_count(self) -> int:
        """Matches before RANSAC."""
        return len(self.raw_a)

    @property
    def kept_count(self) -> int:
        """Matches surviving RANSAC."""
        return len(self.kept_a)

    @property
    def skipped_tiles(self) -> int:
        """Tiles that produced no model."""
        return sum(1 for t in self.tiles if t.skipped)

    @classmethod
    def merge(cls, runs: list["CorrespondenceRun"], sigma: float) -> "CorrespondenceRun":
        """Concatenate runs in order."""
        empty = np.zeros(0, dtype=np.int64)
        return cls(
            correspondences=[c for r in runs for c in r.correspondences],
            sigma=sigma,
            raw_a=np.concatenate([r.raw_a for r in runs] or [empty]),
            raw_b=np.concatenate([r.raw_b for r in runs] or [empty]),
            kept_a=np.concatenate([r.kept_a for r in runs] or [empty]),
            kept_b=np.concatenate([r.kept_b for r in runs] or [empty]),
            tiles=[t for r in runs for t in r.tiles],
        )


@dataclass
class _TileOutcome:
    stats: TileStats
    raw_a: np.ndarray
    raw_b: np.ndarray
    distances: np.ndarray
    inliers: np.ndarray


def trace_to_return(index: int, cloud: PointCloud) -> tuple[float, np.ndarray]:
    """Return (t, v^L) of the pulse behind a point.

    Raises:
        ProvenanceError: the cloud carries no scanner vectors.
    """
    return cloud.trace_to_return(index)


class CorrespondencePipeline(WithLogging):
    """Per-tile key point to point matching with RANSAC filtering."""

    def __init__(self, config: CorrespondenceConfig, seed: int = 0, threads: int = 1):
        self.config = config
        self.seed = seed
        self.threads = max(1, threads)

    def _keypoints(self, xyz: np.ndarray) -> np.ndarray:
        cfg = self.config
        found = detect_keypoints_iss(
            xyz, cfg.iss_radius, cfg.iss_ratio, cfg.ratio32, cfg.iss_min_neighbors
        )
        return np.array([k.index for k in found], dtype=np.int64)

    def _tile(
        self, tile: TilePair, cloud_a: PointCloud, cloud_b: PointCloud, lines: tuple[int, int]
    ) -> _TileOutcome:
        cfg = self.config
        stats = TileStats(
            line_a=lines[0],
            line_b=lines[1],
            index=tile.index,
            bounds=tile.bounds,
            points_a=len(tile.points_a),
            points_b=len(tile.points_b),
        )
        pa = cloud_a.xyz[tile.points_a]
        pb = cloud_b.xyz[tile.points_b]
        keys_a = self._keypoints(pa)
        keys_b = self._keypoints(pb)
        stats.keypoints = len(keys_a)
        candidates = np.union1d(voxel_downsample(pb, cfg.match_voxel), keys_b)
        desc_a, valid_a = describe_many(
            pa, pa[keys_a], cfg.desc_radius, cfg.desc_min_neighbors, cKDTree(pa)
        )
        desc_b, valid_b = describe_many(
            pb, pb[candidates], cfg.desc_radius, cfg.desc_min_neighbors, cKDTree(pb)
        )
        rows, cols, distances = match(desc_a[valid_a], desc_b[valid_b], cfg.ratio_test)
        raw_a = tile.points_a[keys_a[valid_a][rows]]
        raw_b = tile.points_b[candidates[valid_b][cols]]
        stats.raw_matches = len(raw_a)
        try:
            result = ransac_filter(
                cloud_a.xyz[raw_a],
                cloud_b.xyz[raw_b],
                tau=cfg.tau,
                sample=cfg.ransac_sample,
                iterations=cfg.ransac_iterations,
                rng=rng_stream(self.seed, STREAM_RANSAC, lines[0], lines[1], tile.index),
                confidence=cfg.ransac_confidence,
                max_iterations=cfg.ransac_max_iterations,
            )
        except TooFewCorrespondencesError as e:
            stats.skipped = str(e)
            self.logger.warning("Tile %d (%d-%d) skipped: %s", tile.index, *lines, e)
            return _TileOutcome(stats, raw_a, raw_b, distances, np.zeros(len(raw_a), bool))
        if result.degenerate:
            stats.skipped = "every RANSAC hypothesis was degenerate"
            self.logger.warning("Tile %d (%d-%d) skipped: %s", tile.index, *lines, stats.skipped)
            return _TileOutcome(stats, raw_a, raw_b, distances, result.inliers)
        stats.inliers = int(result.inliers.sum())
        stats.inlier_ratio = result.inlier_ratio
        self.logger.info(
            "Tile %d (%d-%d): %d key points, %d raw matches, inlier ratio %.3f",
            tile.index,
            *lines,
            stats.keypoints,
            stats.raw_matches,
            stats.inlier_ratio,
        )
        return _TileOutcome(stats, raw_a, raw_b, distances, result.inliers)

    def run(
        self,
        cloud_a: PointCloud,
        cloud_b: PointCloud,
        lines: tuple[int, int] = (1, 2),
        sigma: Optional[float] = None,
    ) -> CorrespondenceRun:
        """Correspondences between two clouds in the same navigation frame.

        Raises:
            ProvenanceError: a cloud carries no scanner vectors.
        """
        if not cloud_a.has_provenance or not cloud_b.has_provenance:
            raise ProvenanceError("Correspondences need clouds with scanner-frame provenance")
        cfg = self.config
        if sigma is None:
            sigma = cfg.sigma or _mean_gsd(cloud_a, cloud_b)
        tiles = extract_overlap_tiles(cloud_a.xyz, cloud_b.xyz, cfg.tile_size, cfg.min_tile_points)
        self.logger.info("Lines %d-%d: %d overlap tiles, sigma %.3f m", *lines, len(tiles), sigma)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            outcomes = list(pool.map(lambda t: self._tile(t, cloud_a, cloud_b, lines), tiles))

        empty = np.zeros(0, dtype=np.int64)
        raw_a = np.concatenate([o.raw_a for o in outcomes] or [empty])
        raw_b = np.concatenate([o.raw_b for o in outcomes] or [empty])
        distances = np.concatenate([o.distances for o in outcomes] or [np.zeros(0)])
        inliers = np.concatenate([o.inliers for o in outcomes] or [np.zeros(0, bool)])
        kept_a, kept_b, kept_d = raw_a[inliers], raw_b[inliers], distances[inliers]

        distinct = cloud_a.t[kept_a] != cloud_b.t[kept_b]
        if not distinct.all():
            self.logger.debug("Dropping %d self matches", (~distinct).sum())
        kept_a, kept_b, kept_d = kept_a[distinct], kept_b[distinct], kept_d[distinct]
        correspondences = [
            Correspondence(
                t_a=float(cloud_a.t[i]),
                v_a=cloud_a.v[i].copy(),
                line_a=int(cloud_a.line_id[i]),
                t_b=float(cloud_b.t[j]),
                v_b=cloud_b.v[j].copy(),
                line_b=int(cloud_b.line_id[j]),
                sigma=sigma,
                desc_dist=float(d),
                return_id_a=int(cloud_a.return_id[i]),
                return_id_b=int(cloud_b.return_id[j]),
            )
            for i, j, d in zip(kept_a, kept_b, kept_d)
        ]
        self.logger.info(
            "Lines %d-%d: %d raw matches, %d kept", *lines, len(raw_a), len(correspondences)
        )
        return CorrespondenceRun(
            correspondences, sigma, raw_a, raw_b, kept_a, kept_b, [o.stats for o in outcomes]
        )


def _mean_gsd(cloud_a: PointCloud, cloud_b: PointCloud) -> float:
    return 0.5 * (estimate_gsd(cloud_a.xyz) + estimate_gsd(cloud_b.xyz))


def run_pipeline(
    cloud_a: PointCloud,
    cloud_b: PointCloud,
    config: Optional[CorrespondenceConfig] = None,
    seed: int = 0,
    threads: int = 1,
) -> CorrespondenceRun:
    """Filtered correspondences between two approximately registered clouds."""
    return CorrespondencePipeline(config or CorrespondenceConfig(), seed, threads).run(
        cloud_a, cloud_b
    )


def correspond_lines(
    cloud: PointCloud,
    config: Optional[CorrespondenceConfig] = None,
    seed: int = 0,
    threads: int = 1,
) -> CorrespondenceRun:
    """Correspondences between every pair of adjacent flight lines of one cloud.

    Index arrays of the result refer to the combined cloud.
    """
    config = config or CorrespondenceConfig()
    lines = sorted(int(x) for x in np.unique(cloud.line_id))
    pipeline = CorrespondencePipeline(config, seed, threads)
    index = np.arange(len(cloud))
    runs = []
    sigma = config.sigma
    for first, second in zip(lines, lines[1:]):
        mask_a = cloud.line_id == first
        mask_b = cloud.line_id == second
        part_a, part_b = cloud.select(mask_a), cloud.select(mask_b)
        if sigma is None:
            sigma = _mean_gsd(part_a, part_b)
        run = pipeline.run(part_a, part_b, (first, second), sigma)
        ia, ib = index[mask_a], index[mask_b]
        run.raw_a, run.raw_b = ia[run.raw_a], ib[run.raw_b]
        run.kept_a, run.kept_b = ia[run.kept_a], ib[run.kept_b]
        runs.append(run)
    return CorrespondenceRun.merge(runs, sigma or 0.0)
