#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Synthetic scenes: a bilinear heightfield plus analytic primitives, and ray casting."""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import Field, model_validator

from constants import STREAM_SCENE
from core.models import BaseConfigModel
from utils.random import rng_stream

logger = logging.getLogger(__name__)

HECTARE = 1e4
BISECTION_STEPS = 40
GROUND_PAD = 1e-6

Bounds = tuple[float, float, float, float]


class SceneSpec(BaseConfigModel):
    """Terrain typology and primitive densities (per hectare) over a rectangular extent."""

    typology: Literal["mixed", "urban", "rural", "forest", "bare"] = "mixed"
    bounds: Optional[Bounds] = None
    margin: float = Field(default=100.0, ge=0.0)
    cell: float = Field(default=5.0, gt=0.0)
    relief: float = Field(default=2.0, ge=0.0)
    relief_wavelength: float = Field(default=250.0, gt=0.0)
    building_density: float = Field(default=6.0, ge=0.0)
    car_density: float = Field(default=10.0, ge=0.0)
    tree_density: float = Field(default=60.0, ge=0.0)

    @model_validator(mode="after")
    def validate_bounds(self):
        """Bounds are (x_min, y_min, x_max, y_max) with positive area."""
        if self.bounds is not None:
            x0, y0, x1, y1 = self.bounds
            if not (x1 > x0 and y1 > y0):
                raise ValueError(f"Scene bounds {self.bounds} have no area")
        return self


@dataclass
class HeightField:
    """Ground elevation on a regular grid, bilinear between nodes and clamped outside."""

    x0: float
    y0: float
    cell: float
    heights: np.ndarray

    @classmethod
    def flat(cls, bounds: Bounds, z: float = 0.0, cell: float = 10.0) -> "HeightField":
        """Level ground at height z."""
        x0, y0, x1, y1 = bounds
        nx = int(math.ceil((x1 - x0) / cell)) + 1
        ny = int(math.ceil((y1 - y0) / cell)) + 1
        return cls(x0, y0, cell, np.full((ny, nx), float(z)))

    @property
    def z_range(self) -> tuple[float, float]:
        """Lowest and highest node elevation."""
        return float(self.heights.min()), float(self.heights.max())

    def height(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bilinear elevation at arbitrary coordinates."""
        ny, nx = self.heights.shape
        u = np.clip((np.asarray(x) - self.x0) / self.cell, 0.0, nx - 1.0)
        v = np.clip((np.asarray(y) - self.y0) / self.cell, 0.0, ny - 1.0)
        i = np.minimum(np.floor(u).astype(int), nx - 2) if nx > 1 else np.zeros_like(u, int)
        j = np.minimum(np.floor(v).astype(int), ny - 2) if ny > 1 else np.zeros_like(v, int)
        fu = u - i
        fv = v - j
        h = self.heights
        i1 = np.minimum(i + 1, nx - 1)
        j1 = np.minimum(j + 1, ny - 1)
        return (
            h[j, i] * (1 - fu) * (1 - fv)
            + h[j, i1] * fu * (1 - fv)
            + h[j1, i] * (1 - fu) * fv
            + h[j1, i1] * fu * fv
        )

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Range to the first ground crossing of each ray, inf when it never descends."""
        out = np.full(len(origins), np.inf)
        down = dirs[:, 2] < -1e-12
        if not down.any():
            return out
        o = origins[down]
        d = dirs[down]
        lo, hi = self.z_range
        r0 = np.maximum((o[:, 2] - hi) / -d[:, 2], 0.0)
        # Pad past the lowest node so rounding cannot step over level ground.
        r1 = np.maximum((o[:, 2] - lo) / -d[:, 2], r0) + GROUND_PAD
        horizontal = (r1 - r0) * np.linalg.norm(d[:, :2], axis=1)
        steps = int(min(max(2, math.ceil(horizontal.max() / (0.5 * self.cell)) + 1), 4096))
        ranges = r0[:, None] + (r1 - r0)[:, None] * np.linspace(0.0, 1.0, steps + 1)
        points = o[:, None, :] + ranges[..., None] * d[:, None, :]
        gap = points[..., 2] - self.height(points[..., 0], points[..., 1])
        below = gap <= 0.0
        found = below.any(axis=1)
        first = np.argmax(below, axis=1)
        a = np.where(first > 0, ranges[np.arange(len(o)), np.maximum(first - 1, 0)], r0)
        b = ranges[np.arange(len(o)), first]
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (a + b)
            p = o + mid[:, None] * d
            under = p[:, 2] - self.height(p[:, 0], p[:, 1]) <= 0.0
            b = np.where(under, mid, b)
            a = np.where(under, a, mid)
        out[np.flatnonzero(down)[found]] = b[found]
        return out


def _nearest_positive(roots: list[np.ndarray], valid: list[np.ndarray]) -> np.ndarray:
    best = np.full(roots[0].shape, np.inf)
    for r, ok in zip(roots, valid):
        best = np.where(ok & (r > 1e-9) & (r < best), r, best)
    return best


@dataclass
class BoxSet:
    """Yawed boxes: volume centers (M, 3), half sizes (M, 3), yaw in radians (M,)."""

    centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    half_sizes: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    yaw: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.centers)

    def aabb(self) -> np.ndarray:
        """Axis-aligned bounds (M, 6): x_min, y_min, z_min, x_max, y_max, z_max."""
        c, s = np.abs(np.cos(self.yaw)), np.abs(np.sin(self.yaw))
        ex = c * self.half_sizes[:, 0] + s * self.half_sizes[:, 1]
        ey = s * self.half_sizes[:, 0] + c * self.half_sizes[:, 1]
        extent = np.stack([ex, ey, self.half_sizes[:, 2]], axis=1)
        return np.hstack([self.centers - extent, self.centers + extent])

    def select(self, mask: np.ndarray) -> "BoxSet":
        return BoxSet(self.centers[mask], self.half_sizes[mask], self.yaw[mask])

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Slab test in each box frame; nearest entry range per ray."""
        if not len(self):
            return np.full(len(origins), np.inf)
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        rel = origins[:, None, :] - self.centers[None]
        o = np.stack(
            [c * rel[..., 0] + s * rel[..., 1], -s * rel[..., 0] + c * rel[..., 1], rel[..., 2]],
            axis=-1,
        )
        dx, dy = dirs[:, None, 0], dirs[:, None, 1]
        dz = np.broadcast_to(dirs[:, None, 2], o.shape[:2])
        d = np.stack([c * dx + s * dy, -s * dx + c * dy, dz], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-self.half_sizes[None] - o) / d
            t2 = (self.half_sizes[None] - o) / d
        near = np.nanmax(np.fmin(t1, t2), axis=-1)
        far = np.nanmin(np.fmax(t1, t2), axis=-1)
        hit = (near <= far) & (near > 1e-9)
        return np.where(hit, near, np.inf).min(axis=1)


@dataclass
class ConeSet:
    """Upright cones (conifer crowns): base centers (M, 3), base radii (M,), heights (M,)."""

    bases: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    heights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.bases)

    def aabb(self) -> np.ndarray:
        """Axis-aligned bounds (M, 6)."""
        lo = self.bases - np.stack([self.radii, self.radii, np.zeros_like(self.radii)], axis=1)
        hi = self.bases + np.stack([self.radii, self.radii, self.heights], axis=1)
        return np.hstack([lo, hi])

    def select(self, mask: np.ndarray) -> "ConeSet":
        return ConeSet(self.bases[mask], self.radii[mask], self.heights[mask])

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Lateral surface quadratic, restricted to the crown height."""
        if not len(self):
            return np.full(len(origins), np.inf)
        k2 = (self.radii / self.heights)[None] ** 2
        dx0 = origins[:, None, 0] - self.bases[None, :, 0]
        dy0 = origins[:, None, 1] - self.bases[None, :, 1]
        w0 = (self.bases[None, :, 2] + self.heights[None]) - origins[:, None, 2]
        ddx, ddy, ddz = dirs[:, None, 0], dirs[:, None, 1], dirs[:, None, 2]
        a = ddx**2 + ddy**2 - k2 * ddz**2
        b = 2.0 * (dx0 * ddx + dy0 * ddy + k2 * w0 * ddz)
        c = dx0**2 + dy0**2 - k2 * w0**2
        flat = np.abs(a) < 1e-12
        safe_a = np.where(flat, 1.0, a)
        disc = b**2 - 4.0 * a * c
        root = np.sqrt(np.maximum(disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(flat, -c / b, (-b - root) / (2.0 * safe_a))
            r2 = np.where(flat, np.inf, (-b + root) / (2.0 * safe_a))
        real = flat | (disc >= 0.0)

        def on_crown(r):
            with np.errstate(invalid="ignore"):
                w = w0 - r * ddz
            return real & np.isfinite(r) & (w >= 0.0) & (w <= self.heights[None])

        return _nearest_positive([r1, r2], [on_crown(r1), on_crown(r2)]).min(axis=1)


@dataclass
class EllipsoidSet:
    """Axis-aligned ellipsoids (broadleaf crowns): centers (M, 3), radii (M, 3)."""

    centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    radii: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __len__(self) -> int:
        return len(self.centers)

    def aabb(self) -> np.ndarray:
        """Axis-aligned bounds (M, 6)."""
        return np.hstack([self.centers - self.radii, self.centers + self.radii])

    def select(self, mask: np.ndarray) -> "EllipsoidSet":
        return EllipsoidSet(self.centers[mask], self.radii[mask])

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Unit-sphere test after scaling by the radii."""
        if not len(self):
            return np.full(len(origins), np.inf)
        o = (origins[:, None, :] - self.centers[None]) / self.radii[None]
        d = dirs[:, None, :] / self.radii[None]
        a = np.sum(d * d, axis=-1)
        b = 2.0 * np.sum(o * d, axis=-1)
        c = np.sum(o * o, axis=-1) - 1.0
        disc = b**2 - 4.0 * a * c
        real = disc >= 0.0
        root = np.sqrt(np.maximum(disc, 0.0))
        r1 = (-b - root) / (2.0 * a)
        r2 = (-b + root) / (2.0 * a)
        return _nearest_positive([r1, r2], [real, real]).min(axis=1)


@dataclass
class Scene:
    """Ground heightfield plus boxes (buildings, cars) and tree crowns."""

    ground: HeightField
    boxes: BoxSet = field(default_factory=BoxSet)
    cones: ConeSet = field(default_factory=ConeSet)
    ellipsoids: EllipsoidSet = field(default_factory=EllipsoidSet)

    @classmethod
    def flat(cls, bounds: Bounds, z: float = 0.0) -> "Scene":
        """Bare level ground."""
        return cls(HeightField.flat(bounds, z))

    @property
    def primitive_count(self) -> int:
        """Number of primitives above ground."""
        return len(self.boxes) + len(self.cones) + len(self.ellipsoids)

    @property
    def top(self) -> float:
        """Highest point of the scene."""
        tops = [self.ground.z_range[1]]
        for prims in (self.boxes, self.cones, self.ellipsoids):
            if len(prims):
                tops.append(float(prims.aabb()[:, 5].max()))
        return max(tops)

    def intersect(
        self, origins: np.ndarray, dirs: np.ndarray, max_range: float = np.inf
    ) -> np.ndarray:
        """Range to the nearest surface along each unit ray; inf for misses.

        Primitives are culled against the footprint of the ray bundle between the scene top
        and the lowest ground, so callers should pass spatially compact bundles.
        """
        origins = np.asarray(origins, dtype=float).reshape(-1, 3)
        dirs = np.asarray(dirs, dtype=float).reshape(-1, 3)
        ranges = self.ground.intersect(origins, dirs)
        footprint = self._footprint(origins, dirs, max_range)
        for prims in (self.boxes, self.cones, self.ellipsoids):
            if not len(prims):
                continue
            box = prims.aabb()
            near = (
                (box[:, 0] <= footprint[2])
                & (box[:, 3] >= footprint[0])
                & (box[:, 1] <= footprint[3])
                & (box[:, 4] >= footprint[1])
            )
            if near.any():
                ranges = np.minimum(ranges, prims.select(near).intersect(origins, dirs))
        return np.where(ranges <= max_range, ranges, np.inf)

    def _footprint(self, origins: np.ndarray, dirs: np.ndarray, max_range: float) -> tuple:
        lo, _ = self.ground.z_range
        top = self.top
        with np.errstate(divide="ignore", invalid="ignore"):
            r_top = np.where(dirs[:, 2] < 0.0, (origins[:, 2] - top) / -dirs[:, 2], 0.0)
            r_low = np.where(dirs[:, 2] < 0.0, (origins[:, 2] - lo) / -dirs[:, 2], max_range)
        r_top = np.clip(r_top, 0.0, max_range)
        r_low = np.clip(r_low, 0.0, max_range)
        ends = np.vstack([origins + r_top[:, None] * dirs, origins + r_low[:, None] * dirs])
        return (ends[:, 0].min(), ends[:, 1].min(), ends[:, 0].max(), ends[:, 1].max())


def scene_bounds(positions: np.ndarray, half_swath: float, margin: float) -> Bounds:
    """Rectangle covering a flight footprint plus a margin."""
    pad = half_swath + margin
    return (
        float(positions[:, 0].min() - pad),
        float(positions[:, 1].min() - pad),
        float(positions[:, 0].max() + pad),
        float(positions[:, 1].max() + pad),
    )


def _terrain(spec: SceneSpec, bounds: Bounds, rng: np.random.Generator) -> HeightField:
    """Sum of three plane waves with random directions and phases."""
    ground = HeightField.flat(bounds, 0.0, spec.cell)
    if spec.relief == 0.0:
        return ground
    ny, nx = ground.heights.shape
    x = ground.x0 + spec.cell * np.arange(nx)
    y = ground.y0 + spec.cell * np.arange(ny)
    gx, gy = np.meshgrid(x, y)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=3)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=3)
    scales = spec.relief_wavelength * np.array([1.0, 0.61, 0.37])
    weights = np.array([1.0, 0.5, 0.25])
    z = np.zeros_like(gx)
    for a, ph, lam, w in zip(angles, phases, scales, weights):
        z += w * np.sin(2.0 * math.pi * (gx * math.cos(a) + gy * math.sin(a)) / lam + ph)
    ground.heights = spec.relief * z / weights.sum()
    return ground


def _zones(spec: SceneSpec, bounds: Bounds) -> list[tuple[str, Bounds]]:
    if spec.typology != "mixed":
        return [(spec.typology, bounds)]
    x0, y0, x1, y1 = bounds
    cuts = np.linspace(x0, x1, 4)
    return [
        (kind, (float(a), y0, float(b), y1))
        for kind, a, b in zip(("urban", "rural", "forest"), cuts[:-1], cuts[1:])
    ]


def _scatter(
    rng: np.random.Generator, zone: Bounds, density: float, min_gap: float
) -> np.ndarray:
    """Poisson count of uniform xy positions keeping a minimum spacing."""
    x0, y0, x1, y1 = zone
    expected = density * (x1 - x0) * (y1 - y0) / HECTARE
    count = int(rng.poisson(expected))
    candidates = np.column_stack(
        [rng.uniform(x0, x1, size=count), rng.uniform(y0, y1, size=count)]
    )
    kept: list[np.ndarray] = []
    for p in candidates:
        if all(np.hypot(*(p - q)) >= min_gap for q in kept):
            kept.append(p)
    return np.array(kept).reshape(-1, 2)


def generate_scene(spec: SceneSpec, seed: int) -> Scene:
    """Build terrain and primitives for the typology over spec.bounds.

    Urban zones get buildings and cars, rural zones scattered houses, cars and trees,
    forest zones dense conifer and broadleaf crowns. Primitives stand on the terrain.

    Raises:
        ValueError: spec.bounds is unset.
    """
    if spec.bounds is None:
        raise ValueError("Scene bounds must be resolved before generation")
    rng = rng_stream(seed, STREAM_SCENE)
    ground = _terrain(spec, spec.bounds, rng)
    boxes: list[tuple[np.ndarray, np.ndarray, float]] = []
    cones: list[tuple[np.ndarray, float, float]] = []
    ellipsoids: list[tuple[np.ndarray, np.ndarray]] = []

    def base_height(x: float, y: float, radius: float) -> float:
        xs = x + radius * np.array([0.0, 1.0, -1.0, 0.0, 0.0])
        ys = y + radius * np.array([0.0, 0.0, 0.0, 1.0, -1.0])
        return float(ground.height(xs, ys).min())

    def add_boxes(zone: Bounds, density: float, size_lo, size_hi, gap: float):
        for x, y in _scatter(rng, zone, density, gap):
            size = rng.uniform(size_lo, size_hi)
            z = base_height(x, y, 0.5 * float(np.hypot(size[0], size[1])))
            center = np.array([x, y, z + 0.5 * size[2]])
            boxes.append((center, 0.5 * size, rng.uniform(0, math.pi)))

    def add_trees(zone: Bounds, density: float, conifer_share: float):
        for x, y in _scatter(rng, zone, density, 4.0):
            trunk = rng.uniform(2.0, 4.0)
            z = float(ground.height(x, y)) + trunk
            if rng.uniform() < conifer_share:
                cones.append((np.array([x, y, z]), rng.uniform(1.5, 3.0), rng.uniform(5.0, 12.0)))
            else:
                r = rng.uniform(2.0, 4.0)
                rz = rng.uniform(2.0, 4.5)
                ellipsoids.append((np.array([x, y, z + rz]), np.array([r, r, rz])))

    for kind, zone in _zones(spec, spec.bounds):
        if kind == "urban":
            add_boxes(zone, spec.building_density, (8.0, 8.0, 4.0), (25.0, 20.0, 15.0), 30.0)
            add_boxes(zone, spec.car_density, (4.5, 1.8, 1.5), (4.8, 1.9, 1.7), 6.0)
        elif kind == "rural":
            add_boxes(zone, spec.building_density / 4.0, (8.0, 8.0, 4.0), (15.0, 12.0, 8.0), 40.0)
            add_boxes(zone, spec.car_density / 4.0, (4.5, 1.8, 1.5), (4.8, 1.9, 1.7), 6.0)
            add_trees(zone, spec.tree_density / 6.0, 0.3)
        elif kind == "forest":
            add_trees(zone, spec.tree_density, 0.6)

    scene = Scene(
        ground=ground,
        boxes=BoxSet(
            np.array([b[0] for b in boxes]).reshape(-1, 3),
            np.array([b[1] for b in boxes]).reshape(-1, 3),
            np.array([b[2] for b in boxes]),
        ),
        cones=ConeSet(
            np.array([c[0] for c in cones]).reshape(-1, 3),
            np.array([c[1] for c in cones]),
            np.array([c[2] for c in cones]),
        ),
        ellipsoids=EllipsoidSet(
            np.array([e[0] for e in ellipsoids]).reshape(-1, 3),
            np.array([e[1] for e in ellipsoids]).reshape(-1, 3),
        ),
    )
    logger.info(
        "Generated %s scene: %d boxes, %d cones, %d ellipsoids",
        spec.typology,
        len(scene.boxes),
        len(scene.cones),
        len(scene.ellipsoids),
    )
    return scene
