"""Synthetic scenes and perturbations for matching experiments.

Scene generators return known ground-truth template locations so
detection pipelines can be scored exactly.  Perturbations model the
conditions the probing distance is meant to survive: exposure change
(global thickness rescale), a lighting drift across one axis, and seeded
impulsive sensor noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import MultichannelImage
from .lip import DEFAULT_PARAMS, GrayScaleParams, lip_mul


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean Gaussian noise on the normalized [0, 1] intensity scale,
    hitting a ``density`` fraction of pixels; deterministic per seed."""

    variance: float
    density: float
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")
        if not (0.0 <= self.density <= 1.0):
            raise ValueError(f"density must lie in [0, 1], got {self.density}")


@dataclass(frozen=True)
class DriftSpec:
    """Thickness multiplier interpolated linearly along one axis."""

    axis: str  # "vertical" (varies with row) or "horizontal" (with column)
    alpha_start: float
    alpha_end: float

    def __post_init__(self):
        if self.axis not in ("vertical", "horizontal"):
            raise ValueError(f"axis must be 'vertical' or 'horizontal', got {self.axis!r}")
        if self.alpha_start <= 0 or self.alpha_end <= 0:
            raise ValueError("drift multipliers must be positive")


def global_relight(img: MultichannelImage, alpha: float) -> MultichannelImage:
    """Rescale every pixel's thickness by ``alpha``: darker for alpha > 1,
    brighter for alpha < 1.  Models an exposure change."""
    if alpha <= 0:
        raise ValueError(f"relight multiplier must be positive, got {alpha}")
    return MultichannelImage(data=lip_mul(alpha, img.data, img.params), params=img.params)


def apply_drift(img: MultichannelImage, drift: DriftSpec) -> MultichannelImage:
    """Per-row (or per-column) thickness multipliers interpolated from
    ``alpha_start`` to ``alpha_end``; a single-line extent uses the start."""
    extent = img.height if drift.axis == "vertical" else img.width
    if extent == 1:
        alphas = np.array([drift.alpha_start])
    else:
        alphas = drift.alpha_start + (drift.alpha_end - drift.alpha_start) * (
            np.arange(extent) / (extent - 1)
        )
    if drift.axis == "vertical":
        lam = alphas[:, np.newaxis, np.newaxis]
    else:
        lam = alphas[np.newaxis, :, np.newaxis]
    return MultichannelImage(data=lip_mul(lam, img.data, img.params), params=img.params)


def add_noise(img: MultichannelImage, spec: NoiseSpec) -> MultichannelImage:
    """Corrupt a seeded selection of pixels with per-channel Gaussian noise.

    ``floor(density * n_pixels)`` distinct pixels are drawn, then each of
    their channels gets an independent zero-mean sample of the given
    variance added in classic intensity (sensor side), rescaled by M - 1
    and clipped to the 8-bit range.  Unselected pixels stay bit-identical.
    """
    m = img.params.m
    count = int(math.floor(spec.density * img.height * img.width))
    if count == 0 or spec.variance == 0.0:
        return MultichannelImage(data=img.data.copy(), params=img.params)
    rng = np.random.default_rng(spec.seed)
    flat = rng.choice(img.height * img.width, size=count, replace=False)
    rows, cols = np.unravel_index(flat, (img.height, img.width))
    samples = rng.normal(0.0, math.sqrt(spec.variance), size=(count, img.channels))

    data = img.data.copy()
    classic = (m - 1.0) - data[rows, cols]
    classic = np.clip(classic + samples * (m - 1.0), 0.0, m - 1.0)
    data[rows, cols] = (m - 1.0) - classic
    return MultichannelImage(data=data, params=img.params)


def gen_discs(
    height: int = 96,
    width: int = 96,
    n_discs: int = 3,
    radius: int = 8,
    disc_color=(180.0, 60.0, 40.0),
    background=(20.0, 20.0, 20.0),
    seed: int = 0,
    margin: int = 16,
    min_center_dist: float | None = None,
    params: GrayScaleParams = DEFAULT_PARAMS,
) -> tuple[MultichannelImage, list[tuple[int, int]]]:
    """Identical coloured discs at seeded random positions on a uniform
    background; returns the image and the disc centres.

    Centres keep ``margin`` pixels from the border and at least
    ``min_center_dist`` (default 4 * radius) from each other, so a window
    cut around one disc matches every other exactly.
    """
    if min_center_dist is None:
        min_center_dist = 4.0 * radius
    if margin < radius:
        raise ValueError(f"margin {margin} smaller than disc radius {radius}")
    if height <= 2 * margin or width <= 2 * margin:
        raise ValueError(f"canvas {height}x{width} too small for margin {margin}")

    rng = np.random.default_rng(seed)
    centers: list[tuple[int, int]] = []
    attempts = 0
    while len(centers) < n_discs:
        attempts += 1
        if attempts > 10000:
            raise ValueError(
                f"cannot place {n_discs} discs with spacing {min_center_dist} "
                f"on a {height}x{width} canvas"
            )
        r = int(rng.integers(margin, height - margin))
        c = int(rng.integers(margin, width - margin))
        if all(math.hypot(r - cr, c - cc) >= min_center_dist for cr, cc in centers):
            centers.append((r, c))

    background = np.atleast_1d(np.asarray(background, dtype=np.float64))
    disc_color = np.atleast_1d(np.asarray(disc_color, dtype=np.float64))
    data = np.broadcast_to(background, (height, width, background.size)).copy()
    yy, xx = np.indices((height, width))
    for cr, cc in centers:
        inside = (yy - cr) ** 2 + (xx - cc) ** 2 <= radius * radius
        data[inside] = disc_color
    return MultichannelImage(data=data, params=params), centers


def gen_bricks(
    rows: int = 4,
    cols: int = 2,
    brick_height: int = 10,
    brick_width: int = 86,
    mortar: int = 4,
    brick_color=(95.0, 185.0, 205.0),
    mortar_color=(30.0, 30.0, 30.0),
    params: GrayScaleParams = DEFAULT_PARAMS,
) -> tuple[MultichannelImage, list[tuple[int, int]]]:
    """Brick wall: a periodic tiling of rectangles with mortar gaps.

    The canvas is exactly periodic with cell size
    ``(brick_height + mortar, brick_width + mortar)``; the returned ground
    truth holds each cell's centre pixel, which is where a probe cut as
    one full cell (anchored at its floor centre) matches.  The geometry is
    deterministic, so no seed is involved.
    """
    period_h = brick_height + mortar
    period_w = brick_width + mortar
    height = rows * period_h + mortar
    width = cols * period_w + mortar

    mortar_color = np.atleast_1d(np.asarray(mortar_color, dtype=np.float64))
    brick_color = np.atleast_1d(np.asarray(brick_color, dtype=np.float64))
    data = np.broadcast_to(mortar_color, (height, width, mortar_color.size)).copy()
    truth = []
    for r in range(rows):
        for c in range(cols):
            top = r * period_h + mortar
            left = c * period_w + mortar
            data[top : top + brick_height, left : left + brick_width] = brick_color
            truth.append((r * period_h + (period_h - 1) // 2, c * period_w + (period_w - 1) // 2))
    return MultichannelImage(data=data, params=params), truth


def gen_scene(kind: str, seed: int = 0, **geometry):
    """Dispatch to a scene generator by name ('bricks' or 'discs')."""
    if kind == "discs":
        return gen_discs(seed=seed, **geometry)
    if kind == "bricks":
        return gen_bricks(**geometry)
    raise ValueError(f"unknown scene kind {kind!r} (use 'bricks' or 'discs')")
