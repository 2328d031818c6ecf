"""Sliding-window maps of probing distances over an image.

For every anchor where the template support fits inside the image, the
map holds the region distance between the template and the window centred
there; border anchors carry a +inf sentinel.  The production engine
evaluates whole bands of anchors with vectorized window views, while
:func:`distance_map_reference` keeps the naive per-window evaluation as
the source of truth.

Anchor evaluations are independent, so bands are distributed over a
thread pool; band boundaries never influence per-anchor values, which
keeps maps bitwise identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import MultichannelImage
from .lip import lip_log
from .metrics import ToleranceSpec, color_region_distance, tolerance_region_distance

# Per-band window-view budget (bytes); bounds peak memory, not results.
_BAND_BYTES = 32 * 1024 * 1024


@dataclass(frozen=True)
class Probe:
    """Template image plus the anchor offset of its centre pixel.

    The anchor defaults to the floor centre ``((h-1)//2, (w-1)//2)`` and
    must lie inside the template support.
    """

    image: MultichannelImage
    anchor: tuple[int, int] | None = None

    def __post_init__(self):
        if self.anchor is None:
            object.__setattr__(
                self,
                "anchor",
                ((self.image.height - 1) // 2, (self.image.width - 1) // 2),
            )
        ar, ac = self.anchor
        if not (0 <= ar < self.image.height and 0 <= ac < self.image.width):
            raise ValueError(
                f"anchor {self.anchor} outside template support "
                f"{self.image.height}x{self.image.width}"
            )

    @classmethod
    def cut(cls, img: MultichannelImage, row: int, col: int, height: int, width: int) -> "Probe":
        """Extract a template from an image; (row, col) is the top-left corner."""
        return cls(image=img.crop(row, col, height, width))


@dataclass(frozen=True)
class DistanceMap:
    """Float field of distances over valid anchors, +inf elsewhere.

    ``probe_shape``/``probe_anchor`` record the generating template
    geometry (needed to place overlay rectangles); they are None for maps
    loaded from plain float files.
    """

    values: np.ndarray
    valid: np.ndarray
    probe_shape: tuple[int, int] | None = None
    probe_anchor: tuple[int, int] | None = None

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _check_geometry(f: MultichannelImage, probe: Probe) -> None:
    t = probe.image
    if t.channels != f.channels:
        raise ValueError(f"channel counts differ: probe {t.channels} vs image {f.channels}")
    if t.params != f.params:
        raise ValueError("probe and image use different grey-scale parameters")
    if t.height > f.height or t.width > f.width:
        raise ValueError(
            f"template {t.height}x{t.width} larger than image {f.height}x{f.width}"
        )


def _resolve_threads(threads: int | None) -> int:
    """Explicit argument wins, then ASPLUND_THREADS, then one per CPU (0 = auto)."""
    if threads is None:
        env = os.environ.get("ASPLUND_THREADS", "").strip()
        try:
            threads = int(env) if env else 0
        except ValueError:
            raise ValueError(f"ASPLUND_THREADS must be an integer, got {env!r}") from None
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def _band_starts(n_rows: int, band_rows: int) -> list[int]:
    return list(range(0, n_rows, band_rows))


def _window_ratios(lf: np.ndarray, lt: np.ndarray, r0: int, r1: int) -> np.ndarray:
    """Log-ratio field for anchor rows [r0, r1), shape (rows, cols, th, tw, L).

    Channels stay on the trailing (contiguous) axis so the per-pixel
    reductions that follow run at memory speed.
    """
    th, tw, nch = lt.shape
    block = lf[r0 : r1 + th - 1]
    win = sliding_window_view(block, (th, tw, nch), axis=(0, 1, 2))[:, :, 0]
    return win / lt


def _plain_band(lf: np.ndarray, lt: np.ndarray, r0: int, r1: int) -> np.ndarray:
    """Distances for anchor rows [r0, r1) given precomputed log images."""
    ratios = _window_ratios(lf, lt, r0, r1)
    flat = ratios.reshape(ratios.shape[0], ratios.shape[1], -1)
    return np.log(flat.max(axis=-1) / flat.min(axis=-1))


def _tol_band(lf: np.ndarray, lt: np.ndarray, r0: int, r1: int, budget: int) -> np.ndarray:
    """Tolerance distances for anchor rows [r0, r1).

    Per window the optimum discards, for the best split j, the j pixels
    with the smallest per-pixel ratio plus the budget-j largest-ratio
    pixels among the remaining ones (disjoint sides: a pixel extreme on
    both sides spends the budget once).  Only the budget+1 extreme
    entries per side can ever decide a bound, so a partial sort of each
    side suffices; prefix counts over the id cross-match table then
    resolve every split at once.
    """
    th, tw, _ = lt.shape
    ratios = _window_ratios(lf, lt, r0, r1)
    n = th * tw
    low = ratios.min(axis=-1).reshape(ratios.shape[0], ratios.shape[1], n)
    high = ratios.max(axis=-1).reshape(ratios.shape[0], ratios.shape[1], n)
    if budget == 0:
        return np.log(high.max(axis=-1) / low.min(axis=-1))

    k1 = budget + 1
    idx_low = np.argpartition(low, budget, axis=-1)[..., :k1]
    val_low = np.take_along_axis(low, idx_low, axis=-1)
    order = np.argsort(val_low, axis=-1)
    idx_low = np.take_along_axis(idx_low, order, axis=-1)
    val_low = np.take_along_axis(val_low, order, axis=-1)

    idx_high = np.argpartition(-high, budget, axis=-1)[..., :k1]
    val_high = np.take_along_axis(high, idx_high, axis=-1)
    order = np.argsort(-val_high, axis=-1)
    idx_high = np.take_along_axis(idx_high, order, axis=-1)
    val_high = np.take_along_axis(val_high, order, axis=-1)

    jj = np.arange(k1)
    mm = budget - jj
    cross = idx_low[..., :, None] == idx_high[..., None, :]  # (..., t, s)
    pref_t = np.cumsum(cross, axis=-2) > 0

    # absorbed[..., j, s]: high candidate s already among the j smallest lows
    absorbed = np.zeros(cross.shape[:-2] + (k1, k1), dtype=bool)
    absorbed[..., 1:, :] = pref_t[..., :budget, :]
    free_rank = np.cumsum(~absorbed, axis=-1)  # 1-based rank among unabsorbed

    # The surviving upper bound is the (m+1)-th unabsorbed high candidate.
    lam_pos = (free_rank == (mm + 1)[:, None]).argmax(axis=-1)  # (..., j)
    lam = np.take_along_axis(val_high, lam_pos, axis=-1)

    # The m discarded highs are the first m unabsorbed candidates; a low
    # candidate is gone positionally (t < j) or through one of them.
    discarded_high = ~absorbed & (free_rank <= mm[:, None])  # (..., j, s)
    gone_low = (cross[..., None, :, :] & discarded_high[..., :, None, :]).any(axis=-1)
    gone_low |= jj[None, :] < jj[:, None]  # (j, t) positional triangle
    mu = np.take_along_axis(val_low, gone_low.argmin(axis=-1), axis=-1)

    return np.log(lam / mu).min(axis=-1)


def _run_engine(
    f: MultichannelImage, probe: Probe, budget: int | None, threads: int | None
) -> DistanceMap:
    _check_geometry(f, probe)
    t = probe.image
    th, tw = t.height, t.width
    n_rows = f.height - th + 1
    n_cols = f.width - tw + 1

    lf = lip_log(f.data, f.params)
    lt = lip_log(t.data, t.params)

    out = np.full((n_rows, n_cols), np.inf)
    # Band size depends only on geometry so partitioning is reproducible.
    window_bytes = n_cols * th * tw * f.channels * 8
    band_rows = max(1, _BAND_BYTES // max(window_bytes, 1))
    starts = _band_starts(n_rows, band_rows)

    def work(r0: int) -> None:
        r1 = min(r0 + band_rows, n_rows)
        if budget is None:
            out[r0:r1] = _plain_band(lf, lt, r0, r1)
        else:
            out[r0:r1] = _tol_band(lf, lt, r0, r1, budget)

    n_threads = _resolve_threads(threads)
    if n_threads == 1 or len(starts) == 1:
        for r0 in starts:
            work(r0)
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(work, starts))

    ar, ac = probe.anchor
    values = np.full((f.height, f.width), np.inf)
    values[ar : ar + n_rows, ac : ac + n_cols] = out
    valid = np.zeros((f.height, f.width), dtype=bool)
    valid[ar : ar + n_rows, ac : ac + n_cols] = True
    return DistanceMap(
        values=values, valid=valid, probe_shape=(th, tw), probe_anchor=(ar, ac)
    )


def distance_map(f: MultichannelImage, probe: Probe, threads: int | None = None) -> DistanceMap:
    """Map of region distances between the probe and every fitting window."""
    return _run_engine(f, probe, budget=None, threads=threads)


def distance_map_tol(
    f: MultichannelImage, probe: Probe, tol: ToleranceSpec, threads: int | None = None
) -> DistanceMap:
    """Tolerance variant: each window may discard its worst pixels."""
    _check_geometry(f, probe)
    n = probe.image.height * probe.image.width
    budget = tol.discard_budget(n)
    if budget >= n:
        raise ValueError(f"tolerance would discard the whole window ({budget} >= {n})")
    return _run_engine(f, probe, budget=budget, threads=threads)


def distance_map_reference(
    f: MultichannelImage, probe: Probe, tol: ToleranceSpec | None = None
) -> DistanceMap:
    """Naive per-window evaluation; slow, kept as the engine's ground truth."""
    _check_geometry(f, probe)
    t = probe.image
    th, tw = t.height, t.width
    n_rows = f.height - th + 1
    n_cols = f.width - tw + 1
    out = np.full((n_rows, n_cols), np.inf)
    for r in range(n_rows):
        for c in range(n_cols):
            window = MultichannelImage(data=f.data[r : r + th, c : c + tw], params=f.params)
            if tol is None:
                out[r, c], _ = color_region_distance(t, window)
            else:
                out[r, c], _, _ = tolerance_region_distance(t, window, None, tol)
    ar, ac = probe.anchor
    values = np.full((f.height, f.width), np.inf)
    values[ar : ar + n_rows, ac : ac + n_cols] = out
    valid = np.zeros((f.height, f.width), dtype=bool)
    valid[ar : ar + n_rows, ac : ac + n_cols] = True
    return DistanceMap(
        values=values, valid=valid, probe_shape=(th, tw), probe_anchor=(ar, ac)
    )


def map_minimum(dmap: DistanceMap) -> tuple[tuple[int, int], float]:
    """Global minimum over valid pixels; ties resolve to the first in
    row-major order."""
    if not dmap.valid.any():
        raise ValueError("distance map has no valid pixels")
    flat = int(np.argmin(dmap.values))
    loc = np.unravel_index(flat, dmap.values.shape)
    return (int(loc[0]), int(loc[1])), float(dmap.values[loc])
