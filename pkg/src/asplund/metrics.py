"""Double-sided probing distances between images, with outlier tolerance.

Every distance here reduces to extrema of per-channel log-ratios between
the two inputs.  The tightest thickness scalars bounding one function by
homotheties of the other from above (lambda) and below (mu) give the
distance ``ln(lambda / mu)``: zero exactly when the inputs are homothetic,
and invariant under thickness rescaling of either side.

The tolerance variant discards a bounded number of worst pixels before
taking the extrema, which absorbs impulsive noise; the discard subset is
optimized exactly by enumerating splits between the low and high side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import MultichannelImage
from .lip import DEFAULT_PARAMS, GrayScaleParams, lip_log


@dataclass(frozen=True)
class ProbeBounds:
    """Scalars multiplying the probe: ``mu`` fits it under the target,
    ``lam`` over it.  Always ``0 < mu <= lam``."""

    mu: float
    lam: float


@dataclass(frozen=True)
class ToleranceSpec:
    """Fraction ``p`` of region pixels that must be kept; ``p = 1`` keeps all.

    A region of N pixels may discard up to ``floor((1 - p) * N)`` pixels
    (computed with a small epsilon so decimal percentages like 0.8 on 10
    pixels yield the intended budget of 2 despite binary rounding).
    """

    p: float

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"kept fraction p must lie in (0, 1], got {self.p}")

    def discard_budget(self, n_pixels: int) -> int:
        return int(math.floor((1.0 - self.p) * n_pixels + 1e-9))


def _region_coords(img: MultichannelImage, region) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (rows, cols) index arrays of the region; None = full domain."""
    if region is None:
        rows, cols = np.indices((img.height, img.width))
        return rows.ravel(), cols.ravel()
    mask = np.asarray(region, dtype=bool)
    if mask.shape != (img.height, img.width):
        raise ValueError(
            f"region mask shape {mask.shape} does not match image "
            f"{img.height}x{img.width}"
        )
    rows, cols = np.nonzero(mask)  # row-major order
    if rows.size == 0:
        raise ValueError("empty region")
    return rows, cols


def _check_pair(f: MultichannelImage, g: MultichannelImage) -> None:
    if f.channels != g.channels:
        raise ValueError(f"channel counts differ: {f.channels} vs {g.channels}")
    if (f.height, f.width) != (g.height, g.width):
        raise ValueError(
            f"image dimensions differ: {f.height}x{f.width} vs {g.height}x{g.width}"
        )
    if f.params != g.params:
        raise ValueError("images use different grey-scale parameters")


def _ratio_field(
    probe: MultichannelImage, target: MultichannelImage, region
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pixel, per-channel log-ratios target/probe over the region.

    Returns ``(ratios, rows, cols)`` with ratios of shape (N, L) in
    row-major pixel order.
    """
    _check_pair(probe, target)
    rows, cols = _region_coords(probe, region)
    lt = lip_log(target.data[rows, cols], target.params)
    lp = lip_log(probe.data[rows, cols], probe.params)
    return lt / lp, rows, cols


def pixel_color_distance(
    probe,
    value,
    params: GrayScaleParams = DEFAULT_PARAMS,
    return_bounds: bool = False,
):
    """Probing distance between two vector-pixels.

    Per-channel ratios ``r_c = lip_log(value_c) / lip_log(probe_c)`` give
    ``ln(max_c r_c / min_c r_c)``: zero iff the two colours are homothetic
    channel-wise.  With ``return_bounds`` the achieving (mu, lam) scalars
    are returned alongside.
    """
    probe = np.atleast_1d(np.asarray(probe, dtype=np.float64))
    value = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if probe.shape != value.shape:
        raise ValueError(f"channel counts differ: {probe.shape} vs {value.shape}")
    r = lip_log(value, params) / lip_log(probe, params)
    mu = float(r.min())
    lam = float(r.max())
    d = math.log(lam / mu)
    if return_bounds:
        return d, ProbeBounds(mu=mu, lam=lam)
    return d


def gray_region_distance(f: MultichannelImage, g: MultichannelImage, region=None) -> float:
    """Grey-scale region distance with ``g`` as the probing function.

    ``r(x) = lip_log(f(x)) / lip_log(g(x))`` over the region;
    returns ``ln(max r / min r)``.  Both images must be single-channel.
    """
    if f.channels != 1 or g.channels != 1:
        raise ValueError("grey-scale distance requires single-channel images")
    r, _, _ = _ratio_field(g, f, region)
    return math.log(float(r.max()) / float(r.min()))


def color_region_distance(
    f: MultichannelImage, g: MultichannelImage, region=None
) -> tuple[float, ProbeBounds]:
    """Global region distance with ``f`` as the probe.

    lambda is the largest and mu the smallest ratio ``r_c(x) =
    lip_log(g_c(x)) / lip_log(f_c(x))`` over all region pixels and
    channels; returns ``(ln(lambda / mu), ProbeBounds(mu, lambda))``.
    """
    r, _, _ = _ratio_field(f, g, region)
    mu = float(r.min())
    lam = float(r.max())
    return math.log(lam / mu), ProbeBounds(mu=mu, lam=lam)


def d1_region(f: MultichannelImage, g: MultichannelImage, region=None) -> float:
    """Mean over the region of the per-pixel probing distance."""
    r, _, _ = _ratio_field(f, g, region)
    per_pixel = np.log(r.max(axis=1) / r.min(axis=1))
    # Row-major sequential reduction keeps the result deterministic.
    return float(per_pixel.mean())


def dinf_region(f: MultichannelImage, g: MultichannelImage, region=None) -> float:
    """Supremum over the region of the per-pixel probing distance."""
    r, _, _ = _ratio_field(f, g, region)
    per_pixel = np.log(r.max(axis=1) / r.min(axis=1))
    return float(per_pixel.max())


def _split_enumeration(
    low: np.ndarray, high: np.ndarray, budget: int
) -> tuple[float, float, float, np.ndarray]:
    """Minimize ``ln(max high / min low)`` discarding at most ``budget`` pixels.

    ``low[i]``/``high[i]`` are the per-pixel smallest/largest channel
    ratios.  An optimal discard set consists, for some split j, of the j
    pixels with the smallest ``low`` plus the ``budget - j`` pixels with
    the largest ``high`` among the remaining ones: a discarded pixel that
    decides neither bound can be kept instead, everything below the
    surviving minimum or above the surviving maximum must be discarded,
    and padding a short set with further extremes never increases the
    distance.  The two sides are disjoint by construction; a pixel that is
    extreme on both sides counts against the budget once, freeing a slot
    for the next extreme.

    Returns ``(distance, mu, lam, discarded_positional_indices)``.  Ties
    in the sort order are broken by pixel position (row-major), and among
    equal-distance splits the smallest j wins, so the discard set is
    deterministic.
    """
    n = low.size
    if budget >= n:
        raise ValueError(f"tolerance would discard the whole region ({budget} >= {n})")
    order_low = np.argsort(low, kind="stable")
    order_high = np.argsort(-high, kind="stable")

    best = None
    for j in range(budget + 1):
        removed = set(order_low[:j].tolist())
        quota = budget - j
        for i in order_high:
            if quota == 0:
                break
            if i not in removed:
                removed.add(int(i))
                quota -= 1
        mu = next(float(low[i]) for i in order_low if i not in removed)
        lam = next(float(high[i]) for i in order_high if i not in removed)
        d = math.log(lam / mu)
        if best is None or d < best[0]:
            best = (d, mu, lam, sorted(removed))
    d, mu, lam, removed = best
    return d, mu, lam, np.asarray(removed, dtype=np.intp)


def tolerance_region_distance(
    f: MultichannelImage,
    g: MultichannelImage,
    region=None,
    tol: ToleranceSpec = ToleranceSpec(p=1.0),
) -> tuple[float, ProbeBounds, np.ndarray]:
    """Region distance after discarding the worst pixels within the budget.

    Minimizes :func:`color_region_distance` over all kept subsets that
    drop at most ``floor((1 - p) * N)`` whole pixels (all channels
    together).  Returns the distance, the achieving (mu, lam) bounds and
    the discarded pixel coordinates as an ``(n_discarded, 2)`` array of
    (row, col) pairs.  ``p = 1`` collapses to the plain region distance.
    """
    r, rows, cols = _ratio_field(f, g, region)
    budget = tol.discard_budget(r.shape[0])
    low = r.min(axis=1)
    high = r.max(axis=1)
    d, mu, lam, removed = _split_enumeration(low, high, budget)
    discarded = np.stack([rows[removed], cols[removed]], axis=1)
    return d, ProbeBounds(mu=mu, lam=lam), discarded
