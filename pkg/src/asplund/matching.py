"""Regional-minima extraction from distance maps and match overlays.

Plateaus use 4-connectivity throughout; a regional minimum is a connected
plateau whose outer neighbours are all strictly higher.  Minima of depth
at least h are obtained by reconstruction-by-erosion of ``map + h`` over
``map`` (iterated geodesic erosion until stability), then taking the
regional minima of the result.  Invalid map pixels carry +inf and can
never join a minimum.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .image import MultichannelImage
from .probemap import DistanceMap

_N4 = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True)
class Match:
    location: tuple[int, int]  # (row, col) anchor position
    score: float


@dataclass(frozen=True)
class MatchSet:
    """Extracted matches sorted by ascending score, plus the probe geometry
    needed to draw template rectangles."""

    matches: tuple[Match, ...]
    probe_shape: tuple[int, int]
    probe_anchor: tuple[int, int]

    def __len__(self) -> int:
        return len(self.matches)

    def to_text(self) -> str:
        """Stable text record: a ``# probe WxH anchor ax,ay`` header, then
        one ``x y score`` line per match (column first, 6 decimals)."""
        th, tw = self.probe_shape
        ar, ac = self.probe_anchor
        lines = [f"# probe {tw}x{th} anchor {ac},{ar}"]
        lines.extend(
            f"{m.location[1]} {m.location[0]} {m.score:.6f}" for m in self.matches
        )
        return "\n".join(lines) + "\n"


def _erode4(a: np.ndarray) -> np.ndarray:
    """Minimum over each pixel and its 4-neighbours, +inf beyond borders."""
    p = np.pad(a, 1, constant_values=np.inf)
    return np.minimum.reduce(
        [p[1:-1, 1:-1], p[:-2, 1:-1], p[2:, 1:-1], p[1:-1, :-2], p[1:-1, 2:]]
    )


def reconstruct_erosion(seed: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Geodesic erosion of ``seed`` above ``mask``, iterated to stability.

    Requires ``seed >= mask`` pointwise; the result is the largest image
    below ``seed`` that cannot erode further without dropping under the
    mask.  Queue-based shortcuts must reproduce this loop exactly.
    """
    if seed.shape != mask.shape:
        raise ValueError(f"shapes differ: {seed.shape} vs {mask.shape}")
    if np.any(seed < mask):
        raise ValueError("seed must be >= mask for reconstruction by erosion")
    rec = seed.copy()
    while True:
        nxt = np.maximum(_erode4(rec), mask)
        if np.array_equal(nxt, rec):
            return rec
        rec = nxt


def _plateau_minima(values: np.ndarray) -> np.ndarray:
    """Exact regional minima of a float field; +inf pixels never qualify."""
    h, w = values.shape
    out = np.zeros((h, w), dtype=bool)
    visited = np.zeros((h, w), dtype=bool)
    for sr in range(h):
        for sc in range(w):
            if visited[sr, sc] or not np.isfinite(values[sr, sc]):
                continue
            level = values[sr, sc]
            component = [(sr, sc)]
            queue = deque(component)
            visited[sr, sc] = True
            is_min = True
            while queue:
                r, c = queue.popleft()
                for dr, dc in _N4:
                    nr, nc = r + dr, c + dc
                    if not (0 <= nr < h and 0 <= nc < w):
                        continue
                    v = values[nr, nc]
                    if v == level:
                        if not visited[nr, nc]:
                            visited[nr, nc] = True
                            component.append((nr, nc))
                            queue.append((nr, nc))
                    elif v < level:
                        is_min = False
            if is_min:
                for r, c in component:
                    out[r, c] = True
    return out


def regional_minima(dmap: DistanceMap, h: float = 0.0) -> np.ndarray:
    """Boolean mask of regional minima; ``h > 0`` keeps only minima of
    depth at least h."""
    if h < 0:
        raise ValueError(f"depth threshold must be >= 0, got {h}")
    values = dmap.values
    if h > 0:
        values = reconstruct_erosion(values + h, values)
    return _plateau_minima(values)


def extract_matches(
    dmap: DistanceMap,
    score_max: float = np.inf,
    min_separation: int = 0,
    h: float = 0.0,
) -> MatchSet:
    """Turn map minima into a deterministic list of match locations.

    One candidate per minimum component (its lowest-score pixel, row-major
    tie-break), filtered to ``score <= score_max``, then greedily accepted
    by ascending score with candidates closer than ``min_separation``
    (Chebyshev) to an accepted match suppressed.
    """
    if score_max < 0:
        raise ValueError(f"score_max must be >= 0, got {score_max}")
    if min_separation < 0:
        raise ValueError(f"min_separation must be >= 0, got {min_separation}")
    if dmap.probe_shape is None or dmap.probe_anchor is None:
        raise ValueError("distance map carries no probe geometry")

    mask = regional_minima(dmap, h)
    candidates = []
    for rep in _component_representatives(dmap.values, mask):
        score = float(dmap.values[rep])
        if score <= score_max:
            candidates.append((score, rep))
    candidates.sort(key=lambda it: (it[0], it[1]))

    accepted: list[Match] = []
    for score, (r, c) in candidates:
        clash = any(
            max(abs(r - m.location[0]), abs(c - m.location[1])) < min_separation
            for m in accepted
        )
        if not clash:
            accepted.append(Match(location=(r, c), score=score))
    return MatchSet(
        matches=tuple(accepted),
        probe_shape=dmap.probe_shape,
        probe_anchor=dmap.probe_anchor,
    )


def _component_representatives(values: np.ndarray, mask: np.ndarray):
    """Lowest-valued pixel of each 4-connected mask component, row-major
    tie-break (components are plateaus of the reconstruction, so the
    underlying values may vary inside one)."""
    h, w = mask.shape
    seen = np.zeros((h, w), dtype=bool)
    reps = []
    for sr in range(h):
        for sc in range(w):
            if not mask[sr, sc] or seen[sr, sc]:
                continue
            queue = deque([(sr, sc)])
            seen[sr, sc] = True
            best = (sr, sc)
            while queue:
                r, c = queue.popleft()
                if values[r, c] < values[best] or (
                    values[r, c] == values[best] and (r, c) < best
                ):
                    best = (r, c)
                for dr, dc in _N4:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w and mask[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        queue.append((nr, nc))
            reps.append(best)
    return reps


def overlay(
    image: MultichannelImage, matches: MatchSet, color=None
) -> MultichannelImage:
    """Copy of the image with a 1-pixel template outline around each match.

    ``color`` is a per-channel value on the inverted scale; the default 0
    renders as white.  Rectangles are drawn in match order and clipped to
    the image.
    """
    if color is None:
        color = np.zeros(image.channels)
    color = np.atleast_1d(np.asarray(color, dtype=np.float64))
    if color.size != image.channels:
        raise ValueError(f"colour has {color.size} channels, image has {image.channels}")
    out = image.data.copy()
    th, tw = matches.probe_shape
    ar, ac = matches.probe_anchor
    for m in matches.matches:
        r0 = m.location[0] - ar
        c0 = m.location[1] - ac
        r1, c1 = r0 + th - 1, c0 + tw - 1
        rs, re = max(r0, 0), min(r1, image.height - 1)
        cs, ce = max(c0, 0), min(c1, image.width - 1)
        if rs > re or cs > ce:
            continue
        if r0 >= 0:
            out[r0, cs : ce + 1] = color
        if r1 <= image.height - 1:
            out[r1, cs : ce + 1] = color
        if c0 >= 0:
            out[rs : re + 1, c0] = color
        if c1 <= image.width - 1:
            out[rs : re + 1, c1] = color
    return MultichannelImage(data=out, params=image.params)
