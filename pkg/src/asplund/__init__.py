"""Double-sided probing metrics for lighting-invariant template matching.

Images live on an inverted, bounded grey scale where the probing distance
``ln(lambda / mu)`` between a template and a window is zero exactly when
one is a thickness rescale of the other; maps of that distance locate a
template regardless of exposure, and a per-window discard tolerance makes
the search robust to impulsive noise.
"""

from .image import MultichannelImage
from .lip import (
    DEFAULT_PARAMS,
    GrayScaleParams,
    invert_intensity,
    lip_add,
    lip_log,
    lip_mul,
    ratio,
    transmittance,
)
from .matching import Match, MatchSet, extract_matches, overlay, regional_minima
from .metrics import (
    ProbeBounds,
    ToleranceSpec,
    color_region_distance,
    d1_region,
    dinf_region,
    gray_region_distance,
    pixel_color_distance,
    tolerance_region_distance,
)
from .probemap import (
    DistanceMap,
    Probe,
    distance_map,
    distance_map_reference,
    distance_map_tol,
    map_minimum,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PARAMS",
    "DistanceMap",
    "GrayScaleParams",
    "Match",
    "MatchSet",
    "MultichannelImage",
    "Probe",
    "ProbeBounds",
    "ToleranceSpec",
    "color_region_distance",
    "d1_region",
    "dinf_region",
    "distance_map",
    "distance_map_reference",
    "distance_map_tol",
    "extract_matches",
    "gray_region_distance",
    "invert_intensity",
    "lip_add",
    "lip_log",
    "lip_mul",
    "map_minimum",
    "overlay",
    "pixel_color_distance",
    "ratio",
    "regional_minima",
    "tolerance_region_distance",
    "transmittance",
]
