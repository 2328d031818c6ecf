"""Bounded grey-scale arithmetic on the inverted intensity scale.

Grey levels live in ``[0, M)`` where 0 is the *white* extremity (full
transmission, nothing between source and sensor) and M is the unreachable
black limit.  On this scale each value behaves like an optical absorption:
adding two images stacks their obstacles, multiplying by a scalar changes
the obstacle thickness.  Everything downstream (distances, probing maps)
is built from the log-ratio primitive defined here.

All operations are pure and vectorized: they accept scalars or numpy
arrays and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GrayScaleParams:
    """Scale bound M and the clamp window used before taking logarithms.

    ``v_min``/``v_max`` bound the values fed to :func:`lip_log`: the scale
    admits 0 (where the log vanishes and every ratio blows up) and excludes
    M (where it diverges), so ratios are only computed on the clamped
    window.  The defaults perturb 8-bit data by at most one grey level.
    """

    m: float = 256.0
    v_min: float = 1.0
    v_max: float | None = None

    def __post_init__(self):
        if not self.m > 1.0:
            raise ValueError(f"scale bound m must exceed 1, got {self.m}")
        if self.v_max is None:
            object.__setattr__(self, "v_max", self.m - 1.0)
        if not (0.0 < self.v_min <= self.v_max < self.m):
            raise ValueError(
                f"clamp window must satisfy 0 < v_min <= v_max < m, got "
                f"[{self.v_min}, {self.v_max}] with m={self.m}"
            )


DEFAULT_PARAMS = GrayScaleParams()


def _check_range(v, params: GrayScaleParams, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr >= params.m):
        raise ValueError(f"{name} outside the grey scale [0, {params.m})")
    return arr


def transmittance(v, params: GrayScaleParams = DEFAULT_PARAMS):
    """Fraction of source light passing through an obstacle of value ``v``.

    ``T = 1 - v/M``, strictly decreasing, 1.0 at v=0 (no obstacle).
    """
    arr = _check_range(v, params, "value")
    return 1.0 - arr / params.m


def lip_add(a, b, params: GrayScaleParams = DEFAULT_PARAMS):
    """Superpose two obstacles: ``a + b - a*b/M``.

    Commutative, 0 is the neutral element, and the result stays in
    [0, M).  Transmittances multiply under this addition.
    """
    a = _check_range(a, params, "first operand")
    b = _check_range(b, params, "second operand")
    return a + b - a * b / params.m


def lip_mul(lam, a, params: GrayScaleParams = DEFAULT_PARAMS):
    """Scale the obstacle thickness by ``lam``: ``M - M*(1 - a/M)**lam``.

    ``lam > 1`` darkens, ``lam < 1`` brightens, and ``lip_mul(2, a)``
    equals ``lip_add(a, a)``.  Requires ``lam >= 0``.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0.0):
        raise ValueError("thickness scalar must be non-negative")
    a = _check_range(a, params, "value")
    return params.m - params.m * (1.0 - a / params.m) ** lam


def lip_log(v, params: GrayScaleParams = DEFAULT_PARAMS):
    """Absorption logarithm ``-ln(1 - v/M)`` after clamping v into the window.

    Clamping to [v_min, v_max] removes the singularities at v=0 (result 0,
    which would make ratios infinite) and v -> M (divergence), so the
    result is always finite and strictly positive.  Out-of-range inputs are
    clamped rather than rejected.
    """
    arr = np.asarray(v, dtype=np.float64)
    clamped = np.clip(arr, params.v_min, params.v_max)
    return -np.log(1.0 - clamped / params.m)


def ratio(f_val, probe_val, params: GrayScaleParams = DEFAULT_PARAMS):
    """Exact thickness scalar mapping ``probe_val`` onto ``f_val``.

    Returns ``lip_log(f_val) / lip_log(probe_val)``, i.e. the alpha with
    ``lip_mul(alpha, probe_val) == f_val`` for clamp-free inputs.  This is
    the primitive every probing distance reduces to.
    """
    return lip_log(f_val, params) / lip_log(probe_val, params)


def invert_intensity(v, params: GrayScaleParams = DEFAULT_PARAMS):
    """Map classic intensity to the inverted scale, ``(M-1) - v``.

    An involution on 8-bit integer data: classic white (255) becomes 0,
    the neutral element of the bounded addition.
    """
    arr = _check_range(v, params, "classic intensity")
    return (params.m - 1.0) - arr
