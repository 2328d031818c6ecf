"""Multichannel image container on the inverted grey scale.

A single container covers both the grey-scale case (one channel) and
colour (three channels, R/G/B order); every pixel carries the same number
of channels and respects the scale bound of the attached
:class:`~asplund.lip.GrayScaleParams`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lip import DEFAULT_PARAMS, GrayScaleParams


@dataclass(frozen=True)
class MultichannelImage:
    """Row-major ``(height, width, channels)`` float image, values in [0, M).

    ``data`` is always stored as a 3-D float64 array; grey-scale images
    have ``channels == 1``.  Use :meth:`from_array` to wrap an existing
    2-D or 3-D array.
    """

    data: np.ndarray
    params: GrayScaleParams = field(default_factory=GrayScaleParams)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"image data must be 2-D or 3-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError(f"degenerate image shape {arr.shape}")
        if np.any(arr < 0.0) or np.any(arr >= self.params.m):
            raise ValueError(f"pixel values outside the grey scale [0, {self.params.m})")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, data, params: GrayScaleParams = DEFAULT_PARAMS) -> "MultichannelImage":
        return cls(data=np.array(data, dtype=np.float64), params=params)

    @classmethod
    def constant(
        cls, height: int, width: int, color, params: GrayScaleParams = DEFAULT_PARAMS
    ) -> "MultichannelImage":
        """Uniform image; ``color`` is a scalar or a per-channel sequence."""
        color = np.atleast_1d(np.asarray(color, dtype=np.float64))
        data = np.broadcast_to(color, (height, width, color.size)).copy()
        return cls(data=data, params=params)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def crop(self, row: int, col: int, height: int, width: int) -> "MultichannelImage":
        """Extract a rectangular sub-image (copies the data)."""
        if row < 0 or col < 0 or row + height > self.height or col + width > self.width:
            raise ValueError(
                f"crop {height}x{width}@({row},{col}) exceeds image "
                f"{self.height}x{self.width}"
            )
        return MultichannelImage(
            data=self.data[row : row + height, col : col + width].copy(),
            params=self.params,
        )
