"""File formats: 8-bit PGM/PPM/PNG images and float maps as PFM.

Classic intensity on disk (0 = black) is converted to the inverted
scale on load and back on save, so load/save round-trips 8-bit data
exactly.  Distance maps are exported as grey-scale PFM (single precision,
little-endian, scale -1.0, rows bottom-to-top) which preserves the +inf
border sentinels; an optional 8-bit preview normalizes the valid values.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .image import MultichannelImage
from .lip import DEFAULT_PARAMS, GrayScaleParams
from .probemap import DistanceMap

_PNM_MAGIC = {b"P5": 1, b"P6": 3}


def _classic_to_lip(classic: np.ndarray, params: GrayScaleParams) -> np.ndarray:
    return (params.m - 1.0) - classic.astype(np.float64)


def _lip_to_classic(data: np.ndarray, params: GrayScaleParams) -> np.ndarray:
    maxval = int(round(params.m - 1.0))
    if maxval > 255:
        raise OSError(f"cannot export scale bound m={params.m} to an 8-bit file")
    classic = np.rint((params.m - 1.0) - data)
    return np.clip(classic, 0, maxval).astype(np.uint8)


def _read_pnm(raw: bytes, path) -> np.ndarray:
    """Binary PGM (P5) or PPM (P6) to a (H, W, L) uint8 array."""
    magic = raw[:2]
    channels = _PNM_MAGIC.get(magic)
    if channels is None:
        raise OSError(f"{path}: not a binary PGM/PPM file")
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # '#' comments allowed, a single whitespace byte before the raster.
    pos = 2
    fields = []
    while len(fields) < 3:
        m = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\d+)").match(raw, pos)
        if m is None:
            raise OSError(f"{path}: malformed PGM/PPM header")
        fields.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = fields
    if not (1 <= maxval <= 255):
        raise OSError(f"{path}: PGM/PPM maxval {maxval} exceeds 8-bit range")
    pos += 1  # single whitespace separator
    count = width * height * channels
    if len(raw) - pos < count:
        raise OSError(f"{path}: truncated PGM/PPM raster")
    data = np.frombuffer(raw, dtype=np.uint8, count=count, offset=pos)
    return data.reshape(height, width, channels)


def _write_pnm(classic: np.ndarray, path: Path) -> None:
    h, w, channels = classic.shape
    magic = b"P5" if channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (w, h)
    path.write_bytes(header + classic.tobytes())


def _read_png(path) -> np.ndarray:
    with PILImage.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8)[:, :, np.newaxis]
        if im.mode == "RGB":
            return np.asarray(im, dtype=np.uint8)
        raise OSError(f"{path}: unsupported PNG mode '{im.mode}' (only 8-bit grey or RGB)")


def load_image(path, params: GrayScaleParams = DEFAULT_PARAMS) -> MultichannelImage:
    """Load PGM/PPM/PNG (sniffed from the magic bytes) onto the inverted scale."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] in _PNM_MAGIC:
        classic = _read_pnm(raw, path)
    elif raw[:8] == b"\x89PNG\r\n\x1a\n":
        classic = _read_png(path)
    else:
        raise OSError(f"{path}: unsupported image format (expected PGM, PPM or PNG)")
    if np.any(classic >= params.m):
        raise OSError(f"{path}: classic intensities exceed the grey scale [0, {params.m})")
    return MultichannelImage(data=_classic_to_lip(classic, params), params=params)


def save_image(img: MultichannelImage, path) -> None:
    """Write to PGM (grey), PPM (colour) or PNG, chosen by extension."""
    path = Path(path)
    classic = _lip_to_classic(img.data, img.params)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        if img.channels != 1:
            raise OSError(f"{path}: PGM holds a single channel, image has {img.channels}")
        _write_pnm(classic, path)
    elif suffix == ".ppm":
        if img.channels != 3:
            raise OSError(f"{path}: PPM holds three channels, image has {img.channels}")
        _write_pnm(classic, path)
    elif suffix == ".png":
        if img.channels == 1:
            PILImage.fromarray(classic[:, :, 0], mode="L").save(path)
        elif img.channels == 3:
            PILImage.fromarray(classic, mode="RGB").save(path)
        else:
            raise OSError(f"{path}: PNG export supports 1 or 3 channels, got {img.channels}")
    else:
        raise OSError(f"{path}: unsupported image extension (use .pgm, .ppm or .png)")


def save_map(dmap: DistanceMap, path) -> None:
    """Write a distance map as grey-scale PFM (float32, little-endian,
    scale -1.0, rows bottom-to-top); +inf sentinels survive the trip."""
    path = Path(path)
    h, w = dmap.values.shape
    header = b"Pf\n%d %d\n-1.0\n" % (w, h)
    raster = np.flipud(dmap.values).astype("<f4").tobytes()
    path.write_bytes(header + raster)


def load_map(path) -> DistanceMap:
    """Read a grey-scale PFM; finite pixels are valid.  Probe geometry is
    not stored in the file, so the result carries none."""
    path = Path(path)
    raw = path.read_bytes()
    m = re.compile(rb"(P[fF])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s").match(raw)
    if m is None:
        raise OSError(f"{path}: malformed PFM header")
    if m.group(1) != b"Pf":
        raise OSError(f"{path}: colour PFM not supported for distance maps")
    width, height = int(m.group(2)), int(m.group(3))
    scale = float(m.group(4))
    dtype = "<f4" if scale < 0 else ">f4"
    if len(raw) - m.end() < width * height * 4:
        raise OSError(f"{path}: truncated PFM raster")
    data = np.frombuffer(raw, dtype=dtype, count=width * height, offset=m.end())
    values = np.flipud(data.reshape(height, width)).astype(np.float64)
    return DistanceMap(values=values, valid=np.isfinite(values))


def save_map_preview(dmap: DistanceMap, path) -> None:
    """8-bit PNG of the map, min-max normalized over valid pixels;
    invalid pixels render black, as does a constant map."""
    path = Path(path)
    values = dmap.values
    out = np.zeros(values.shape, dtype=np.uint8)
    if dmap.valid.any():
        vals = values[dmap.valid]
        lo, hi = float(vals.min()), float(vals.max())
        if hi > lo:
            scaled = (values[dmap.valid] - lo) / (hi - lo) * 255.0
            out[dmap.valid] = np.rint(scaled).astype(np.uint8)
    PILImage.fromarray(out, mode="L").save(path)
