"""Grayscale image container, gray-value binning and bilinear sampling.

Conventions used throughout the package:

* intensities live in ``[0, 1]``,
* pixel ``(x, y)`` has its center at real coordinates ``(x, y)``,
  ``x`` running rightward along columns and ``y`` downward along rows,
  with the origin at the top-left pixel,
* the sampling domain of an image is the convex hull of its pixel
  centers, i.e. ``[0, width-1] x [0, height-1]`` (boundary included);
  coordinates outside that rectangle are "outside" rather than an error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, InputError

__all__ = [
    "Image",
    "BinningScheme",
    "bin_value",
    "bilinear_sample",
    "load_image",
    "save_image",
    "load_pgm",
    "save_pgm",
    "load_png",
    "save_png",
]


@dataclass(frozen=True)
class Image:
    """2-D grayscale raster with float64 intensities in ``[0, 1]``.

    The pixel array is stored row-major, ``pixels[y, x]``, and is made
    read-only so instances can be shared freely.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError("image must be a 2-D array with at least one pixel")
        if not np.all(np.isfinite(arr)):
            raise InputError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise InputError("image intensities must lie in [0, 1]")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def value_at(self, x: int, y: int) -> float:
        return float(self.pixels[y, x])


@dataclass(frozen=True)
class BinningScheme:
    """Uniform partition of ``[0, 1]`` into ``bins`` half-open intervals.

    Bin indices are 1-based; the value 1.0 is assigned to the last bin.
    """

    bins: int = 64

    def __post_init__(self):
        if int(self.bins) != self.bins or self.bins < 2:
            raise InputError("bin count must be an integer >= 2")
        object.__setattr__(self, "bins", int(self.bins))

    def codes(self, values: np.ndarray) -> np.ndarray:
        """Vectorised 0-based bin indices for an array of intensities."""
        k = np.floor(np.asarray(values, dtype=np.float64) * self.bins).astype(np.int64)
        return np.clip(k, 0, self.bins - 1)


def bin_value(x: float, scheme: BinningScheme) -> int:
    """1-based bin index of intensity ``x``: ``floor(x * bins) + 1`` clamped."""
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"intensity {x!r} outside [0, 1]")
    k = int(math.floor(x * scheme.bins)) + 1
    return min(k, scheme.bins)


def bilinear_sample(img: Image, x: float, y: float):
    """Bilinear interpolation of ``img`` at real coordinates ``(x, y)``.

    Returns the interpolated intensity, or ``None`` when ``(x, y)`` falls
    outside the convex hull of the pixel centers.  The interpolated value
    always lies within the min/max of the four surrounding pixels.
    """
    w, h = img.width, img.height
    if not (0.0 <= x <= w - 1 and 0.0 <= y <= h - 1):
        return None
    p = img.pixels
    x0 = min(int(math.floor(x)), max(w - 2, 0))
    y0 = min(int(math.floor(y)), max(h - 2, 0))
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = p[y0, x0] * (1.0 - fx) + p[y0, x1] * fx
    bot = p[y1, x0] * (1.0 - fx) + p[y1, x1] * fx
    return float(top * (1.0 - fy) + bot * fy)


# ---------------------------------------------------------------------------
# 8-bit grayscale file IO.  Byte value b maps to intensity b / 255.

def to_u8(values: np.ndarray) -> np.ndarray:
    """Quantise intensities to bytes with round-half-up."""
    return np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def load_pgm(path) -> Image:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise InputError(f"{path}: not a binary (P5) PGM file")
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments running to end of line.
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        m = re.match(rb"(?:\s+|#[^\n]*\n)*(\d+)", data[pos:])
        if m is None:
            raise InputError(f"{path}: malformed PGM header")
        tokens.append(int(m.group(1)))
        pos += m.end()
    width, height, maxval = tokens
    if maxval != 255:
        raise InputError(f"{path}: only 8-bit PGM supported (maxval 255)")
    pos += 1  # single whitespace byte after maxval
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    if raster.size != width * height:
        raise InputError(f"{path}: truncated PGM raster")
    return Image(raster.reshape(height, width).astype(np.float64) / 255.0)


def save_pgm(img: Image, path) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + to_u8(img.pixels).tobytes())


def load_png(path) -> Image:
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float64)
    return Image(arr / 255.0)


def save_png(img: Image, path) -> None:
    from PIL import Image as PILImage

    PILImage.fromarray(to_u8(img.pixels), mode="L").save(path, format="PNG")


def load_image(path) -> Image:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such image file: {path}")
    if path.suffix.lower() == ".png":
        return load_png(path)
    return load_pgm(path)


def save_image(img: Image, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".png":
        save_png(img, path)
    else:
        save_pgm(img, path)
