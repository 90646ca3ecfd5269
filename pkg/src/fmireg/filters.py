"""Scalar image filters used by the focus construction pipelines."""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .errors import InputError, NoThresholdError, TooSmallImageError
from .image import BinningScheme, Image
from .morphology import BinaryMask

__all__ = [
    "median_filter",
    "gradient_modulus",
    "gaussian_convolve",
    "gaussian_kernel_1d",
    "threshold_mask",
    "otsu_threshold",
]

# Sup of the Sobel response on unit-range images: |Gx|, |Gy| <= 4.
_SOBEL_SCALE = 1.0 / (4.0 * math.sqrt(2.0))


def median_filter(img: Image, radius: int = 1) -> Image:
    """Median over the (2r+1)^2 window, clipped at the borders.

    Border pixels take the median of the in-bounds part of their window.
    """
    if radius < 1:
        raise InputError("median radius must be >= 1")
    r = int(radius)
    padded = np.pad(img.pixels, r, mode="constant", constant_values=np.nan)
    windows = sliding_window_view(padded, (2 * r + 1, 2 * r + 1))
    out = np.nanmedian(windows, axis=(2, 3))
    return Image(out)


def gradient_modulus(img: Image) -> Image:
    """Sobel gradient magnitude, rescaled into [0, 1].

    Uses 3x3 Sobel stencils with replicated borders and divides by the
    worst-case response ``4 * sqrt(2)``.
    """
    if img.width < 3 or img.height < 3:
        raise TooSmallImageError("gradient needs at least a 3x3 image")
    p = np.pad(img.pixels, 1, mode="edge")
    gx = (
        (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    return Image(np.clip(np.hypot(gx, gy) * _SOBEL_SCALE, 0.0, 1.0))


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Discrete Gaussian truncated at ceil(3 sigma), normalised to sum 1."""
    if sigma <= 0:
        raise InputError("sigma must be positive")
    r = int(math.ceil(3.0 * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_convolve(img_or_array, sigma: float):
    """Separable Gaussian smoothing with replicated borders.

    Accepts an ``Image`` (returns an ``Image``) or a raw nonnegative array
    (returns an array); focus builders smooth unnormalised weight fields.
    """
    kernel = gaussian_kernel_1d(sigma)
    arr = img_or_array.pixels if isinstance(img_or_array, Image) else np.asarray(img_or_array, dtype=np.float64)
    out = ndimage.correlate1d(arr, kernel, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="nearest")
    if isinstance(img_or_array, Image):
        return Image(np.clip(out, 0.0, 1.0))
    return np.clip(out, 0.0, None)


def threshold_mask(img: Image, t: float) -> BinaryMask:
    """Pixels with intensity >= ``t``."""
    if not (0.0 <= t <= 1.0):
        raise InputError(f"threshold {t!r} outside [0, 1]")
    return BinaryMask(img.pixels >= t)


def otsu_threshold(img: Image, bins: int = 256) -> float:
    """Threshold maximising the between-class variance over ``bins`` levels.

    Candidate thresholds are the bin boundaries ``k / bins``; ties are
    broken toward the lower threshold.  The returned intensity separates
    the classes when used with ``threshold_mask`` (>= comparison).
    """
    scheme = BinningScheme(bins)
    codes = scheme.codes(img.pixels)
    counts = np.bincount(codes.ravel(), minlength=bins).astype(np.float64)
    if np.count_nonzero(counts) < 2:
        raise NoThresholdError("image has fewer than 2 distinct gray levels")
    centers = (np.arange(bins) + 0.5) / bins
    total = counts.sum()
    cum_n = np.cumsum(counts)
    cum_mu = np.cumsum(counts * centers)
    best_k, best_var = None, -1.0
    for k in range(1, bins):
        n0 = cum_n[k - 1]
        n1 = total - n0
        if n0 == 0.0 or n1 == 0.0:
            continue
        mu0 = cum_mu[k - 1] / n0
        mu1 = (cum_mu[-1] - cum_mu[k - 1]) / n1
        var = (n0 / total) * (n1 / total) * (mu0 - mu1) ** 2
        if var > best_var:
            best_k, best_var = k, var
    return best_k / bins
