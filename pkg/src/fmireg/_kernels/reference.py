"""Numpy fallback for the histogram kernel.

The compiled extension (``_core``) and this module must stay numerically
interchangeable: both evaluate the bilinear sample as

    top = v00*(1-fx) + v10*fx
    bot = v01*(1-fx) + v11*fx
    val = top*(1-fy) + bot*fy

and accumulate cell masses in row-major test-pixel order, so the two
backends produce bit-identical histograms (the extension is compiled
with fp-contraction disabled).
"""

from __future__ import annotations

import numpy as np


def _warp_coords(width: int, height: int, params) -> tuple[np.ndarray, np.ndarray]:
    a11, a12, a21, a22, tx, ty = params
    m = np.arange(width, dtype=np.float64)
    n = np.arange(height, dtype=np.float64)[:, None]
    x = a11 * m + a12 * n + tx
    y = a21 * m + a22 * n + ty
    return x, y


def warp_sample(ref: np.ndarray, params, width: int, height: int):
    """Sample ``ref`` at the transform of every pixel of a width x height grid.

    Returns ``(values, inside)`` where ``inside`` marks pixels whose mapped
    coordinates fall within the closed hull of ``ref`` pixel centers;
    ``values`` is only meaningful where ``inside`` is true.
    """
    hr, wr = ref.shape
    x, y = _warp_coords(width, height, params)
    inside = (x >= 0.0) & (x <= wr - 1.0) & (y >= 0.0) & (y <= hr - 1.0)
    xs = np.where(inside, x, 0.0)
    ys = np.where(inside, y, 0.0)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, max(wr - 2, 0))
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, max(hr - 2, 0))
    x1 = np.minimum(x0 + 1, wr - 1)
    y1 = np.minimum(y0 + 1, hr - 1)
    fx = xs - x0
    fy = ys - y0
    top = ref[y0, x0] * (1.0 - fx) + ref[y0, x1] * fx
    bot = ref[y1, x0] * (1.0 - fx) + ref[y1, x1] * fx
    vals = top * (1.0 - fy) + bot * fy
    return vals, inside


def accumulate(ref, test, a11, a12, a21, a22, tx, ty, nbins, focus=None):
    """Joint gray-bin histogram of ``(ref sampled at T(pixel), test pixel)``.

    Weight 1 per contributing pixel, or the focus field bilinearly sampled
    at the mapped location when ``focus`` is given.  Returns
    ``(mass, overlap_count)`` with ``mass`` a float64 ``(nbins, nbins)``
    grid indexed ``[ref_bin, test_bin]``.
    """
    params = (a11, a12, a21, a22, tx, ty)
    ht, wt = test.shape
    vals, inside = warp_sample(ref, params, wt, ht)
    flat = inside.ravel()
    k = np.clip(np.floor(vals * nbins).astype(np.int64), 0, nbins - 1).ravel()[flat]
    l = np.clip(np.floor(test * nbins).astype(np.int64), 0, nbins - 1).ravel()[flat]
    codes = k * nbins + l
    if focus is None:
        counts = np.bincount(codes, minlength=nbins * nbins)
        mass = counts.astype(np.float64).reshape(nbins, nbins)
    else:
        w, _ = warp_sample(focus, params, wt, ht)
        mass = np.bincount(codes, weights=w.ravel()[flat], minlength=nbins * nbins)
        mass = mass.reshape(nbins, nbins)
    return mass, int(flat.sum())
