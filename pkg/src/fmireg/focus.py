"""Focus fields: prior weight distributions over the reference image.

A focus map concentrates the histogram accumulation on the structures
that matter for the alignment.  Builders here cover:

* Gaussian mixtures around manually chosen centers,
* smoothed edge maps gated by a thresholded patch (restoration and
  implant pipelines), or by the patch complement (bone pipeline),
* Gaussian-blurred rasterized spline curves (cephalometric pipeline).

Scaling all weights by a positive constant never changes a criterion
value, so maps may be used normalised or raw.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyFocusError, InputError
from .filters import (
    gaussian_convolve,
    gradient_modulus,
    median_filter,
    otsu_threshold,
    threshold_mask,
)
from .image import Image, to_u8
from .morphology import BinaryMask, complement, morph_close, morph_dilate
from .splines import rasterize_curves

__all__ = [
    "FocusMap",
    "PresetParams",
    "uniform_focus",
    "mask_multiply",
    "gaussian_mixture_focus",
    "spline_focus",
    "preset_restoration_focus",
    "preset_implant_focus",
    "preset_bone_focus",
    "edge_map",
    "opaque_patch",
    "save_focus_map",
    "load_focus_map",
    "save_focus_pgm",
]


@dataclass(frozen=True)
class FocusMap:
    """Nonnegative weight field over the reference image domain."""

    weights: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64)
        if arr.ndim != 2:
            raise InputError("focus weights must be a 2-D array")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0:
            raise EmptyFocusError("focus weights must be finite and >= 0")
        if not (arr > 0.0).any():
            raise EmptyFocusError("focus weights are identically zero")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    @property
    def height(self) -> int:
        return self.weights.shape[0]

    @property
    def width(self) -> int:
        return self.weights.shape[1]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> "FocusMap":
        return FocusMap(self.weights / self.total)


def uniform_focus(width: int, height: int) -> FocusMap:
    return FocusMap(np.full((height, width), 1.0 / (width * height)))


def mask_multiply(weights, mask: BinaryMask) -> FocusMap:
    """Zero all weights outside the mask; error when nothing survives."""
    field = weights.weights if isinstance(weights, FocusMap) else weights.pixels
    if field.shape != mask.flags.shape:
        raise InputError("weight field and mask dimensions differ")
    gated = np.where(mask.flags, field, 0.0)
    if not (gated > 0.0).any():
        raise EmptyFocusError("mask removes all focus weight")
    return FocusMap(gated)


def gaussian_mixture_focus(width: int, height: int, components) -> FocusMap:
    """Convex combination of isotropic Gaussians, normalised to sum 1.

    ``components`` is a sequence of ``(weight, (x, y), sigma)`` with
    positive weights summing to 1.
    """
    comps = list(components)
    if not comps:
        raise InputError("need at least one mixture component")
    weight_sum = 0.0
    for a, _, sigma in comps:
        if a <= 0.0:
            raise InputError("mixture weights must be positive")
        if sigma <= 0.0:
            raise InputError("mixture sigmas must be positive")
        weight_sum += a
    if abs(weight_sum - 1.0) > 1e-9:
        raise InputError(f"mixture weights sum to {weight_sum!r}, not 1")
    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)[:, None]
    field = np.zeros((height, width))
    for a, (cx, cy), sigma in comps:
        d2 = (xs - cx) ** 2 + (ys - cy) ** 2
        field += a * np.exp(-d2 / (2.0 * sigma * sigma))
    return FocusMap(field).normalized()


def spline_focus(curves, width: int, height: int, sigma: float = 3.0) -> FocusMap:
    """Gaussian-blurred rasterization of spline curves, normalised."""
    raster = rasterize_curves(curves, width, height)
    if not (raster > 0.0).any():
        raise EmptyFocusError("all curves fall outside the image")
    return FocusMap(gaussian_convolve(raster, sigma)).normalized()


@dataclass(frozen=True)
class PresetParams:
    """Kernel sizes for the automatic edge/patch pipelines.

    ``threshold=None`` selects the Otsu threshold of the median-filtered
    reference image.
    """

    median_radius: int = 1
    sigma_edge: float = 2.0
    threshold: float | None = None
    close_radius: int = 2
    dilate_radius: int = 4


def edge_map(reference: Image, params: PresetParams) -> Image:
    """Denoised, smoothed gradient-magnitude field of the reference."""
    smooth = median_filter(reference, params.median_radius)
    return gaussian_convolve(gradient_modulus(smooth), params.sigma_edge)


def opaque_patch(reference: Image, params: PresetParams) -> BinaryMask:
    """Closed and dilated mask of the radio-opaque (bright) region."""
    smooth = median_filter(reference, params.median_radius)
    t = params.threshold if params.threshold is not None else otsu_threshold(smooth)
    patch = threshold_mask(smooth, t)
    return morph_dilate(morph_close(patch, params.close_radius), params.dilate_radius)


def preset_restoration_focus(
    reference: Image, params: PresetParams = PresetParams()
) -> FocusMap:
    """Edge focus restricted to the patch around a bright restoration.

    Edges are detected before the patch is applied, so the patch border
    cannot contribute spurious edges.
    """
    edges = edge_map(reference, params)
    patch = opaque_patch(reference, params)
    return mask_multiply(edges, patch).normalized()


def preset_implant_focus(
    reference: Image, params: PresetParams = PresetParams()
) -> FocusMap:
    """Edge focus restricted to the patch covering a bright implant."""
    return preset_restoration_focus(reference, params)


def preset_bone_focus(
    reference: Image, params: PresetParams = PresetParams()
) -> FocusMap:
    """Edge focus on everything except the implant patch.

    The weights are exactly zero on the dilated implant patch, so the
    implant cannot influence the alignment.
    """
    edges = edge_map(reference, params)
    patch = opaque_patch(reference, params)
    return mask_multiply(edges, complement(patch)).normalized()


# ---------------------------------------------------------------------------
# Serialization: a text header "width height sum-normalized" followed by
# row-major decimal weights (repr round-trips doubles exactly), plus an
# 8-bit PGM visualisation with the maximum weight mapped to 255.

def save_focus_map(focus: FocusMap, path) -> None:
    focus = focus.normalized()
    lines = [f"{focus.width} {focus.height} sum-normalized"]
    lines.extend(" ".join(repr(v) for v in row) for row in focus.weights)
    Path(path).write_text("\n".join(lines) + "\n")


def load_focus_map(path) -> FocusMap:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such focus file: {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise InputError(f"{path}: empty focus file")
    header = lines[0].split()
    if len(header) != 3 or header[2] != "sum-normalized":
        raise InputError(f"{path}: bad focus header {lines[0]!r}")
    width, height = int(header[0]), int(header[1])
    rows = [
        np.fromiter((float(tok) for tok in line.split()), dtype=np.float64)
        for line in lines[1 : height + 1]
    ]
    if len(rows) != height or any(row.size != width for row in rows):
        raise InputError(f"{path}: weight grid does not match header dimensions")
    weights = np.vstack(rows)
    return FocusMap(weights)


def save_focus_pgm(focus: FocusMap, path) -> None:
    peak = focus.weights.max()
    save = to_u8(focus.weights / peak)
    header = f"P5\n{focus.width} {focus.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + save.tobytes())
