"""Clamped cubic B-spline curves and their rasterization.

Curves are defined by ordered control points in reference pixel
coordinates.  The clamped uniform knot vector makes the curve
interpolate its first and last control point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline

from .errors import InputError

__all__ = [
    "SplineCurve",
    "evaluate_curve",
    "rasterize_curves",
    "read_points",
    "read_curves",
]

_DEGREE = 3


@dataclass(frozen=True)
class SplineCurve:
    """Cubic B-spline with clamped uniform knots; needs >= 4 control points."""

    control_points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.control_points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise InputError("spline needs an (n >= 4, 2) control-point array")
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        object.__setattr__(self, "control_points", pts)

    @property
    def knots(self) -> np.ndarray:
        n = self.control_points.shape[0]
        interior = np.linspace(0.0, 1.0, n - _DEGREE + 1)[1:-1]
        return np.concatenate(
            [np.zeros(_DEGREE + 1), interior, np.ones(_DEGREE + 1)]
        )


def evaluate_curve(curve: SplineCurve, params: np.ndarray) -> np.ndarray:
    """Curve points at parameter values in [0, 1], shape (len(params), 2)."""
    spl = BSpline(curve.knots, curve.control_points, _DEGREE, extrapolate=False)
    return np.asarray(spl(np.clip(params, 0.0, 1.0)))


def sample_curve(curve: SplineCurve, max_step: float = 0.4) -> np.ndarray:
    """Dense uniform-parameter sampling with consecutive points < 0.5 px apart.

    Doubles the sample count until the largest consecutive gap is below
    ``max_step``.
    """
    m = 8 * curve.control_points.shape[0]
    while True:
        pts = evaluate_curve(curve, np.linspace(0.0, 1.0, m))
        gaps = np.hypot(*(np.diff(pts, axis=0).T))
        if gaps.size == 0 or gaps.max() < max_step:
            return pts
        m *= 2
        if m > 1 << 22:
            raise InputError("curve too long to rasterize")


def rasterize_curves(curves, width: int, height: int) -> np.ndarray:
    """Mark the pixels traversed by the curves on a zero field."""
    raster = np.zeros((height, width), dtype=np.float64)
    for curve in curves:
        pts = sample_curve(curve)
        ix = np.floor(pts[:, 0] + 0.5).astype(np.int64)
        iy = np.floor(pts[:, 1] + 0.5).astype(np.int64)
        ok = (ix >= 0) & (ix < width) & (iy >= 0) & (iy < height)
        raster[iy[ok], ix[ok]] = 1.0
    return raster


# ---------------------------------------------------------------------------
# Point tables: one "x,y" pair per line, '#' comments allowed.  A JSON
# document may hold several named curves: {"curves": {"name": [[x, y], ...]}}.

def read_points(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such points file: {path}")
    points = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise InputError(f"{path}:{lineno}: expected 'x,y'")
        points.append((float(parts[0]), float(parts[1])))
    if not points:
        raise InputError(f"{path}: no points found")
    return np.asarray(points, dtype=np.float64)


def read_curves(path) -> list[SplineCurve]:
    """Load curves from an 'x,y' table (one curve) or a JSON document."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        if not path.is_file():
            raise InputError(f"no such curves file: {path}")
        doc = json.loads(path.read_text())
        groups = doc.get("curves", doc) if isinstance(doc, dict) else doc
        if isinstance(groups, dict):
            items = [groups[name] for name in sorted(groups)]
        else:
            items = list(groups)
        if not items:
            raise InputError(f"{path}: no curves in document")
        return [SplineCurve(np.asarray(pts, dtype=np.float64)) for pts in items]
    return [SplineCurve(read_points(path))]
