"""Planar affine transforms: construction, composition, landmark fitting.

A transform maps test-image pixel coordinates into reference-image
coordinates: ``(x, y) -> (a11 x + a12 y + tx, a21 x + a22 y + ty)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateLandmarksError, InputError, InvalidTransformError

__all__ = [
    "AffineTransform",
    "identity",
    "translation",
    "parameterize",
    "deparameterize",
    "fit_affine_least_squares",
    "save_transform",
    "load_transform",
]

_DET_EPS = 1e-12
_PARAM_NAMES = ("a11", "a12", "a21", "a22", "tx", "ty")


@dataclass(frozen=True)
class AffineTransform:
    """Invertible 6-parameter affine map.

    Matrix entries are dimensionless, translations are in pixels.  The
    determinant must exceed ``1e-12`` in magnitude.
    """

    a11: float
    a12: float
    a21: float
    a22: float
    tx: float
    ty: float

    def __post_init__(self):
        for name in _PARAM_NAMES:
            v = getattr(self, name)
            if not np.isfinite(v):
                raise InvalidTransformError(f"non-finite parameter {name}={v!r}")
            object.__setattr__(self, name, float(v))
        if abs(self.det) <= _DET_EPS:
            raise InvalidTransformError(f"singular transform (det={self.det!r})")

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (
            self.a11 * x + self.a12 * y + self.tx,
            self.a21 * x + self.a22 * y + self.ty,
        )

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        """Apply to an ``(n, 2)`` array of points."""
        pts = np.asarray(points, dtype=np.float64)
        a = np.array([[self.a11, self.a12], [self.a21, self.a22]])
        return pts @ a.T + np.array([self.tx, self.ty])

    def compose(self, other: "AffineTransform") -> "AffineTransform":
        """Transform applying ``other`` first, then ``self``."""
        a11 = self.a11 * other.a11 + self.a12 * other.a21
        a12 = self.a11 * other.a12 + self.a12 * other.a22
        a21 = self.a21 * other.a11 + self.a22 * other.a21
        a22 = self.a21 * other.a12 + self.a22 * other.a22
        tx, ty = self.apply(other.tx, other.ty)
        return AffineTransform(a11, a12, a21, a22, tx, ty)

    def inverse(self) -> "AffineTransform":
        d = self.det
        i11, i12 = self.a22 / d, -self.a12 / d
        i21, i22 = -self.a21 / d, self.a11 / d
        return AffineTransform(
            i11, i12, i21, i22,
            -(i11 * self.tx + i12 * self.ty),
            -(i21 * self.tx + i22 * self.ty),
        )


def identity() -> AffineTransform:
    return AffineTransform(1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def translation(tx: float, ty: float) -> AffineTransform:
    return AffineTransform(1.0, 0.0, 0.0, 1.0, tx, ty)


def parameterize(t: AffineTransform) -> np.ndarray:
    """Parameter vector in the order (a11, a12, a21, a22, tx, ty)."""
    return np.array([t.a11, t.a12, t.a21, t.a22, t.tx, t.ty])


def deparameterize(v) -> AffineTransform:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (6,):
        raise InvalidTransformError(f"expected 6 parameters, got shape {v.shape}")
    return AffineTransform(*(float(c) for c in v))


def fit_affine_least_squares(ref_points, test_points) -> AffineTransform:
    """Least-squares affine mapping ``test_points`` onto ``ref_points``.

    Minimises ``sum_i |T(test_i) - ref_i|^2``.  With three non-collinear
    pairs the fit is the exact interpolant.
    """
    ref = np.asarray(ref_points, dtype=np.float64)
    tst = np.asarray(test_points, dtype=np.float64)
    if ref.ndim != 2 or ref.shape[1] != 2 or ref.shape != tst.shape:
        raise DegenerateLandmarksError("point lists must both be (n, 2)")
    n = ref.shape[0]
    if n < 3:
        raise DegenerateLandmarksError(f"need at least 3 point pairs, got {n}")
    design = np.column_stack([tst, np.ones(n)])
    sol, _, rank, _ = np.linalg.lstsq(design, ref, rcond=None)
    if rank < 3:
        raise DegenerateLandmarksError("landmark points are collinear or coincident")
    (a11, a21), (a12, a22), (tx, ty) = sol
    try:
        return AffineTransform(a11, a12, a21, a22, tx, ty)
    except InvalidTransformError as exc:
        raise DegenerateLandmarksError(f"fitted transform is singular: {exc}") from exc


# ---------------------------------------------------------------------------
# Serialization: a bare 6-field text record, or a JSON document with the
# field names spelled out.  repr() round-trips doubles exactly.

def save_transform(t: AffineTransform, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = {name: getattr(t, name) for name in _PARAM_NAMES}
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        path.write_text(" ".join(repr(getattr(t, name)) for name in _PARAM_NAMES) + "\n")


def load_transform(path) -> AffineTransform:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such transform file: {path}")
    text = path.read_text().strip()
    if text.startswith("{"):
        doc = json.loads(text)
        missing = [name for name in _PARAM_NAMES if name not in doc]
        if missing:
            raise InputError(f"{path}: transform document missing fields {missing}")
        return AffineTransform(*(float(doc[name]) for name in _PARAM_NAMES))
    fields = text.split()
    if len(fields) != 6:
        raise InputError(f"{path}: expected 6 whitespace-separated fields")
    return AffineTransform(*(float(f) for f in fields))
