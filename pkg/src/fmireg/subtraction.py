"""Digital subtraction of an aligned image pair."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import warp_sample
from .errors import EmptyOverlapError
from .image import Image
from .transform import AffineTransform, parameterize

__all__ = ["SubtractionImage", "subtract", "encode_subtraction_u8", "save_subtraction"]


@dataclass(frozen=True)
class SubtractionImage:
    """Signed difference field (reference sampled at T(pixel) minus test).

    ``values`` lie in [-1, 1] and are meaningful only where ``mask`` is
    true, i.e. where the mapped sample falls inside the reference domain.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        mask = np.ascontiguousarray(self.mask, dtype=bool)
        vals.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mask", mask)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def overlap_fraction(self) -> float:
        return float(self.mask.sum()) / self.mask.size


def subtract(reference: Image, test: Image, t: AffineTransform) -> SubtractionImage:
    """Difference image over the overlap of ``reference`` and ``T(test)``."""
    vals, inside = warp_sample(
        reference.pixels, parameterize(t), test.width, test.height
    )
    if not inside.any():
        raise EmptyOverlapError("transformed test image misses the reference domain")
    diff = np.where(inside, np.clip(vals - test.pixels, -1.0, 1.0), 0.0)
    return SubtractionImage(values=diff, mask=inside)


def encode_subtraction_u8(sub: SubtractionImage) -> np.ndarray:
    """8-bit rendering: difference 0 -> 128, +-1 -> 255/0, masked-out -> 0.

    The exact rule is ``clip(floor((d + 1) * 127.5 + 0.5), 0, 255)``;
    floor(x + 0.5) keeps the rounding independent of banker's-rounding
    behaviour.
    """
    b = np.floor((sub.values + 1.0) * 127.5 + 0.5)
    b = np.clip(b, 0.0, 255.0).astype(np.uint8)
    b[~sub.mask] = 0
    return b


def save_subtraction(sub: SubtractionImage, path) -> None:
    """Write the 8-bit rendering as PGM or PNG depending on the suffix."""
    path = Path(path)
    b = encode_subtraction_u8(sub)
    if path.suffix.lower() == ".png":
        from PIL import Image as PILImage

        PILImage.fromarray(b, mode="L").save(path, format="PNG")
    else:
        header = f"P5\n{b.shape[1]} {b.shape[0]}\n255\n".encode("ascii")
        path.write_bytes(header + b.tobytes())
