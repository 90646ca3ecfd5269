"""Binary masks and disk-structuring-element morphology.

Pixels outside the image are treated as false by every operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InputError

__all__ = ["BinaryMask", "disk", "morph_dilate", "morph_erode", "morph_close", "complement"]


@dataclass(frozen=True)
class BinaryMask:
    flags: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.flags, dtype=bool)
        if arr.ndim != 2:
            raise InputError("mask must be a 2-D boolean array")
        arr.flags.writeable = False
        object.__setattr__(self, "flags", arr)

    @property
    def height(self) -> int:
        return self.flags.shape[0]

    @property
    def width(self) -> int:
        return self.flags.shape[1]


def disk(radius: int) -> np.ndarray:
    """Boolean disk ``{(dx, dy): dx^2 + dy^2 <= r^2}``."""
    if radius < 1:
        raise InputError("structuring-element radius must be >= 1")
    r = int(radius)
    dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
    return dx * dx + dy * dy <= r * r


def morph_dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    out = ndimage.binary_dilation(mask.flags, structure=disk(radius), border_value=0)
    return BinaryMask(out)


def morph_erode(mask: BinaryMask, radius: int) -> BinaryMask:
    out = ndimage.binary_erosion(mask.flags, structure=disk(radius), border_value=0)
    return BinaryMask(out)


def morph_close(mask: BinaryMask, radius: int) -> BinaryMask:
    return morph_erode(morph_dilate(mask, radius), radius)


def complement(mask: BinaryMask) -> BinaryMask:
    return BinaryMask(~mask.flags)
