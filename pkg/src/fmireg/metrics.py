"""Joint histograms, Shannon entropy and the registration criteria.

The criteria are computed from a weighted joint histogram of gray-bin
pairs over the image overlap:

* ``MI``  = H(ref) + H(test) - H(joint)
* ``NMI`` = (H(ref) + H(test)) / H(joint)      (2 for identical aligned images)
* ``ECC`` = 2 MI / (H(ref) + H(test))          (in [0, 1])

With a constant focus field every pixel contributes equally and the
focused criteria coincide with the plain ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (
    DegenerateHistogramError,
    EmptyOverlapError,
    InputError,
    InvalidDistributionError,
)
from .image import BinningScheme, Image
from .transform import AffineTransform

__all__ = [
    "CRITERIA",
    "JointHistogram",
    "CriterionValues",
    "shannon_entropy",
    "accumulate_joint",
    "criteria_from_histogram",
    "evaluate_criterion",
    "save_histogram_text",
]

CRITERIA = ("MI", "NMI", "ECC")


def shannon_entropy(p) -> float:
    """Shannon entropy ``-sum p_i ln p_i`` of a finite distribution, in nats.

    Zero entries contribute nothing (``0 ln 0 = 0``).  The nonzero terms
    are summed in sorted order, which makes the result exactly invariant
    under permutation of the input.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.size == 0:
        raise InvalidDistributionError("empty distribution")
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise InvalidDistributionError("probabilities must be finite and >= 0")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
    nz = np.sort(p[p > 0.0])
    return float(-(nz * np.log(nz)).sum()) + 0.0


@dataclass(frozen=True)
class JointHistogram:
    """K x K grid of gray-pair masses with marginals.

    Rows index the reference-image bin, columns the test-image bin.
    ``mass / total`` is the joint probability of the pair.
    """

    bins: int
    mass: np.ndarray
    overlap_count: int

    def __post_init__(self):
        arr = np.ascontiguousarray(self.mass, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "mass", arr)

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    @property
    def row_marginal(self) -> np.ndarray:
        """Marginal masses linked to the reference image."""
        return self.mass.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        """Marginal masses linked to the test image."""
        return self.mass.sum(axis=0)


def accumulate_joint(
    reference: Image,
    test: Image,
    t: AffineTransform,
    scheme: BinningScheme,
    focus=None,
) -> JointHistogram:
    """Accumulate the (optionally focus-weighted) joint histogram.

    Every test pixel whose mapped location ``T(m, n)`` falls inside the
    reference domain contributes to the cell
    ``(bin(ref sampled at T(m, n)), bin(test(m, n)))``.  The contribution
    is 1, or the focus field bilinearly sampled at ``T(m, n)`` when a
    focus is given.

    Raises ``EmptyOverlapError`` when no pixel lands inside the reference
    domain, or when the focus vanishes on the entire overlap.
    """
    weights = None
    if focus is not None:
        weights = np.ascontiguousarray(focus.weights, dtype=np.float64)
        if weights.shape != reference.pixels.shape:
            raise InputError("focus dimensions must match the reference image")
    mass, overlap = _kernels.accumulate(
        reference.pixels, test.pixels,
        t.a11, t.a12, t.a21, t.a22, t.tx, t.ty,
        scheme.bins, weights,
    )
    if overlap == 0:
        raise EmptyOverlapError("transformed test image misses the reference domain")
    hist = JointHistogram(bins=scheme.bins, mass=mass, overlap_count=overlap)
    if hist.total <= 0.0:
        raise EmptyOverlapError("focus weights vanish on the entire overlap")
    return hist


@dataclass(frozen=True)
class CriterionValues:
    """Entropies (nats) and the three criteria for one histogram."""

    h_ref: float
    h_test: float
    h_joint: float
    mi: float
    nmi: float
    ecc: float

    def get(self, which: str) -> float:
        which = which.upper()
        if which not in CRITERIA:
            raise InputError(f"unknown criterion {which!r}; expected one of {CRITERIA}")
        return getattr(self, which.lower())


def criteria_from_histogram(hist: JointHistogram) -> CriterionValues:
    """Entropies and MI/NMI/ECC of a joint histogram.

    A histogram with a single occupied cell has zero joint entropy and no
    meaningful normalised value; it is reported as degenerate.
    """
    total = hist.total
    if total <= 0.0:
        raise EmptyOverlapError("histogram carries no mass")
    joint = hist.mass / total
    h_joint = shannon_entropy(joint)
    if h_joint == 0.0:
        raise DegenerateHistogramError(
            "single occupied histogram cell (mi=0); criterion undefined"
        )
    h_ref = shannon_entropy(hist.row_marginal / total)
    h_test = shannon_entropy(hist.col_marginal / total)
    mi = h_ref + h_test - h_joint
    return CriterionValues(
        h_ref=h_ref,
        h_test=h_test,
        h_joint=h_joint,
        mi=mi,
        nmi=(h_ref + h_test) / h_joint,
        ecc=2.0 * mi / (h_ref + h_test),
    )


def evaluate_criterion(
    reference: Image,
    test: Image,
    t: AffineTransform,
    scheme: BinningScheme,
    focus=None,
    which: str = "NMI",
) -> float:
    """Selected criterion of the pair under transform ``t``."""
    hist = accumulate_joint(reference, test, t, scheme, focus)
    return criteria_from_histogram(hist).get(which)


def save_histogram_text(hist: JointHistogram, path) -> None:
    """Write the mass grid as a text matrix, one reference bin per row."""
    lines = [" ".join(repr(v) for v in row) for row in hist.mass]
    Path(path).write_text("\n".join(lines) + "\n")
