"""Criterion maximisation over affine transforms in a bounded box.

The search is a deterministic derivative-free direct search: a
Nelder-Mead simplex started from the supplied initial transform plus a
configurable number of restarts at Halton points inside the box.  Trial
points are clamped into the box; trials with empty overlap, a singular
matrix, a degenerate histogram, or less than 1% overlap are treated as
invalid (objective minus infinity) rather than as errors, so the search
can leave bad regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateHistogramError,
    EmptyOverlapError,
    InputError,
    InternalError,
    RegistrationFailedError,
)
from .focus import FocusMap
from .image import BinningScheme, Image
from .metrics import CRITERIA, accumulate_joint, criteria_from_histogram
from .transform import AffineTransform, deparameterize, identity, parameterize

__all__ = [
    "SearchSpec",
    "RegistrationResult",
    "register",
    "multiresolution_register",
    "halton_sequence",
    "downsample2x_image",
    "downsample2x_focus",
    "save_trace",
]

_HALTON_BASES = (2, 3, 5, 7, 11, 13)
_MIN_OVERLAP_SHARE = 0.01
_SIMPLEX_EDGE_SHARE = 0.1
_SIMPLEX_EDGE_FLOOR = 1e-3
# standard Nelder-Mead coefficients
_ALPHA, _GAMMA, _RHO, _SIGMA = 1.0, 2.0, 0.5, 0.5


def _default_half_widths() -> np.ndarray:
    return np.array([0.15, 0.15, 0.15, 0.15, 20.0, 20.0])


@dataclass(frozen=True)
class SearchSpec:
    """Search region and stopping rules for one registration run.

    ``half_widths`` bound each parameter symmetrically around the initial
    transform, ordered (a11, a12, a21, a22, tx, ty); matrix entries are
    dimensionless, translations in pixels.  ``max_evals`` caps the total
    number of criterion evaluations across the initial run and all
    restarts.
    """

    initial: AffineTransform = field(default_factory=identity)
    half_widths: np.ndarray = field(default_factory=_default_half_widths)
    criterion: str = "NMI"
    restarts: int = 3
    max_evals: int = 2000
    tolerance: float = 1e-6

    def __post_init__(self):
        hw = np.asarray(self.half_widths, dtype=np.float64)
        if hw.shape != (6,):
            raise InputError("half_widths must have 6 entries")
        if np.any(hw < 0.0) or not np.all(np.isfinite(hw)):
            raise InputError("half_widths must be finite and >= 0")
        hw = np.ascontiguousarray(hw)
        hw.flags.writeable = False
        object.__setattr__(self, "half_widths", hw)
        if self.criterion.upper() not in CRITERIA:
            raise InputError(f"unknown criterion {self.criterion!r}")
        object.__setattr__(self, "criterion", self.criterion.upper())
        if self.restarts < 0:
            raise InputError("restarts must be >= 0")
        if self.max_evals < 1:
            raise InputError("max_evals must be >= 1")
        if not (self.tolerance > 0.0):
            raise InputError("tolerance must be positive")


@dataclass(frozen=True)
class RegistrationResult:
    """Best transform found, its criterion value and the evaluation trace."""

    best: AffineTransform
    best_value: float
    evaluations: int
    trace: tuple
    overlap_fraction: float


def halton_sequence(index: int, dims: int = 6) -> np.ndarray:
    """Point ``index`` (1-based) of the Halton low-discrepancy sequence."""
    point = np.empty(dims)
    for d in range(dims):
        base = _HALTON_BASES[d]
        f, x, i = 1.0, 0.0, index
        while i > 0:
            f /= base
            x += f * (i % base)
            i //= base
        point[d] = x
    return point


class _OutOfBudget(Exception):
    pass


def _nelder_mead(evaluate, start, lo, hi, steps, tolerance):
    """Maximise ``evaluate`` from ``start``; candidates clamped into the box.

    Stops when a full iteration neither improves the best value by more
    than ``tolerance`` nor leaves a value spread above it, or when the
    evaluation budget runs out (signalled by ``_OutOfBudget``).
    """
    n = start.size
    verts = [np.clip(start, lo, hi)]
    for i in range(n):
        v = start.copy()
        v[i] = start[i] + steps[i]
        if v[i] > hi[i]:
            v[i] = start[i] - steps[i]
        verts.append(np.clip(v, lo, hi))
    try:
        vals = [evaluate(v) for v in verts]
        while True:
            order = np.argsort([-v for v in vals], kind="stable")
            verts = [verts[i] for i in order]
            vals = [vals[i] for i in order]
            prev_best = vals[0]

            centroid = np.mean(verts[:-1], axis=0)
            worst = verts[-1]
            reflected = np.clip(centroid + _ALPHA * (centroid - worst), lo, hi)
            f_r = evaluate(reflected)
            if f_r > vals[0]:
                expanded = np.clip(centroid + _GAMMA * (centroid - worst), lo, hi)
                f_e = evaluate(expanded)
                if f_e > f_r:
                    verts[-1], vals[-1] = expanded, f_e
                else:
                    verts[-1], vals[-1] = reflected, f_r
            elif f_r > vals[-2]:
                verts[-1], vals[-1] = reflected, f_r
            else:
                if f_r > vals[-1]:
                    contracted = np.clip(centroid + _RHO * (centroid - worst), lo, hi)
                    f_c = evaluate(contracted)
                    accept = f_c >= f_r
                else:
                    contracted = np.clip(centroid - _RHO * (centroid - worst), lo, hi)
                    f_c = evaluate(contracted)
                    accept = f_c > vals[-1]
                if accept:
                    verts[-1], vals[-1] = contracted, f_c
                else:
                    best = verts[0]
                    for i in range(1, n + 1):
                        verts[i] = np.clip(best + _SIGMA * (verts[i] - best), lo, hi)
                        vals[i] = evaluate(verts[i])

            new_best = max(vals)
            if all(math.isfinite(v) for v in vals):
                spread = new_best - min(vals)
                if new_best - prev_best < tolerance and spread < tolerance:
                    return
    except _OutOfBudget:
        return


def register(
    reference: Image,
    test: Image,
    focus: FocusMap | None,
    spec: SearchSpec,
    scheme: BinningScheme,
) -> RegistrationResult:
    """Maximise the selected criterion over the search box.

    Returns the best evaluated transform; deterministic for identical
    inputs.  Raises ``RegistrationFailedError`` when every trial point is
    invalid.
    """
    center = parameterize(spec.initial)
    lo = center - spec.half_widths
    hi = center + spec.half_widths
    steps = np.maximum(_SIMPLEX_EDGE_SHARE * spec.half_widths, _SIMPLEX_EDGE_FLOOR)
    min_overlap = max(1, math.ceil(_MIN_OVERLAP_SHARE * test.width * test.height))
    which = spec.criterion

    trace: list[tuple[np.ndarray, float]] = []
    best_params: np.ndarray | None = None
    best_value = -math.inf
    budget = [spec.max_evals]

    def evaluate(v: np.ndarray) -> float:
        nonlocal best_params, best_value
        if budget[0] <= 0:
            raise _OutOfBudget
        budget[0] -= 1
        value = -math.inf
        det = v[0] * v[3] - v[1] * v[2]
        if abs(det) > 1e-12:
            try:
                hist = accumulate_joint(reference, test, deparameterize(v), scheme, focus)
                if hist.overlap_count >= min_overlap:
                    value = criteria_from_histogram(hist).get(which)
            except (EmptyOverlapError, DegenerateHistogramError):
                pass
        if math.isnan(value):
            raise InternalError("criterion evaluated to NaN")
        frozen = v.copy()
        frozen.flags.writeable = False
        trace.append((frozen, value))
        if value > best_value:
            best_params, best_value = frozen, value
        return value

    starts = [np.clip(center, lo, hi)]
    for j in range(1, spec.restarts + 1):
        starts.append(lo + halton_sequence(j) * (hi - lo))
    per_run = math.ceil(spec.max_evals / len(starts))

    for start in starts:
        if budget[0] <= 0:
            break
        run_cap = min(per_run, budget[0])
        outer_remaining = budget[0] - run_cap
        budget[0] = run_cap
        _nelder_mead(evaluate, start, lo, hi, steps, spec.tolerance)
        budget[0] += outer_remaining

    if best_params is None:
        raise RegistrationFailedError("no trial transform produced a valid criterion")

    best = deparameterize(best_params)
    hist = accumulate_joint(reference, test, best, scheme, focus)
    overlap_fraction = hist.overlap_count / (test.width * test.height)
    return RegistrationResult(
        best=best,
        best_value=best_value,
        evaluations=len(trace),
        trace=tuple(trace),
        overlap_fraction=overlap_fraction,
    )


# ---------------------------------------------------------------------------
# Multiresolution search: 2x box-average pyramids, coarse-to-fine.

def downsample2x_image(img: Image) -> Image:
    """Box-average 2x downsample; odd trailing rows/columns are dropped."""
    h2, w2 = img.height // 2, img.width // 2
    if h2 < 1 or w2 < 1:
        raise InputError("image too small to downsample")
    a = img.pixels[: 2 * h2, : 2 * w2]
    out = ((a[0::2, 0::2] + a[0::2, 1::2]) + (a[1::2, 0::2] + a[1::2, 1::2])) / 4.0
    return Image(out)


def downsample2x_focus(focus: FocusMap) -> FocusMap:
    h2, w2 = focus.height // 2, focus.width // 2
    if h2 < 1 or w2 < 1:
        raise InputError("focus too small to downsample")
    a = focus.weights[: 2 * h2, : 2 * w2]
    out = ((a[0::2, 0::2] + a[0::2, 1::2]) + (a[1::2, 0::2] + a[1::2, 1::2])) / 4.0
    return FocusMap(out)


def multiresolution_register(
    reference: Image,
    test: Image,
    focus: FocusMap | None,
    spec: SearchSpec,
    scheme: BinningScheme,
    levels: int = 1,
) -> RegistrationResult:
    """Coarse-to-fine registration over a 2x image pyramid.

    The configured translation half-widths apply at the coarsest level
    and are halved at each finer level; translations of the carried
    estimate are doubled between levels.  With ``levels=1`` this is a
    plain ``register`` call.
    """
    if levels < 1:
        raise InputError("levels must be >= 1")
    if levels == 1:
        return register(reference, test, focus, spec, scheme)

    refs, tests, foci = [reference], [test], [focus]
    for _ in range(levels - 1):
        refs.append(downsample2x_image(refs[-1]))
        tests.append(downsample2x_image(tests[-1]))
        foci.append(None if foci[-1] is None else downsample2x_focus(foci[-1]))

    scale = float(2 ** (levels - 1))
    initial = spec.initial
    current = AffineTransform(
        initial.a11, initial.a12, initial.a21, initial.a22,
        initial.tx / scale, initial.ty / scale,
    )
    result = None
    for level in range(levels - 1, -1, -1):
        hw = spec.half_widths.copy()
        hw[4:] = spec.half_widths[4:] * (0.5 ** (levels - 1 - level))
        level_spec = SearchSpec(
            initial=current,
            half_widths=hw,
            criterion=spec.criterion,
            restarts=spec.restarts,
            max_evals=spec.max_evals,
            tolerance=spec.tolerance,
        )
        result = register(refs[level], tests[level], foci[level], level_spec, scheme)
        if level > 0:
            b = result.best
            current = AffineTransform(b.a11, b.a12, b.a21, b.a22, 2.0 * b.tx, 2.0 * b.ty)
    return result


def save_trace(result: RegistrationResult, path) -> None:
    """Write the evaluation trace as a text table."""
    lines = ["# iter a11 a12 a21 a22 tx ty value"]
    for i, (params, value) in enumerate(result.trace):
        cols = " ".join(repr(p) for p in params)
        lines.append(f"{i} {cols} {value!r}")
    Path(path).write_text("\n".join(lines) + "\n")
