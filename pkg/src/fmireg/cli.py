"""Command-line front end.

Subcommands:

* ``focus``     build a focus map from a preset and write it to disk
* ``register``  maximise the criterion, write transform/trace/subtraction
* ``evaluate``  print MI, NMI and ECC for an explicit transform
* ``subtract``  write the difference image for an explicit transform

Exit codes: 0 success, 2 input error, 3 degenerate computation,
4 registration failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import PipelineConfig, load_config, merge_config
from .errors import (
    DegenerateHistogramError,
    DegenerateLandmarksError,
    DomainError,
    EmptyFocusError,
    EmptyOverlapError,
    FmiregError,
    InputError,
    InternalError,
    InvalidDistributionError,
    InvalidTransformError,
    NoThresholdError,
    RegistrationFailedError,
    TooSmallImageError,
)
from .focus import (
    FocusMap,
    PresetParams,
    gaussian_mixture_focus,
    load_focus_map,
    preset_bone_focus,
    preset_implant_focus,
    preset_restoration_focus,
    save_focus_map,
    save_focus_pgm,
    spline_focus,
    uniform_focus,
)
from .image import BinningScheme, Image, load_image
from .metrics import accumulate_joint, criteria_from_histogram
from .register import SearchSpec, multiresolution_register, save_trace
from .splines import read_curves, read_points
from .subtraction import save_subtraction, subtract
from .transform import (
    fit_affine_least_squares,
    identity,
    load_transform,
    save_transform,
)

MAX_PIXELS = 16_000_000

_EXIT_INPUT = 2
_EXIT_DEGENERATE = 3
_EXIT_REGISTRATION = 4

_INPUT_ERRORS = (InputError, InvalidTransformError, DegenerateLandmarksError)
_DEGENERATE_ERRORS = (
    DomainError,
    EmptyOverlapError,
    InvalidDistributionError,
    DegenerateHistogramError,
    EmptyFocusError,
    NoThresholdError,
    TooSmallImageError,
)


def _load_image_checked(path) -> Image:
    img = load_image(path)
    if img.width * img.height > MAX_PIXELS:
        raise InputError(f"{path}: image exceeds the {MAX_PIXELS}-pixel limit")
    return img


def _preset_params(cfg: PipelineConfig) -> PresetParams:
    return PresetParams(
        median_radius=cfg.median_radius,
        sigma_edge=cfg.sigma_edge,
        threshold=cfg.threshold,
        close_radius=cfg.close_radius,
        dilate_radius=cfg.dilate_radius,
    )


def build_focus(cfg: PipelineConfig, reference: Image) -> FocusMap:
    """Focus map for the configured preset (uniform included)."""
    preset = cfg.preset
    if preset == "uniform":
        return uniform_focus(reference.width, reference.height)
    if preset == "file":
        if not cfg.focus_file:
            raise InputError("preset 'file' needs a focus file (--focus)")
        focus = load_focus_map(cfg.focus_file)
        if (focus.height, focus.width) != (reference.height, reference.width):
            raise InputError("focus map dimensions do not match the reference image")
        return focus
    if preset == "gaussians":
        if not cfg.components:
            raise InputError("preset 'gaussians' needs a component list in the config")
        comps = [
            (float(c["weight"]), (float(c["center"][0]), float(c["center"][1])), float(c["sigma"]))
            for c in cfg.components
        ]
        return gaussian_mixture_focus(reference.width, reference.height, comps)
    if preset == "cephalo":
        if not cfg.curves:
            raise InputError("preset 'cephalo' needs curve files (--curves)")
        curves = []
        for path in cfg.curves:
            curves.extend(read_curves(path))
        return spline_focus(curves, reference.width, reference.height, cfg.sigma_spline)
    builder = {
        "restoration": preset_restoration_focus,
        "implant": preset_implant_focus,
        "bone": preset_bone_focus,
    }[preset]
    return builder(reference, _preset_params(cfg))


def _registration_focus(cfg: PipelineConfig, reference: Image) -> FocusMap | None:
    # Unit weights and a constant map give the same criterion; skip the
    # sampling work for the uniform preset.
    if cfg.preset == "uniform":
        return None
    return build_focus(cfg, reference)


def _initial_transform(cfg: PipelineConfig):
    if cfg.points_reference or cfg.points_test:
        if not (cfg.points_reference and cfg.points_test):
            raise InputError("--points needs both a reference and a test file")
        ref_pts = read_points(cfg.points_reference)
        test_pts = read_points(cfg.points_test)
        if ref_pts.shape != test_pts.shape:
            raise InputError("point files must contain the same number of points")
        return fit_affine_least_squares(ref_pts, test_pts)
    return identity()


def _search_spec(cfg: PipelineConfig, initial) -> SearchSpec:
    bm, bt = cfg.box_matrix, cfg.box_translation
    return SearchSpec(
        initial=initial,
        half_widths=np.array([bm, bm, bm, bm, bt, bt]),
        criterion=cfg.criterion,
        restarts=cfg.restarts,
        max_evals=cfg.max_evals,
        tolerance=cfg.tolerance,
    )


def cmd_focus(cfg: PipelineConfig) -> int:
    if not cfg.reference:
        raise InputError("focus: --reference is required")
    reference = _load_image_checked(cfg.reference)
    focus = build_focus(cfg, reference).normalized()
    out = cfg.out_focus or "focus.txt"
    save_focus_map(focus, out)
    save_focus_pgm(focus, str(out) + ".pgm")
    print(f"focus written to {out} (visualisation {out}.pgm)")
    return 0


def cmd_register(cfg: PipelineConfig) -> int:
    if not (cfg.reference and cfg.test):
        raise InputError("register: --reference and --test are required")
    reference = _load_image_checked(cfg.reference)
    test = _load_image_checked(cfg.test)
    scheme = BinningScheme(cfg.bins)
    focus = _registration_focus(cfg, reference)
    spec = _search_spec(cfg, _initial_transform(cfg))
    result = multiresolution_register(reference, test, focus, spec, scheme, cfg.levels)

    out_transform = cfg.out_transform or "transform.txt"
    save_transform(result.best, out_transform)
    out_subtraction = cfg.out_subtraction or "subtraction.pgm"
    save_subtraction(subtract(reference, test, result.best), out_subtraction)
    if cfg.out_trace:
        save_trace(result, cfg.out_trace)
    if cfg.out_focus and focus is not None:
        save_focus_map(focus.normalized(), cfg.out_focus)

    print(f"{spec.criterion} {result.best_value:.12f}")
    print(f"overlap_fraction {result.overlap_fraction:.6f}")
    print(f"evaluations {result.evaluations}")
    print(f"transform written to {out_transform}")
    return 0


def cmd_evaluate(cfg: PipelineConfig) -> int:
    if not (cfg.reference and cfg.test and cfg.transform):
        raise InputError("evaluate: --reference, --test and --transform are required")
    reference = _load_image_checked(cfg.reference)
    test = _load_image_checked(cfg.test)
    t = load_transform(cfg.transform)
    focus = _registration_focus(cfg, reference)
    hist = accumulate_joint(reference, test, t, BinningScheme(cfg.bins), focus)
    values = criteria_from_histogram(hist)
    print(f"MI {values.mi:.12f}")
    print(f"NMI {values.nmi:.12f}")
    print(f"ECC {values.ecc:.12f}")
    return 0


def cmd_subtract(cfg: PipelineConfig) -> int:
    if not (cfg.reference and cfg.test and cfg.transform):
        raise InputError("subtract: --reference, --test and --transform are required")
    reference = _load_image_checked(cfg.reference)
    test = _load_image_checked(cfg.test)
    t = load_transform(cfg.transform)
    out = cfg.out_subtraction or "subtraction.pgm"
    save_subtraction(subtract(reference, test, t), out)
    print(f"subtraction written to {out}")
    return 0


_COMMANDS = {
    "focus": cmd_focus,
    "register": cmd_register,
    "evaluate": cmd_evaluate,
    "subtract": cmd_subtract,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmireg",
        description="Focus-weighted mutual-information registration and subtraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("focus", "build and write a focus map"),
        ("register", "register test onto reference and write outputs"),
        ("evaluate", "print MI/NMI/ECC for an explicit transform"),
        ("subtract", "write the subtraction image for an explicit transform"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--reference", help="reference image (PGM or PNG)")
        p.add_argument("--test", help="test image (PGM or PNG)")
        p.add_argument("--focus", dest="focus_file", help="focus map file (preset 'file')")
        p.add_argument("--preset", choices=cfgmod.PRESETS, help="focus recipe")
        p.add_argument("--criterion", choices=["MI", "NMI", "ECC"], help="criterion (default NMI)")
        p.add_argument("--bins", type=int, help="gray-value bins (default 64)")
        p.add_argument("--median-radius", type=int, dest="median_radius")
        p.add_argument("--sigma-edge", type=float, dest="sigma_edge")
        p.add_argument("--sigma-spline", type=float, dest="sigma_spline")
        p.add_argument("--close-radius", type=int, dest="close_radius")
        p.add_argument("--dilate-radius", type=int, dest="dilate_radius")
        p.add_argument("--threshold", type=float, help="manual patch threshold (default Otsu)")
        p.add_argument(
            "--points",
            nargs=2,
            metavar=("REF_PTS", "TEST_PTS"),
            help="landmark tables for the initial guess",
        )
        p.add_argument("--curves", nargs="+", help="curve files (preset 'cephalo')")
        p.add_argument("--transform", help="transform file (evaluate/subtract)")
        p.add_argument("--box-matrix", type=float, dest="box_matrix")
        p.add_argument("--box-translation", type=float, dest="box_translation")
        p.add_argument("--levels", type=int, help="pyramid levels (default 1)")
        p.add_argument("--seed", type=int, help="reserved; the search is deterministic")
        p.add_argument("--out-transform", dest="out_transform")
        p.add_argument("--out-focus", dest="out_focus")
        p.add_argument("--out-subtraction", dest="out_subtraction")
        p.add_argument("--out-trace", dest="out_trace")
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    file_values = load_config(args.config) if args.config else {}
    flag_values = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config", "points")
    }
    if args.points:
        flag_values["points_reference"], flag_values["points_test"] = args.points
    return merge_config(file_values, flag_values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](cfg)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except _DEGENERATE_ERRORS as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return _EXIT_DEGENERATE
    except RegistrationFailedError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return _EXIT_REGISTRATION
    except (InternalError, FmiregError) as exc:
        print(f"error: {getattr(exc, 'name', 'error')}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return _EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
