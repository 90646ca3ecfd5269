"""Pipeline configuration: JSON document merged with CLI flags.

The config file is a JSON object with optional nested sections
``focus``, ``points``, ``search`` and ``output``; every key has a
mirroring CLI flag and flags override file values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import InputError

__all__ = ["PipelineConfig", "PRESETS", "load_config"]

PRESETS = ("restoration", "implant", "bone", "cephalo", "gaussians", "uniform", "file")

# config-file key -> (section, attribute)
_KEYMAP = {
    ("reference",): "reference",
    ("test",): "test",
    ("preset",): "preset",
    ("criterion",): "criterion",
    ("bins",): "bins",
    ("seed",): "seed",
    ("transform",): "transform",
    ("focus", "file"): "focus_file",
    ("focus", "median_radius"): "median_radius",
    ("focus", "sigma_edge"): "sigma_edge",
    ("focus", "threshold"): "threshold",
    ("focus", "close_radius"): "close_radius",
    ("focus", "dilate_radius"): "dilate_radius",
    ("focus", "sigma_spline"): "sigma_spline",
    ("focus", "curves"): "curves",
    ("focus", "components"): "components",
    ("points", "reference"): "points_reference",
    ("points", "test"): "points_test",
    ("search", "box_matrix"): "box_matrix",
    ("search", "box_translation"): "box_translation",
    ("search", "restarts"): "restarts",
    ("search", "max_evals"): "max_evals",
    ("search", "tolerance"): "tolerance",
    ("search", "levels"): "levels",
    ("output", "transform"): "out_transform",
    ("output", "focus"): "out_focus",
    ("output", "subtraction"): "out_subtraction",
    ("output", "trace"): "out_trace",
}


@dataclass
class PipelineConfig:
    reference: str | None = None
    test: str | None = None
    preset: str = "uniform"
    criterion: str = "NMI"
    bins: int = 64
    seed: int = 0
    transform: str | None = None

    focus_file: str | None = None
    median_radius: int = 1
    sigma_edge: float = 2.0
    threshold: float | None = None
    close_radius: int = 2
    dilate_radius: int = 4
    sigma_spline: float = 3.0
    curves: list = field(default_factory=list)
    components: list = field(default_factory=list)

    points_reference: str | None = None
    points_test: str | None = None

    box_matrix: float = 0.15
    box_translation: float = 20.0
    restarts: int = 3
    max_evals: int = 2000
    tolerance: float = 1e-6
    levels: int = 1

    out_transform: str | None = None
    out_focus: str | None = None
    out_subtraction: str | None = None
    out_trace: str | None = None

    def validate(self) -> "PipelineConfig":
        if self.preset not in PRESETS:
            raise InputError(f"unknown preset {self.preset!r}; expected one of {PRESETS}")
        if self.bins < 2:
            raise InputError("bins must be >= 2")
        return self


def load_config(path) -> dict:
    """Flatten a JSON config document into PipelineConfig attribute names."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such config file: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: config must be a JSON object")

    known = {f.name for f in fields(PipelineConfig)}
    flat: dict = {}

    def walk(prefix: tuple, node: dict):
        for key, value in node.items():
            full = prefix + (key,)
            if full in _KEYMAP:
                flat[_KEYMAP[full]] = value
            elif isinstance(value, dict) and not prefix:
                walk(full, value)
            elif key in known and not prefix:
                flat[key] = value
            else:
                raise InputError(f"{path}: unknown config key {'.'.join(full)!r}")

    walk((), doc)
    return flat


def merge_config(file_values: dict, flag_values: dict) -> PipelineConfig:
    """Defaults, overridden by config-file values, overridden by flags."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(merged) - known
    if unknown:
        raise InputError(f"unknown configuration keys: {sorted(unknown)}")
    return PipelineConfig(**merged).validate()
