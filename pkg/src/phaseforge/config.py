"""Scenario configuration (single JSON document, unknown keys rejected)."""

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import device, geometry
from .errors import ConfigError, PhaseforgeError

_SCHEMA = {
    "projector": ({"origin", "axis", "h_fov_deg", "n_cols"}, set()),
    "surface": ({"vertices"}, set()),
    "pslm": (
        {"pitch_m", "wavelength_m"},
        {"phase_depth_rad", "levels", "gamma", "block_size", "ref_plane_distance_m"},
    ),
    "compile": (set(), {"rows", "wrap_mode", "sweep_steps", "sweep_max_delta_drive"}),
}


@dataclass(frozen=True)
class CompileOptions:
    rows: int = 1
    wrap_mode: str = "wrap"
    sweep_steps: int = 33
    sweep_max_delta_drive: float = None


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    projector: geometry.ProjectorModel
    surface: geometry.SurfaceProfile
    pslm: device.PslmModel
    compile: CompileOptions
    document: dict

    def sweep(self):
        return device.default_sweep(self.pslm, self.compile.sweep_steps, self.compile.sweep_max_delta_drive)

    @property
    def slm_width(self):
        return self.projector.n_cols * self.pslm.block_size


def _number(section, key, value, integer=False):
    field = f"{section}.{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(field, "must be finite")
    if integer:
        if int(value) != value:
            raise ConfigError(field, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _vector(section, key, value):
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"{section}.{key}", f"expected [x, z], got {value!r}")
    return [_number(section, key, v) for v in value]


def _sections(doc):
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be a JSON object")
    unknown = set(doc) - set(_SCHEMA)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    out = {}
    for name, (required, optional) in _SCHEMA.items():
        sec = doc.get(name, {} if not required else None)
        if sec is None:
            raise ConfigError(name, "missing section")
        if not isinstance(sec, dict):
            raise ConfigError(name, "must be a JSON object")
        extra = set(sec) - required - optional
        if extra:
            raise ConfigError(f"{name}.{sorted(extra)[0]}", "unknown key")
        missing = required - set(sec)
        if missing:
            raise ConfigError(f"{name}.{sorted(missing)[0]}", "missing required key")
        out[name] = sec
    return out


def parse_config(doc):
    """Validate ``doc`` and build the models; every failure is a ``ConfigError``."""
    sec = _sections(doc)
    p = sec["projector"]
    proj = geometry.ProjectorModel(
        origin=_vector("projector", "origin", p["origin"]),
        axis=_vector("projector", "axis", p["axis"]),
        h_fov=math.radians(_number("projector", "h_fov_deg", p["h_fov_deg"])),
        n_cols=_number("projector", "n_cols", p["n_cols"], integer=True),
    )

    verts = sec["surface"]["vertices"]
    if not isinstance(verts, list):
        raise ConfigError("surface.vertices", "expected a list of [x, z] pairs")
    verts = [_vector("surface", "vertices", v) for v in verts]
    try:
        surface = geometry.SurfaceProfile(np.array(verts, dtype=np.float64) if verts else np.zeros((0, 2)))
    except PhaseforgeError as exc:
        raise ConfigError("surface.vertices", str(exc)) from None

    s = sec["pslm"]
    kw = {
        "pitch": _number("pslm", "pitch_m", s["pitch_m"]),
        "wavelength": _number("pslm", "wavelength_m", s["wavelength_m"]),
    }
    for key, name, integer in (
        ("phase_depth_rad", "phase_depth", False),
        ("levels", "levels", True),
        ("gamma", "gamma", False),
        ("block_size", "block_size", True),
        ("ref_plane_distance_m", "ref_plane_distance", False),
    ):
        if key in s:
            kw[name] = _number("pslm", key, s[key], integer=integer)
    pslm = device.PslmModel(**kw)

    c = sec["compile"]
    opts = CompileOptions(
        rows=_number("compile", "rows", c.get("rows", 1), integer=True),
        wrap_mode=c.get("wrap_mode", "wrap"),
        sweep_steps=_number("compile", "sweep_steps", c.get("sweep_steps", 33), integer=True),
        sweep_max_delta_drive=(
            None
            if c.get("sweep_max_delta_drive") is None
            else _number("compile", "sweep_max_delta_drive", c["sweep_max_delta_drive"])
        ),
    )
    if opts.rows < 1:
        raise ConfigError("compile.rows", "must be >= 1")
    if opts.wrap_mode not in ("wrap", "strict"):
        raise ConfigError("compile.wrap_mode", f"must be 'wrap' or 'strict', got {opts.wrap_mode!r}")

    try:
        geometry.validate_coverage(proj, surface)
    except PhaseforgeError as exc:
        raise ConfigError("surface.vertices", f"projector fan does not map onto the surface: {exc}") from None

    cfg = ScenarioConfig(projector=proj, surface=surface, pslm=pslm, compile=opts, document=copy.deepcopy(doc))
    cfg.sweep()  # validates sweep_steps / sweep_max_delta_drive
    return cfg


def load_config(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("config", f"{path}: no such file") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("config", f"{path}: invalid JSON: {exc}") from None
    return parse_config(doc)


_PSLM = {
    "pitch_m": 3.74e-6,
    "wavelength_m": 532e-9,
    "phase_depth_rad": 2.0 * math.pi,
    "levels": 256,
    "gamma": 1.0,
    "block_size": 8,
    "ref_plane_distance_m": 1.0,
}

# Geometry tuned so the required deflection stays within 80 % of the Nyquist
# limit and 8-bit quantisation keeps the worst shift error under 5 % of a pixel.
DEMOS = {
    "bent-surface": {
        "projector": {"origin": [0.0, 0.0], "axis": [0.0, 1.0], "h_fov_deg": 42.0, "n_cols": 240},
        "surface": {"vertices": [[-1.0, 1.364], [0.0, 1.0], [1.0, 1.0]]},
        "pslm": dict(_PSLM),
        "compile": {"rows": 16, "wrap_mode": "wrap", "sweep_steps": 33, "sweep_max_delta_drive": 102.0},
    },
    "flat": {
        "projector": {"origin": [0.0, 0.0], "axis": [0.0, 1.0], "h_fov_deg": 42.0, "n_cols": 240},
        "surface": {"vertices": [[-1.0, 1.0], [1.0, 1.0]]},
        "pslm": dict(_PSLM),
        "compile": {"rows": 16, "wrap_mode": "wrap", "sweep_steps": 33},
    },
}


def demo_document(name):
    if name not in DEMOS:
        raise ConfigError("demo", f"unknown demo {name!r}; choose from {sorted(DEMOS)}")
    return copy.deepcopy(DEMOS[name])
