"""Target plan -> device-ready phase image.

Each projector pixel owns a block of ``block_size`` SLM pixels.  The LUT turns
the block's required shift into a ramp slope, the slopes are joined into a
C1 phase profile (piecewise-linear derivative through the block centres,
integrated in closed form), and the profile is wrapped and quantised.
"""

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import density, device, kernels
from .errors import DeflectionBudgetExceeded, PhaseforgeError, PhaseRangeExceeded

WRAP_MODES = ("wrap", "strict")


@contextmanager
def _stage(name):
    try:
        yield
    except PhaseforgeError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


@dataclass(frozen=True, eq=False)
class SlopePlan:
    delta_drive: np.ndarray
    slopes: np.ndarray
    block_size: int
    pitch: float

    @property
    def n_blocks(self):
        return self.slopes.shape[0]

    @property
    def block_width(self):
        return self.block_size * self.pitch

    @property
    def centers(self):
        return (np.arange(self.n_blocks) + 0.5) * self.block_width

    @property
    def edges(self):
        return np.arange(self.n_blocks + 1) * self.block_width


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Unwrapped phase with a continuous piecewise-linear derivative.

    Knots sit at ``first_center + i * spacing`` with slope ``slopes[i]``;
    ``knot_phase[i]`` is the integral from x = 0 up to knot ``i``.
    """

    first_center: float
    spacing: float
    slopes: np.ndarray
    knot_phase: np.ndarray

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return kernels.c1_phase(self.first_center, self.spacing, self.slopes, self.knot_phase, x)

    def derivative(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return kernels.c1_slope(self.first_center, self.spacing, self.slopes, x)


@dataclass(frozen=True, eq=False)
class PhaseImage:
    pixels: np.ndarray
    levels: int
    model_hash: str = ""
    wrap_counts: tuple = ()
    wrap_mode: str = "wrap"

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError("phase image must be 2-D")
        if px.size and (px.min() < 0 or px.max() > self.levels - 1):
            raise ValueError("pixel values outside [0, levels - 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    def metadata(self):
        return {
            "width": self.width,
            "height": self.height,
            "maxval": self.levels - 1,
            "model_hash": self.model_hash,
            "wrap_mode": self.wrap_mode,
            "wrap_counts": list(self.wrap_counts),
        }


def plan_slopes(targets, lut, model):
    shift = np.tan(targets.deflection) * model.ref_plane_distance
    dd = device.invert_lut(lut, shift)
    g = device.ramp_gradient(model, dd)
    over = np.flatnonzero(np.abs(g) > model.nyquist_gradient)
    if over.size:
        k = int(over[0])
        hi = float(np.tan(model.nyquist_deflection) * model.ref_plane_distance)
        raise DeflectionBudgetExceeded(float(shift[k]), (-hi, hi), pixel=k)
    return SlopePlan(delta_drive=dd, slopes=g, block_size=model.block_size, pitch=model.pitch)


def assemble_c1_profile(plan, model=None):
    g = np.asarray(plan.slopes, dtype=np.float64)
    h = plan.block_width
    c0 = 0.5 * h
    knot_phase = np.empty_like(g)
    knot_phase[0] = g[0] * c0
    if g.shape[0] > 1:
        knot_phase[1:] = knot_phase[0] + np.cumsum(0.5 * (g[:-1] + g[1:]) * h)
    return PhaseProfile(first_center=c0, spacing=h, slopes=g, knot_phase=knot_phase)


def sample_positions(model, width):
    return (np.arange(width) + 0.5) * model.pitch


def wrap_and_quantize(profile, model, rows=1, width=None, wrap_mode="wrap"):
    """Sample at SLM pixel centres, wrap (or range-check) and quantise.

    Rounding is half-up.  In wrap mode with a 2 pi phase depth the top level
    (phase == depth) is folded onto 0, which is the same optical state.
    """
    if rows < 1:
        raise ValueError("rows must be >= 1")
    if wrap_mode not in WRAP_MODES:
        raise ValueError(f"wrap_mode must be one of {WRAP_MODES}")
    if width is None:
        width = profile.slopes.shape[0] * model.block_size
    phi = profile(sample_positions(model, width))
    if wrap_mode == "wrap":
        row, wraps = kernels.wrap_quantize(phi, model.phase_depth, model.levels, model.gamma, model.seamless_wrap)
    else:
        lo, hi = float(phi.min()), float(phi.max())
        if lo < 0.0 or hi > model.phase_depth:
            raise PhaseRangeExceeded(
                f"unwrapped phase spans [{lo:.6g}, {hi:.6g}] rad, outside [0, {model.phase_depth:.6g}]"
            )
        row = np.floor(device.drive_of_phase(model, phi) + 0.5).astype(np.int64)
        wraps = 0
    dtype = np.uint8 if model.levels <= 256 else np.uint16
    pixels = np.empty((rows, width), dtype=dtype)
    pixels[:] = row
    return PhaseImage(
        pixels=pixels,
        levels=model.levels,
        model_hash=model.fingerprint(),
        wrap_counts=(int(wraps),) * rows,
        wrap_mode=wrap_mode,
    )


def compile_phase_image(proj, surface, model, lut, rows=1, wrap_mode="wrap"):
    """Full pipeline; returns ``(image, targets, slope_plan)``."""
    with _stage("uniform_targets"):
        targets = density.uniform_targets(proj, surface)
    with _stage("required_deflections"):
        targets = density.required_deflections(proj, surface, targets)
    with _stage("plan_slopes"):
        plan = plan_slopes(targets, lut, model)
    with _stage("assemble_c1_profile"):
        profile = assemble_c1_profile(plan, model)
    with _stage("wrap_and_quantize"):
        image = wrap_and_quantize(profile, model, rows=rows, width=proj.n_cols * model.block_size, wrap_mode=wrap_mode)
    return image, targets, plan
