"""Phase-only SLM model and emulated ramp calibration.

The calibration drives the modulator with repeated linear drive ramps, reads
back the mean unwrapped phase gradient, converts it to a deflection with the
blazed-grating relation ``sin(theta) = wavelength * g / (2 pi)`` and records
the spot shift on a perpendicular screen at ``ref_plane_distance``.
"""

import hashlib
import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import (
    ConfigError,
    DeflectionBudgetExceeded,
    EvanescentDeflection,
    NonMonotoneLut,
    OutOfRange,
)

TWO_PI = 2.0 * math.pi
MAX_WINDOW = 1 << 20


class AliasingWarning(RuntimeWarning):
    """Phase gradient beyond the pi/pitch sampling limit."""


@dataclass(frozen=True)
class PslmModel:
    pitch: float
    wavelength: float
    phase_depth: float = TWO_PI
    levels: int = 256
    gamma: float = 1.0
    block_size: int = 8
    ref_plane_distance: float = 1.0

    def __post_init__(self):
        for name, key in (
            ("pitch", "pslm.pitch_m"),
            ("wavelength", "pslm.wavelength_m"),
            ("ref_plane_distance", "pslm.ref_plane_distance_m"),
            ("phase_depth", "pslm.phase_depth_rad"),
            ("gamma", "pslm.gamma"),
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(key, f"must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not isinstance(self.levels, (int, np.integer)) or self.levels < 2:
            raise ConfigError("pslm.levels", f"must be an integer >= 2, got {self.levels!r}")
        if self.levels > 65536:
            raise ConfigError("pslm.levels", "at most 65536 levels fit a 16-bit PGM")
        if not isinstance(self.block_size, (int, np.integer)) or self.block_size < 2:
            raise ConfigError("pslm.block_size", f"must be an integer >= 2, got {self.block_size!r}")
        object.__setattr__(self, "levels", int(self.levels))
        object.__setattr__(self, "block_size", int(self.block_size))
        if self.wavelength / (2.0 * self.pitch) > 1.0:
            raise ConfigError("pslm.pitch_m", "wavelength / (2 pitch) exceeds 1; no propagating steering range")

    @property
    def max_drive(self):
        return self.levels - 1

    @property
    def nyquist_gradient(self):
        return math.pi / self.pitch

    @property
    def nyquist_deflection(self):
        return math.asin(self.wavelength / (2.0 * self.pitch))

    @property
    def seamless_wrap(self):
        return abs(self.phase_depth - TWO_PI) < 1e-12

    def as_dict(self):
        return asdict(self)

    def fingerprint(self):
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def phase_of_drive(model, d):
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0) or np.any(d > model.max_drive):
        raise OutOfRange(f"drive outside [0, {model.max_drive}]")
    r = d / model.max_drive
    if model.gamma != 1.0:
        r = r**model.gamma
    out = model.phase_depth * r
    return float(out) if out.ndim == 0 else out


def drive_of_phase(model, phi):
    phi = np.asarray(phi, dtype=np.float64)
    if np.any(phi < 0) or np.any(phi > model.phase_depth):
        raise OutOfRange(f"phase outside [0, {model.phase_depth}]")
    r = phi / model.phase_depth
    if model.gamma != 1.0:
        r = r ** (1.0 / model.gamma)
    out = model.max_drive * r
    return float(out) if out.ndim == 0 else out


def ramp_gradient(model, delta_drive):
    """Period-mean phase gradient [rad/m] of a repeated ramp stepping ``delta_drive`` per pixel.

    Holds for any gamma: each full period spans the whole drive range.
    """
    return model.phase_depth * np.asarray(delta_drive, dtype=np.float64) / (model.max_drive * model.pitch)


def ramp_deflection(model, g):
    """Deflection angle of a phase ramp with gradient ``g`` [rad/m]."""
    g = np.asarray(g, dtype=np.float64)
    sin_t = model.wavelength * g / TWO_PI
    if np.any(np.abs(sin_t) > 1.0):
        raise EvanescentDeflection(f"|wavelength * g / 2pi| = {np.max(np.abs(sin_t)):.6g} > 1")
    if np.any(np.abs(g) > model.nyquist_gradient):
        warnings.warn("phase gradient exceeds the pi/pitch sampling limit", AliasingWarning, stacklevel=2)
    out = np.arcsin(sin_t)
    return float(out) if out.ndim == 0 else out


def ramp_pattern(model, delta_drive, n):
    """Integer drive levels of a wrapped ramp: round_half_up((i * dd) mod max_drive)."""
    raw = np.mod(np.arange(n) * float(delta_drive), model.max_drive)
    return np.floor(raw + 0.5).astype(np.int64)


def _window(model, delta_drive):
    # an integer number of pixels spanning (close to) a whole number of periods
    a = abs(delta_drive)
    period = model.max_drive / a
    periods = max(1, math.ceil(a))
    return int(min(MAX_WINDOW, max(1, round(periods * period))))


def pattern_mean_gradient(model, delta_drive):
    """Mean unwrapped phase gradient [rad/m] of the quantised repeated ramp."""
    if delta_drive == 0:
        return 0.0
    w = _window(model, delta_drive)
    levels = ramp_pattern(model, delta_drive, w + 1)
    phase = kernels.unwrap_levels(levels, model.phase_depth, model.levels, model.gamma)
    return float((phase[w] - phase[0]) / (w * model.pitch))


def calibration_shift(model, delta_drive):
    """Shift [m] on the reference plane produced by the ``delta_drive`` ramp."""
    theta = ramp_deflection(model, pattern_mean_gradient(model, delta_drive))
    return math.tan(theta) * model.ref_plane_distance


def default_sweep(model, steps=33, max_delta=None):
    if max_delta is None:
        max_delta = model.max_drive / 4.0
    if steps < 3 or steps % 2 == 0:
        raise ConfigError("compile.sweep_steps", "must be an odd integer >= 3 so the sweep contains 0")
    if not 0 < max_delta < model.max_drive / 2.0:
        raise ConfigError("compile.sweep_max_delta_drive", f"must lie in (0, {model.max_drive / 2.0})")
    sweep = np.linspace(-max_delta, max_delta, steps)
    sweep[steps // 2] = 0.0
    return sweep


@dataclass(frozen=True, eq=False)
class DeflectionLut:
    """Monotone table: drive increment per SLM pixel -> shift [m] at the reference plane."""

    delta_drive: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        dd = np.asarray(self.delta_drive, dtype=np.float64)
        sh = np.asarray(self.shift, dtype=np.float64)
        if dd.ndim != 1 or dd.shape != sh.shape or dd.size < 1:
            raise ValueError("delta_drive and shift must be equal-length 1-D arrays")
        if np.any(np.diff(dd) <= 0):
            raise NonMonotoneLut("delta_drive must be strictly increasing")
        bad = np.flatnonzero(np.diff(sh) <= 0)
        if bad.size:
            k = bad[0]
            raise NonMonotoneLut(
                f"shift not increasing between delta_drive {dd[k]:.9g} and {dd[k + 1]:.9g}; "
                "sweep too fine for the level count"
            )
        zero = np.flatnonzero(dd == 0.0)
        if zero.size != 1 or sh[zero[0]] != 0.0:
            raise ValueError("LUT must contain the (0, 0) entry")
        object.__setattr__(self, "delta_drive", dd)
        object.__setattr__(self, "shift", sh)

    def __len__(self):
        return self.delta_drive.shape[0]

    @property
    def shift_range(self):
        return float(self.shift[0]), float(self.shift[-1])


def simulate_calibration(model, sweep):
    sweep = np.asarray(sweep, dtype=np.float64)
    if sweep.ndim != 1 or not np.any(sweep == 0.0):
        raise ValueError("sweep must be 1-D and contain 0")
    if np.any(np.diff(sweep) <= 0):
        raise ValueError("sweep must be strictly increasing")
    if np.any(np.abs(sweep) >= model.max_drive / 2.0):
        raise ValueError("sweep ramps must be slower than two pixels per period")
    shifts = np.array([calibration_shift(model, dd) for dd in sweep])
    return DeflectionLut(delta_drive=sweep, shift=shifts)


def invert_lut(lut, desired_shift):
    """Drive increment realising ``desired_shift`` by piecewise-linear inversion.

    Never extrapolates: out-of-range requests raise ``DeflectionBudgetExceeded``
    naming the first offending element.
    """
    desired = np.asarray(desired_shift, dtype=np.float64)
    lo, hi = lut.shift_range
    flat = np.atleast_1d(desired)
    out = ~((flat >= lo) & (flat <= hi))
    if out.any():
        k = int(np.flatnonzero(out)[0])
        raise DeflectionBudgetExceeded(float(flat[k]), (lo, hi), pixel=k if desired.ndim else None)
    res = np.interp(desired, lut.shift, lut.delta_drive)
    return float(res) if desired.ndim == 0 else res
