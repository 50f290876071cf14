"""Hot numeric kernels, dispatched to numba or numpy per ``_backend``."""

from functools import lru_cache

import numpy as np

from .. import _backend
from . import _numpy
from ._numpy import AMBIGUOUS, MISS

if _backend.USE_NUMBA:
    from . import _numba as _impl
else:
    _impl = _numpy

BACKEND = _backend.BACKEND

intersect_fan = _impl.intersect_fan
points_at_arclength = _impl.points_at_arclength
c1_phase = _impl.c1_phase
c1_slope = _impl.c1_slope
wrap_quantize = _impl.wrap_quantize


@lru_cache(maxsize=16)
def phase_table(depth, levels, gamma):
    """Phase of every drive level; built with numpy so both backends share it bit for bit."""
    r = np.arange(levels, dtype=np.float64) / (levels - 1)
    if gamma != 1.0:
        r = r**gamma
    table = depth * r
    table.setflags(write=False)
    return table


def unwrap_levels(row, depth, levels, gamma):
    """Unwrapped phase of a row of integer drive levels (jumps beyond depth/2 removed)."""
    return _impl.unwrap_table(row, phase_table(float(depth), int(levels), float(gamma)), depth)


def implementations():
    """Map backend name -> kernel module, for parity tests and benchmarks."""
    impls = {"numpy": _numpy}
    if _backend.NUMBA_AVAILABLE:
        from . import _numba

        impls["numba"] = _numba
    return impls


__all__ = [
    "AMBIGUOUS",
    "BACKEND",
    "MISS",
    "c1_phase",
    "c1_slope",
    "implementations",
    "intersect_fan",
    "phase_table",
    "points_at_arclength",
    "unwrap_levels",
    "wrap_quantize",
]
