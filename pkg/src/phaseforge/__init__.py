"""Pixel-density equalisation for projection mapping with a phase-only SLM.

The pipeline places projector pixels at equal arc-length spacing on a
non-planar surface, compiles the C1 phase image that steers each pixel there,
and checks the result with a forward ray model.
"""

from ._backend import BACKEND
from .compiler import PhaseImage, PhaseProfile, SlopePlan, compile_phase_image
from .density import TargetPlan, UniformityReport, required_deflections, uniform_targets, uniformity_metrics
from .device import DeflectionLut, PslmModel, invert_lut, simulate_calibration
from .geometry import ProjectorModel, SurfaceProfile
from .simulator import SimulationResult, checker_cells, forward_simulate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DeflectionLut",
    "PhaseImage",
    "PhaseProfile",
    "ProjectorModel",
    "PslmModel",
    "SimulationResult",
    "SlopePlan",
    "SurfaceProfile",
    "TargetPlan",
    "UniformityReport",
    "checker_cells",
    "compile_phase_image",
    "forward_simulate",
    "invert_lut",
    "required_deflections",
    "simulate_calibration",
    "uniform_targets",
    "uniformity_metrics",
]
