"""Forward optical check of a compiled phase image.

Only the stored drive levels and the device/geometry models are read: the
image is unwrapped row-wise, each block's mean phase gradient becomes a
grating deflection, and the deflected pixel rays are re-traced.
"""

from dataclasses import dataclass

import numpy as np

from . import density, device, geometry, kernels


def unwrap_phase_row(row, model):
    """Drive levels -> unwrapped phase [rad]; steps beyond depth/2 are unwrapped."""
    row = np.ascontiguousarray(row, dtype=np.int64)
    if row.size and (row.min() < 0 or row.max() > model.max_drive):
        raise ValueError(f"drive levels outside [0, {model.max_drive}]")
    return kernels.unwrap_levels(row, model.phase_depth, model.levels, model.gamma)


def interior_span(block_size):
    # drop one sample at each block edge to limit bleed from the neighbours
    if block_size >= 4:
        return 1, block_size - 2
    return 0, block_size - 1


def block_gradients(phase, model):
    """Mean finite-difference phase gradient [rad/m] over each block's interior samples."""
    b = model.block_size
    blocks = np.asarray(phase).reshape(-1, b)
    lo, hi = interior_span(b)
    return (blocks[:, hi] - blocks[:, lo]) / ((hi - lo) * model.pitch)


def block_deflections(image, model):
    px = image.pixels
    if image.levels != model.levels:
        raise ValueError(f"image maxval {image.levels - 1} does not match model levels {model.levels}")
    if px.shape[1] % model.block_size:
        raise ValueError("image width is not a multiple of the block size")
    if px.shape[0] > 1 and np.any(px != px[0]):
        raise ValueError("phase image rows differ; expected one profile replicated across rows")
    phase = unwrap_phase_row(px[0], model)
    return device.ramp_deflection(model, block_gradients(phase, model))


@dataclass(frozen=True, eq=False)
class SimulationResult:
    nominal_s: np.ndarray
    target_s: np.ndarray
    achieved_s: np.ndarray
    deflection: np.ndarray
    before: density.UniformityReport
    after: density.UniformityReport = None

    @property
    def target_shift(self):
        return self.target_s - self.nominal_s

    @property
    def achieved_shift(self):
        return self.achieved_s - self.nominal_s

    @property
    def shift_error(self):
        return self.achieved_s - self.target_s

    @property
    def order_preserved(self):
        return bool(np.all(np.diff(self.achieved_s) > 0))

    def summary(self):
        err = np.abs(self.shift_error)
        mean_fp = (self.target_s[-1] - self.target_s[0]) / (self.target_s.shape[0] - 1)
        return {
            "n_pixels": int(self.nominal_s.shape[0]),
            "cv_before": self.before.cv,
            "cv_after": None if self.after is None else self.after.cv,
            "mean_footprint_m": self.before.mean,
            "target_spacing_m": float(mean_fp),
            "max_abs_shift_error_m": float(err.max()),
            "max_shift_error_fraction": float(err.max() / self.before.mean),
            "max_abs_deflection_rad": float(np.abs(self.deflection).max()),
            "order_preserved": self.order_preserved,
        }


def forward_simulate(proj, surface, model, image):
    if image.width != proj.n_cols * model.block_size:
        raise ValueError(
            f"image width {image.width} != n_cols * block_size = {proj.n_cols * model.block_size}"
        )
    theta = block_deflections(image, model)
    idx = np.arange(proj.n_cols)
    dirs = proj.directions(idx)
    nominal, _, _ = geometry.trace(proj.origin, dirs, surface)
    targets = density.uniform_targets(proj, surface, nominal_s=nominal)
    achieved, _, _ = geometry.trace(proj.origin, geometry.rotate(dirs, theta), surface)
    before = density.uniformity_metrics(geometry.pixel_footprints(proj, surface))
    result = SimulationResult(
        nominal_s=nominal,
        target_s=targets.target_s,
        achieved_s=achieved,
        deflection=np.asarray(theta),
        before=before,
    )
    if result.order_preserved:
        after = density.uniformity_metrics(
            density.footprints_from_hits(achieved),
            max_abs_shift_error=np.abs(result.shift_error).max(),
        )
        result = SimulationResult(**{**result.__dict__, "after": after})
    return result


def checker_cells(proj, surface, model, image=None, cell_px=8):
    """Arc length of each run of ``cell_px`` pixels, as a projected checkerboard sees it.

    Without an image the unmodulated hits are used.
    """
    if cell_px < 1 or proj.n_cols % cell_px:
        raise ValueError(f"n_cols={proj.n_cols} is not divisible by cell_px={cell_px}")
    if image is None:
        hits = geometry.nominal_hits(proj, surface)
    else:
        res = forward_simulate(proj, surface, model, image)
        if not res.order_preserved:
            raise ValueError("achieved hits reorder pixels; cells are undefined")
        hits = res.achieved_s
    return density.footprints_from_hits(hits).reshape(-1, cell_px).sum(axis=1)
