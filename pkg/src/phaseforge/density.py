"""Uniform-density target placement and the deflections that realise it."""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import EmptyInput, InvalidSurface, NonPositiveFootprint, TargetUnreachable

ROUND_TRIP_TOL = 1e-9  # m


@dataclass(frozen=True, eq=False)
class TargetPlan:
    nominal_s: np.ndarray
    target_s: np.ndarray
    deflection: np.ndarray = None

    @property
    def n_pixels(self):
        return self.nominal_s.shape[0]

    @property
    def target_shift(self):
        return self.target_s - self.nominal_s


@dataclass(frozen=True)
class UniformityReport:
    footprints: np.ndarray
    mean: float
    stdev: float
    cv: float
    max_abs_shift_error: float = None

    def as_dict(self):
        out = {"mean_m": self.mean, "stdev_m": self.stdev, "cv": self.cv, "n": int(len(self.footprints))}
        if self.max_abs_shift_error is not None:
            out["max_abs_shift_error_m"] = self.max_abs_shift_error
        return out


def equal_spacing(first, last, n):
    return first + np.arange(n) * ((last - first) / (n - 1))


def uniform_targets(proj, surface, nominal_s=None):
    """Equally spaced targets in arc length, anchored at the edge pixels' hits."""
    if nominal_s is None:
        nominal_s = geometry.nominal_hits(proj, surface)
    if not nominal_s[-1] > nominal_s[0]:
        raise InvalidSurface("edge pixel hits are not ordered along the surface")
    target = equal_spacing(nominal_s[0], nominal_s[-1], nominal_s.shape[0])
    target[-1] = nominal_s[-1]
    return TargetPlan(nominal_s=nominal_s, target_s=target)


def required_deflections(proj, surface, plan, check=True):
    """Complete ``plan`` with the pivot rotation that moves each pixel onto its target.

    With ``check`` the rotated rays are re-traced and must land on their
    targets within 1e-9 m; anything else means the surface shadows itself.
    """
    idx = np.arange(plan.n_pixels)
    dirs = proj.directions(idx)
    pts = geometry.points_at_arclength(surface, plan.target_s)
    to_target = pts - proj.origin
    to_target /= np.hypot(to_target[:, 0], to_target[:, 1])[:, None]
    theta = geometry.signed_angle(dirs, to_target)
    if check:
        try:
            s, _, _ = geometry.trace(proj.origin, geometry.rotate(dirs, theta), surface)
        except geometry.NoIntersection as exc:
            raise TargetUnreachable("rotated ray misses the surface", pixel=exc.pixel) from exc
        miss = np.flatnonzero(np.abs(s - plan.target_s) > ROUND_TRIP_TOL)
        if miss.size:
            k = int(miss[0])
            raise TargetUnreachable(
                f"rotated ray lands at s={s[k]:.9g} m, target {plan.target_s[k]:.9g} m", pixel=k
            )
    return TargetPlan(nominal_s=plan.nominal_s, target_s=plan.target_s, deflection=theta)


def footprints_from_hits(s):
    """Per-pixel arc extent from hit positions alone.

    Interior boundaries are midpoints between neighbouring hits; the two
    outer boundaries extend half a spacing beyond the edge hits.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.shape[0] < 2:
        raise EmptyInput("need at least two hits")
    gaps = np.diff(s)
    return 0.5 * (np.concatenate([gaps[:1], gaps]) + np.concatenate([gaps, gaps[-1:]]))


def uniformity_metrics(footprints, max_abs_shift_error=None):
    fp = np.asarray(footprints, dtype=np.float64)
    if fp.size == 0:
        raise EmptyInput("no footprints")
    bad = np.flatnonzero(~(fp > 0.0))
    if bad.size:
        raise NonPositiveFootprint(f"footprint {bad[0]} is {fp[bad[0]]!r}")
    mean = float(fp.mean())
    stdev = 0.0 if np.all(fp == fp[0]) else float(fp.std())
    return UniformityReport(
        footprints=fp,
        mean=mean,
        stdev=stdev,
        cv=stdev / mean,
        max_abs_shift_error=None if max_abs_shift_error is None else float(max_abs_shift_error),
    )
