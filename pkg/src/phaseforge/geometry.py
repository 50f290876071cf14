"""Projector rays and polyline surface cross-sections in the x-z plane.

Coordinates are ``(x, z)`` in metres: ``x`` is the horizontal image direction,
``z`` points away from the projector.  Positive angles rotate a direction
toward increasing image ``x``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    AmbiguousIntersection,
    ConfigError,
    InvalidSurface,
    NoIntersection,
    NotOnSurface,
    OutOfRange,
)

ON_SURFACE_TOL = 1e-9


def _vec2(value, name):
    arr = np.asarray(value, dtype=np.float64).reshape(-1)
    if arr.shape != (2,) or not np.all(np.isfinite(arr)):
        raise ConfigError(name, f"expected a finite 2-vector, got {value!r}")
    return arr


@dataclass(frozen=True, eq=False)
class ProjectorModel:
    """Pinhole projector whose pixel rays are uniform in tangent.

    Pixel ``i`` looks along ``axis`` tilted by tangent
    ``-tan(h_fov/2) + i * 2 tan(h_fov/2) / (n_cols - 1)``, so a flat screen
    perpendicular to the axis receives equally spaced pixels.
    """

    origin: np.ndarray
    axis: np.ndarray
    h_fov: float
    n_cols: int

    def __post_init__(self):
        origin = _vec2(self.origin, "projector.origin")
        axis = _vec2(self.axis, "projector.axis")
        if abs(1.0 - np.hypot(axis[0], axis[1])) >= 1e-12:
            raise ConfigError("projector.axis", "must have unit norm")
        if not 0.0 < float(self.h_fov) < np.pi:
            raise ConfigError("projector.h_fov", "must lie in (0, pi)")
        if int(self.n_cols) != self.n_cols or self.n_cols < 2:
            raise ConfigError("projector.n_cols", "must be an integer >= 2")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "h_fov", float(self.h_fov))
        object.__setattr__(self, "n_cols", int(self.n_cols))

    @property
    def right(self):
        """Unit vector of increasing image x (axis rotated by -90 deg)."""
        return np.array([self.axis[1], -self.axis[0]])

    @property
    def half_tan(self):
        return np.tan(0.5 * self.h_fov)

    def tangents(self, index):
        index = np.asarray(index, dtype=np.float64)
        t = self.half_tan
        return -t + index * (2.0 * t / (self.n_cols - 1))

    def directions(self, index):
        """Unit ray directions for (possibly fractional) pixel indices."""
        t = np.atleast_1d(self.tangents(index))
        ax, az = self.axis
        dx = ax + t * az
        dz = az - t * ax
        norm = np.sqrt(dx * dx + dz * dz)
        return np.stack([dx / norm, dz / norm], axis=1)

    def boundary_indices(self):
        """Fractional indices of the n_cols + 1 pixel boundary rays."""
        return np.arange(self.n_cols + 1, dtype=np.float64) - 0.5


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class HitPoint:
    point: np.ndarray
    segment_index: int
    s: float


@dataclass(frozen=True, eq=False)
class SurfaceProfile:
    """Polyline cross-section of the projection surface, arc-length parameterised."""

    vertices: np.ndarray
    check_simple: bool = field(default=True, repr=False)
    seg_lengths: np.ndarray = field(init=False, repr=False)
    cum_s: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise InvalidSurface("surface needs at least two (x, z) vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidSurface("surface vertices must be finite")
        lengths = np.hypot(*np.diff(v, axis=0).T)
        bad = np.flatnonzero(lengths <= 0.0)
        if bad.size:
            raise InvalidSurface(f"vertices {bad[0]} and {bad[0] + 1} coincide")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "seg_lengths", lengths)
        object.__setattr__(self, "cum_s", np.concatenate([[0.0], np.cumsum(lengths)]))
        if self.check_simple:
            _check_simple(v)

    @property
    def total_length(self):
        return float(self.cum_s[-1])

    @property
    def n_segments(self):
        return self.vertices.shape[0] - 1


def _cross(ax, az, bx, bz):
    return ax * bz - az * bx


def _segments_touch(p, q, r, s):
    """Closed-segment intersection test for pq and rs (collinear overlap included)."""
    d1 = _cross(*(s - r), *(p - r))
    d2 = _cross(*(s - r), *(q - r))
    d3 = _cross(*(q - p), *(r - p))
    d4 = _cross(*(q - p), *(s - p))
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return True

    def on(a, b, c, d):
        return d == 0 and min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return on(r, s, p, d1) or on(r, s, q, d2) or on(p, q, r, d3) or on(p, q, s, d4)


def _check_simple(v):
    m = v.shape[0] - 1
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1:
                e1 = v[i + 1] - v[i]
                e2 = v[j + 1] - v[j]
                if _cross(*e1, *e2) == 0 and np.dot(e1, e2) < 0:
                    raise InvalidSurface(f"segments {i} and {j} fold back onto each other")
                continue
            if _segments_touch(v[i], v[i + 1], v[j], v[j + 1]):
                raise InvalidSurface(f"segments {i} and {j} intersect; polyline must be simple")


def pixel_ray(proj, i):
    """Ray of pixel ``i``; fractional indices down to -0.5 / up to n_cols - 0.5
    address the outer pixel boundaries."""
    i = float(i)
    if not -0.5 <= i <= proj.n_cols - 0.5:
        raise OutOfRange(f"pixel index {i} outside [-0.5, {proj.n_cols - 0.5}]")
    return Ray(proj.origin.copy(), proj.directions(i)[0])


def rotate(directions, theta):
    """Rotate unit directions by ``theta`` toward increasing image x."""
    directions = np.atleast_2d(directions)
    c = np.cos(theta)
    s = np.sin(theta)
    out = np.empty_like(directions)
    out[:, 0] = directions[:, 0] * c + directions[:, 1] * s
    out[:, 1] = directions[:, 1] * c - directions[:, 0] * s
    return out


def signed_angle(u, v):
    """Angle that rotates ``u`` onto ``v``; positive toward increasing image x."""
    u = np.atleast_2d(u)
    v = np.atleast_2d(v)
    return np.arctan2(u[:, 1] * v[:, 0] - u[:, 0] * v[:, 1], np.einsum("ij,ij->i", u, v))


def trace(origin, directions, surface, pixels=None):
    """Intersect a fan of rays; returns ``(s, segment, points)``.

    Raises the first miss/ambiguity, naming its pixel (``pixels[k]`` if given).
    """
    directions = np.ascontiguousarray(directions, dtype=np.float64)
    s, seg, pts, status = kernels.intersect_fan(
        np.asarray(origin, dtype=np.float64), directions, surface.vertices, surface.cum_s
    )
    if status.any():
        k = int(np.flatnonzero(status)[0])
        pixel = k if pixels is None else pixels[k]
        if status[k] == kernels.MISS:
            raise NoIntersection("ray misses the surface", pixel=pixel)
        raise AmbiguousIntersection("two hits tie within 1e-12 m along the ray", pixel=pixel)
    return s, seg, pts


def intersect(ray, surface):
    s, seg, pts = trace(ray.origin, np.reshape(ray.direction, (1, 2)), surface)
    return HitPoint(point=pts[0], segment_index=int(seg[0]), s=float(s[0]))


def points_at_arclength(surface, s):
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    total = surface.total_length
    if np.any(s < 0.0) or np.any(s > total) or not np.all(np.isfinite(s)):
        raise OutOfRange(f"arc length outside [0, {total}]")
    return kernels.points_at_arclength(surface.vertices, surface.cum_s, s)


def point_at_arclength(surface, s):
    return points_at_arclength(surface, [s])[0]


def arclength_of_point(surface, p):
    p = _vec2(p, "point")
    a = surface.vertices[:-1]
    e = np.diff(surface.vertices, axis=0)
    u = np.clip(((p - a) * e).sum(axis=1) / (surface.seg_lengths**2), 0.0, 1.0)
    foot = a + u[:, None] * e
    dist = np.hypot(*(foot - p).T)
    k = int(np.argmin(dist))
    if dist[k] > ON_SURFACE_TOL:
        raise NotOnSurface(f"point {p.tolist()} is {dist[k]:.3g} m from the surface")
    return float(surface.cum_s[k] + u[k] * surface.seg_lengths[k])


def nominal_hits(proj, surface):
    """Arc length of every unmodulated pixel-centre hit."""
    idx = np.arange(proj.n_cols)
    s, _, _ = trace(proj.origin, proj.directions(idx), surface)
    return s


def pixel_footprints(proj, surface):
    """Arc length covered by each pixel between its boundary rays i -/+ 0.5.

    The outermost boundaries sit half a pixel beyond the edge pixel centres,
    which keeps the fan partition uniform on a perpendicular flat screen.
    """
    b = proj.boundary_indices()
    s, _, _ = trace(proj.origin, proj.directions(b), surface, pixels=np.floor(b + 0.5).astype(int))
    fp = np.diff(s)
    bad = np.flatnonzero(fp <= 0.0)
    if bad.size:
        raise InvalidSurface(f"pixel {bad[0]}: non-positive footprint; surface is not single-valued over the fan")
    return fp


def count_hits(origin, directions, surface):
    """Number of distinct forward crossings of each ray (validation helper)."""
    counts = np.zeros(directions.shape[0], dtype=np.int64)
    for d_idx, d in enumerate(directions):
        found = []
        for k in range(surface.n_segments):
            a = surface.vertices[k]
            e = surface.vertices[k + 1] - a
            den = _cross(*d, *e)
            if abs(den) < 1e-14:
                continue
            w = a - origin
            t = _cross(*w, *e) / den
            u = _cross(*w, *d) / den
            if t > 0 and -1e-12 <= u <= 1 + 1e-12:
                pt = a + np.clip(u, 0, 1) * e
                if not any(np.hypot(*(pt - q)) <= 1e-12 for q in found):
                    found.append(pt)
        counts[d_idx] = len(found)
    return counts


def validate_coverage(proj, surface):
    """Every boundary ray must hit the surface exactly once, hits in order."""
    b = proj.boundary_indices()
    counts = count_hits(proj.origin, proj.directions(b), surface)
    bad = np.flatnonzero(counts != 1)
    if bad.size:
        k = bad[0]
        raise InvalidSurface(f"boundary ray {b[k]:+.1f} crosses the surface {counts[k]} times (need exactly 1)")
    fp = pixel_footprints(proj, surface)
    return fp
