"""Pure-numpy kernels.  Reference path and fallback when numba is disabled."""

import numpy as np

from ._consts import HIT_TOL, PARALLEL_TOL, T_MIN, U_TOL

MISS = 1
AMBIGUOUS = 2


def intersect_fan(origin, dirs, verts, cum_s):
    """Nearest forward hit of every ray in ``dirs`` against the polyline.

    Returns ``(s, seg, points, status)``; status is 0 for a hit, ``MISS`` or
    ``AMBIGUOUS`` otherwise. Misses carry NaN in s and points.
    """
    n = dirs.shape[0]
    a = verts[:-1]
    e = verts[1:] - verts[:-1]
    seg_len = cum_s[1:] - cum_s[:-1]
    wx = a[:, 0] - origin[0]
    wz = a[:, 1] - origin[1]
    dx = dirs[:, 0:1]
    dz = dirs[:, 1:2]
    den = dx * e[:, 1] - dz * e[:, 0]
    wxe = wx * e[:, 1] - wz * e[:, 0]
    wxd = wx * dz - wz * dx
    with np.errstate(divide="ignore", invalid="ignore"):
        t = wxe / den
        u = wxd / den
    ok = (np.abs(den) > PARALLEL_TOL) & (u >= -U_TOL) & (u <= 1.0 + U_TOL) & (t > T_MIN)
    t = np.where(ok, t, np.inf)
    u = np.clip(np.where(ok, u, 0.0), 0.0, 1.0)

    rows = np.arange(n)
    k = np.argmin(t, axis=1)
    t_best = t[rows, k]
    u_best = u[rows, k]
    s = cum_s[k] + u_best * seg_len[k]
    s_all = cum_s[:-1] + u * seg_len
    with np.errstate(invalid="ignore"):
        tie = (np.abs(t - t_best[:, None]) <= HIT_TOL) & (np.abs(s_all - s[:, None]) > HIT_TOL)
    status = np.zeros(n, dtype=np.int8)
    status[tie.any(axis=1)] = AMBIGUOUS
    status[~np.isfinite(t_best)] = MISS
    points = np.empty((n, 2))
    points[:, 0] = a[k, 0] + u_best * e[k, 0]
    points[:, 1] = a[k, 1] + u_best * e[k, 1]
    miss = status == MISS
    s[miss] = np.nan
    points[miss] = np.nan
    return s, k.astype(np.int64), points, status


def points_at_arclength(verts, cum_s, s):
    m = verts.shape[0] - 1
    k = np.clip(np.searchsorted(cum_s, s, side="right") - 1, 0, m - 1)
    f = (s - cum_s[k]) / (cum_s[k + 1] - cum_s[k])
    out = np.empty((s.shape[0], 2))
    out[:, 0] = verts[k, 0] + f * (verts[k + 1, 0] - verts[k, 0])
    out[:, 1] = verts[k, 1] + f * (verts[k + 1, 1] - verts[k, 1])
    return out


def c1_phase(c0, h, slopes, knot_phase, x):
    """Integral from 0 of the clamped piecewise-linear slope field, at ``x``."""
    n = slopes.shape[0]
    j = np.floor((x - c0) / h).astype(np.int64)
    out = np.empty(x.shape[0])
    left = j < 0
    right = j >= n - 1
    mid = ~(left | right)
    out[left] = slopes[0] * x[left]
    out[right] = knot_phase[n - 1] + slopes[n - 1] * (x[right] - (c0 + (n - 1) * h))
    jj = j[mid]
    u = x[mid] - (c0 + jj * h)
    out[mid] = knot_phase[jj] + slopes[jj] * u + (slopes[jj + 1] - slopes[jj]) * u * u / (2.0 * h)
    return out


def c1_slope(c0, h, slopes, x):
    n = slopes.shape[0]
    j = np.floor((x - c0) / h).astype(np.int64)
    out = np.empty(x.shape[0])
    left = j < 0
    right = j >= n - 1
    mid = ~(left | right)
    out[left] = slopes[0]
    out[right] = slopes[n - 1]
    jj = j[mid]
    u = x[mid] - (c0 + jj * h)
    out[mid] = slopes[jj] + (slopes[jj + 1] - slopes[jj]) * u / h
    return out


def wrap_quantize(phi, depth, levels, gamma, fold_top):
    """Wrap into [0, depth), map through the inverse response, round half up.

    Returns ``(drive, wraps)``.  With ``fold_top`` the top level (phase equal
    to ``depth``) is folded onto 0.
    """
    q = np.floor(phi / depth)
    w = phi - q * depth
    w = np.where(w >= depth, w - depth, w)
    w = np.where(w < 0.0, 0.0, w)
    r = w / depth
    if gamma != 1.0:
        r = r ** (1.0 / gamma)
    drive = np.floor(r * (levels - 1) + 0.5).astype(np.int64)
    if fold_top:
        drive[drive >= levels - 1] = 0
    wraps = int(np.abs(np.diff(q)).sum()) if q.shape[0] > 1 else 0
    return drive, wraps


def unwrap_table(row, table, depth):
    phase = table[row]
    out = phase.copy()
    if phase.shape[0] > 1:
        step = np.diff(phase)
        half = 0.5 * depth
        corr = np.where(step > half, -depth, np.where(step < -half, depth, 0.0))
        out[1:] += np.cumsum(corr)
    return out
