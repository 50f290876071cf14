"""numba-compiled kernels.  Same signatures and arithmetic order as ``_numpy``."""

import math

import numpy as np
from numba import njit

from ._consts import HIT_TOL, PARALLEL_TOL, T_MIN, U_TOL

MISS = 1
AMBIGUOUS = 2


@njit(cache=True)
def intersect_fan(origin, dirs, verts, cum_s):
    n = dirs.shape[0]
    m = verts.shape[0] - 1
    s_out = np.empty(n)
    seg_out = np.zeros(n, dtype=np.int64)
    points = np.empty((n, 2))
    status = np.zeros(n, dtype=np.int8)
    t_seg = np.empty(m)
    s_seg = np.empty(m)
    ox = origin[0]
    oz = origin[1]
    for r in range(n):
        dx = dirs[r, 0]
        dz = dirs[r, 1]
        best = -1
        t_best = np.inf
        u_best = 0.0
        for k in range(m):
            ex = verts[k + 1, 0] - verts[k, 0]
            ez = verts[k + 1, 1] - verts[k, 1]
            wx = verts[k, 0] - ox
            wz = verts[k, 1] - oz
            den = dx * ez - dz * ex
            t_seg[k] = np.inf
            if abs(den) <= PARALLEL_TOL:
                continue
            t = (wx * ez - wz * ex) / den
            u = (wx * dz - wz * dx) / den
            if u < -U_TOL or u > 1.0 + U_TOL or not t > T_MIN:
                continue
            u = min(max(u, 0.0), 1.0)
            t_seg[k] = t
            s_seg[k] = cum_s[k] + u * (cum_s[k + 1] - cum_s[k])
            if t < t_best:
                t_best = t
                best = k
                u_best = u
        if best < 0:
            status[r] = MISS
            s_out[r] = np.nan
            points[r, 0] = np.nan
            points[r, 1] = np.nan
            continue
        s_best = s_seg[best]
        for k in range(m):
            if abs(t_seg[k] - t_best) <= HIT_TOL and abs(s_seg[k] - s_best) > HIT_TOL:
                status[r] = AMBIGUOUS
        s_out[r] = s_best
        seg_out[r] = best
        points[r, 0] = verts[best, 0] + u_best * (verts[best + 1, 0] - verts[best, 0])
        points[r, 1] = verts[best, 1] + u_best * (verts[best + 1, 1] - verts[best, 1])
    return s_out, seg_out, points, status


@njit(cache=True)
def points_at_arclength(verts, cum_s, s):
    m = verts.shape[0] - 1
    n = s.shape[0]
    out = np.empty((n, 2))
    for i in range(n):
        k = np.searchsorted(cum_s, s[i], side="right") - 1
        k = min(max(k, 0), m - 1)
        f = (s[i] - cum_s[k]) / (cum_s[k + 1] - cum_s[k])
        out[i, 0] = verts[k, 0] + f * (verts[k + 1, 0] - verts[k, 0])
        out[i, 1] = verts[k, 1] + f * (verts[k + 1, 1] - verts[k, 1])
    return out


@njit(cache=True)
def c1_phase(c0, h, slopes, knot_phase, x):
    n = slopes.shape[0]
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        xi = x[i]
        j = int(math.floor((xi - c0) / h))
        if j < 0:
            out[i] = slopes[0] * xi
        elif j >= n - 1:
            out[i] = knot_phase[n - 1] + slopes[n - 1] * (xi - (c0 + (n - 1) * h))
        else:
            u = xi - (c0 + j * h)
            out[i] = knot_phase[j] + slopes[j] * u + (slopes[j + 1] - slopes[j]) * u * u / (2.0 * h)
    return out


@njit(cache=True)
def c1_slope(c0, h, slopes, x):
    n = slopes.shape[0]
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        xi = x[i]
        j = int(math.floor((xi - c0) / h))
        if j < 0:
            out[i] = slopes[0]
        elif j >= n - 1:
            out[i] = slopes[n - 1]
        else:
            u = xi - (c0 + j * h)
            out[i] = slopes[j] + (slopes[j + 1] - slopes[j]) * u / h
    return out


@njit(cache=True)
def wrap_quantize(phi, depth, levels, gamma, fold_top):
    n = phi.shape[0]
    drive = np.empty(n, dtype=np.int64)
    wraps = 0
    q_prev = 0.0
    inv_gamma = 1.0 / gamma
    top = levels - 1
    for k in range(n):
        q = math.floor(phi[k] / depth)
        if k > 0:
            wraps += int(abs(q - q_prev))
        q_prev = q
        w = phi[k] - q * depth
        if w >= depth:
            w -= depth
        if w < 0.0:
            w = 0.0
        r = w / depth
        if gamma != 1.0:
            r = r**inv_gamma
        d = int(math.floor(r * top + 0.5))
        if fold_top and d >= top:
            d = 0
        drive[k] = d
    return drive, wraps


@njit(cache=True)
def unwrap_table(row, table, depth):
    n = row.shape[0]
    out = np.empty(n)
    half = 0.5 * depth
    acc = 0.0
    prev = 0.0
    for k in range(n):
        p = table[row[k]]
        if k > 0:
            step = p - prev
            if step > half:
                acc -= depth
            elif step < -half:
                acc += depth
        prev = p
        out[k] = p + acc
    return out
