"""Numba-jitted element kernels.

Same contract as numpy_impl; loops are written out so numba can keep
everything in registers.  Determinants appear only for p in {0,1,2,3}.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

BACKEND_NAME = "numba"

_OPTS = dict(cache=True, fastmath=False)


@njit(**_OPTS)
def _det_sub(g, rows, cols, p):
    """Determinant of g[rows[:p], cols[:p]] for p <= 3."""
    if p == 0:
        return 1.0
    if p == 1:
        return g[rows[0], cols[0]]
    if p == 2:
        a = g[rows[0], cols[0]]
        b = g[rows[0], cols[1]]
        c = g[rows[1], cols[0]]
        d = g[rows[1], cols[1]]
        return a * d - b * c
    a = g[rows[0], cols[0]]
    b = g[rows[0], cols[1]]
    c = g[rows[0], cols[2]]
    d = g[rows[1], cols[0]]
    e = g[rows[1], cols[1]]
    f = g[rows[1], cols[2]]
    h = g[rows[2], cols[0]]
    i = g[rows[2], cols[1]]
    j = g[rows[2], cols[2]]
    return a * (e * j - f * i) - b * (d * j - f * h) + c * (d * i - e * h)


@njit(**_OPTS)
def simplex_geometry(coords):
    n, kp1, m = coords.shape
    k = kp1 - 1
    grams = np.empty((n, kp1, kp1))
    vols = np.empty(n)
    metric = np.empty((k, k))
    cinv = np.empty((k, k))
    kfact = 1.0
    for i in range(2, k + 1):
        kfact *= i
    for t in range(n):
        for i in range(k):
            for j in range(k):
                s = 0.0
                for a in range(m):
                    s += (coords[t, i + 1, a] - coords[t, 0, a]) * (
                        coords[t, j + 1, a] - coords[t, 0, a]
                    )
                metric[i, j] = s
        if k == 1:
            det = metric[0, 0]
            cinv[0, 0] = 1.0 / det
        elif k == 2:
            det = metric[0, 0] * metric[1, 1] - metric[0, 1] * metric[1, 0]
            inv = 1.0 / det
            cinv[0, 0] = metric[1, 1] * inv
            cinv[1, 1] = metric[0, 0] * inv
            cinv[0, 1] = -metric[0, 1] * inv
            cinv[1, 0] = -metric[1, 0] * inv
        else:
            c00 = metric[1, 1] * metric[2, 2] - metric[1, 2] * metric[2, 1]
            c01 = metric[1, 2] * metric[2, 0] - metric[1, 0] * metric[2, 2]
            c02 = metric[1, 0] * metric[2, 1] - metric[1, 1] * metric[2, 0]
            det = metric[0, 0] * c00 + metric[0, 1] * c01 + metric[0, 2] * c02
            inv = 1.0 / det
            cinv[0, 0] = c00 * inv
            cinv[1, 0] = c01 * inv
            cinv[2, 0] = c02 * inv
            cinv[0, 1] = (metric[0, 2] * metric[2, 1] - metric[0, 1] * metric[2, 2]) * inv
            cinv[1, 1] = (metric[0, 0] * metric[2, 2] - metric[0, 2] * metric[2, 0]) * inv
            cinv[2, 1] = (metric[0, 1] * metric[2, 0] - metric[0, 0] * metric[2, 1]) * inv
            cinv[0, 2] = (metric[0, 1] * metric[1, 2] - metric[0, 2] * metric[1, 1]) * inv
            cinv[1, 2] = (metric[0, 2] * metric[1, 0] - metric[0, 0] * metric[1, 2]) * inv
            cinv[2, 2] = (metric[0, 0] * metric[1, 1] - metric[0, 1] * metric[1, 0]) * inv
        vols[t] = math.sqrt(max(det, 0.0)) / kfact
        tot = 0.0
        for i in range(k):
            rs = 0.0
            for j in range(k):
                grams[t, i + 1, j + 1] = cinv[i, j]
                rs += cinv[i, j]
            grams[t, i + 1, 0] = -rs
            grams[t, 0, i + 1] = -rs
            tot += rs
        grams[t, 0, 0] = tot
    return grams, vols


@njit(**_OPTS)
def whitney_blocks(grams, scale, vert, rem, lam_mom, pfact2):
    n = grams.shape[0]
    nf, pp1 = vert.shape
    p = rem.shape[2]
    out = np.zeros((n, nf, nf))
    for t in range(n):
        g = grams[t]
        for a in range(nf):
            for b in range(nf):
                acc = 0.0
                for j in range(pp1):
                    sj = -1.0 if (j & 1) else 1.0
                    vj = vert[a, j]
                    for l in range(pp1):
                        sl = -1.0 if (l & 1) else 1.0
                        d = _det_sub(g, rem[a, j], rem[b, l], p)
                        acc += sj * sl * lam_mom[vj, vert[b, l]] * d
                out[t, a, b] = acc * pfact2 * scale[t]
    return out


def warmup():
    """Trigger compilation on tiny inputs so timings exclude jit cost."""
    coords2 = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    coords3 = np.array([[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                         [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]])
    for coords in (coords2, coords3):
        g, v = simplex_geometry(coords)
        k = coords.shape[1] - 1
        from .tables import mass_moments, whitney_tables

        for p in range(k + 1):
            _, vert, rem, pf2 = whitney_tables(k, p)
            whitney_blocks(g, v, vert, rem, mass_moments(k), pf2)
    return None
