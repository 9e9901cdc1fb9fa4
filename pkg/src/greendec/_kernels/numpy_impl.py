"""Pure-numpy reference implementation of the element kernels.

Used when numba is unavailable or when GREENDEC_BACKEND=numpy.  The numba
backend must agree with this module to machine precision; the benchmark
script and the backend-equivalence test both compare the two.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "numpy"

_CHUNK = 8192


def simplex_geometry(coords: np.ndarray):
    """Barycentric-gradient Gram matrices and volumes for a batch of simplices.

    Parameters
    ----------
    coords : (n, k+1, m) float64
        Vertex coordinates; k is the simplex dimension, m >= k the embedding
        dimension.

    Returns
    -------
    grams : (n, k+1, k+1) float64
        Pairwise inner products of the barycentric gradients.
    vols : (n,) float64
        Unsigned k-volumes.
    """
    coords = np.asarray(coords, dtype=np.float64)
    n, kp1, _ = coords.shape
    k = kp1 - 1
    edges = coords[:, 1:, :] - coords[:, :1, :]          # (n, k, m)
    metric = edges @ edges.transpose(0, 2, 1)            # (n, k, k)
    det = np.linalg.det(metric)
    vols = np.sqrt(np.maximum(det, 0.0)) / math.factorial(k)
    cinv = np.linalg.inv(metric)                         # (n, k, k)
    grams = np.empty((n, kp1, kp1), dtype=np.float64)
    grams[:, 1:, 1:] = cinv
    rowsum = cinv.sum(axis=2)
    grams[:, 1:, 0] = -rowsum
    grams[:, 0, 1:] = -rowsum
    grams[:, 0, 0] = cinv.sum(axis=(1, 2))
    return grams, vols


def whitney_blocks(grams, scale, vert, rem, lam_mom, pfact2):
    """Local (face x face) blocks of integrated/pointwise Whitney products.

    blocks[t, a, b] = pfact2 * scale[t] *
        sum_{j,l} (-1)^{j+l} lam_mom[vert[a,j], vert[b,l]]
                  * det( grams[t][rem[a,j], :][:, rem[b,l]] )
    """
    grams = np.asarray(grams, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    n = grams.shape[0]
    nf, pp1 = vert.shape
    p = rem.shape[2]
    signs = (-1.0) ** np.arange(pp1)
    # flatten (face, j) pairs
    fj_v = vert.reshape(-1)                               # (nf*pp1,)
    fj_r = rem.reshape(nf * pp1, p)                       # (nf*pp1, p)
    fj_s = np.repeat(signs[None, :], nf, axis=0).reshape(-1)
    mom = lam_mom[fj_v[:, None], fj_v[None, :]]           # (J, J)
    sgn = fj_s[:, None] * fj_s[None, :]
    out = np.empty((n, nf, nf), dtype=np.float64)
    J = nf * pp1
    for start in range(0, n, _CHUNK):
        g = grams[start:start + _CHUNK]
        c = g.shape[0]
        if p == 0:
            dets = np.ones((c, J, J))
        else:
            sub = g[:, fj_r[:, None, :, None], fj_r[None, :, None, :]]
            # sub: (c, J, J, p, p)
            dets = np.linalg.det(sub)
        contrib = dets * (mom * sgn)[None, :, :]
        contrib = contrib.reshape(c, nf, pp1, nf, pp1).sum(axis=(2, 4))
        out[start:start + c] = contrib
    out *= pfact2 * scale[:, None, None]
    return out


def warmup():
    """No compilation needed for the numpy backend."""
    return None
