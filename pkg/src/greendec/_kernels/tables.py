"""Combinatorial tables shared by both kernel backends.

For a k-simplex and form degree p, the local basis is indexed by the
C(k+1, p+1) faces in lexicographic order.  Each basis form is a signed sum
over its p+1 vertices; the tables below precompute, for face ``a`` and sum
index ``j``, the vertex ``vert[a, j]`` and the remaining index set
``rem[a, j, :]`` whose gradient wedge enters the Gram determinant.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

import numpy as np


@lru_cache(maxsize=None)
def whitney_tables(k: int, p: int):
    """Return (faces, vert, rem, pfact2) arrays for degree p on a k-simplex."""
    if not 0 <= p <= k:
        raise ValueError(f"degree {p} out of range for {k}-simplex")
    faces = list(combinations(range(k + 1), p + 1))
    nf = len(faces)
    vert = np.empty((nf, p + 1), dtype=np.int64)
    rem = np.empty((nf, p + 1, p), dtype=np.int64)
    for a, face in enumerate(faces):
        for j in range(p + 1):
            vert[a, j] = face[j]
            rem[a, j, :] = [face[i] for i in range(p + 1) if i != j]
    pfact2 = float(math.factorial(p)) ** 2
    return np.asarray(faces, dtype=np.int64), vert, rem, pfact2


def mass_moments(k: int) -> np.ndarray:
    """Exact integrals of barycentric products: (1+delta_ij)/((k+1)(k+2))."""
    m = np.full((k + 1, k + 1), 1.0)
    m += np.eye(k + 1)
    return m / ((k + 1) * (k + 2))


def point_moments(bary: np.ndarray) -> np.ndarray:
    """Pointwise barycentric products lambda_i(b) * lambda_j(b)."""
    b = np.asarray(bary, dtype=np.float64)
    return np.outer(b, b)
