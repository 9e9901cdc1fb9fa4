"""Discrete operators on Whitney p-form cochains.

Assembles, for any degree p and optional flat bundle twist:

* the coboundary d_p (signed incidence, with a transport on the one face
  whose base vertex differs from the parent's),
* the Whitney mass matrix M_p (Galerkin inner product of lowest-order
  Whitney forms, blockwise per top simplex),
* pointwise norms at top barycenters and derived Lq norms over the
  manifold or its boundary,
* Hodge Laplacians in weak form with Dirichlet (tangential-zero) or
  Neumann (natural) boundary conditions, solved through a mixed saddle
  system so that the codifferential term never requires a dense inverse
  mass matrix.

Degrees of freedom are ordered simplex-major: the value of simplex ``s``
in fiber coordinate ``i`` sits at flat index ``s * rank + i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh as dense_eigh

from . import _kernels
from ._kernels import tables
from .bundles import FlatBundle
from .errors import (DegreeOutOfRange, InvalidExponent, InvalidParams,
                     ShapeMismatch, SingularOperator)
from .mesh import SimplicialMesh

_DENSE_EIG_LIMIT = 2600


# ---------------------------------------------------------------------------
# cochains


@dataclass
class Cochain:
    """Degree-p cochain; ``values`` is (N_p,) scalar or (N_p, r) twisted."""

    mesh: SimplicialMesh
    p: int
    values: np.ndarray
    bundle: Optional[FlatBundle] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.mesh.num_simplices(self.p)
        r = self.rank
        want = (n,) if self.bundle is None else (n, r)
        if self.values.shape != want:
            raise ShapeMismatch(
                f"cochain values shape {self.values.shape}, expected {want}")

    @property
    def rank(self) -> int:
        return 1 if self.bundle is None else self.bundle.rank

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def copy(self) -> "Cochain":
        return Cochain(self.mesh, self.p, self.values.copy(), self.bundle)


def cochain_from_flat(mesh, p, flat, bundle=None) -> Cochain:
    flat = np.asarray(flat, dtype=float)
    if bundle is None:
        return Cochain(mesh, p, flat, None)
    return Cochain(mesh, p, flat.reshape(-1, bundle.rank), bundle)


# ---------------------------------------------------------------------------
# operator cache keyed on (name, degree, bundle identity)


def _cache(mesh: SimplicialMesh) -> dict:
    c = getattr(mesh, "_operator_cache", None)
    if c is None:
        c = {}
        mesh._operator_cache = c
    return c


def _bkey(bundle: Optional[FlatBundle]):
    return None if bundle is None else id(bundle)


def _check_degree(mesh: SimplicialMesh, p: int, top: Optional[int] = None):
    hi = mesh.dim if top is None else top
    if not 0 <= p <= hi:
        raise DegreeOutOfRange(f"degree {p} outside [0, {hi}]")


# ---------------------------------------------------------------------------
# coboundary


def exterior_derivative(mesh: SimplicialMesh, p: int,
                        bundle: Optional[FlatBundle] = None) -> sp.csr_matrix:
    """Coboundary matrix d_p: p-cochains -> (p+1)-cochains."""
    _check_degree(mesh, p, mesh.dim - 1)
    key = ("d", p, _bkey(bundle))
    cache = _cache(mesh)
    if key in cache:
        return cache[key]
    parents = mesh.simplices[p + 1]
    n_par = parents.shape[0]
    n_fac = mesh.num_simplices(p)
    cols_per_j = []
    for j in range(p + 2):
        keep = [c for c in range(p + 2) if c != j]
        cols_per_j.append(mesh._lookup(p, parents[:, keep]))
    if bundle is None:
        rows = np.repeat(np.arange(n_par), p + 2)
        cols = np.stack(cols_per_j, axis=1).reshape(-1)
        data = np.tile(np.array([(-1.0) ** j for j in range(p + 2)]), n_par)
        d = sp.coo_matrix((data, (rows, cols)), shape=(n_par, n_fac))
    else:
        r = bundle.rank
        qt = bundle.coboundary_base_transports(p)  # (n_par, r, r)
        ri, ci, dv = [], [], []
        base = np.arange(n_par) * r
        # j = 0 face carries the fiber transport
        fb = cols_per_j[0] * r
        ii, jj = np.meshgrid(np.arange(r), np.arange(r), indexing="ij")
        ri.append((base[:, None, None] + ii[None]).reshape(-1))
        ci.append((fb[:, None, None] + jj[None]).reshape(-1))
        dv.append(qt.reshape(-1))
        for j in range(1, p + 2):
            s = (-1.0) ** j
            fb = cols_per_j[j] * r
            for i in range(r):
                ri.append(base + i)
                ci.append(fb + i)
                dv.append(np.full(n_par, s))
        d = sp.coo_matrix(
            (np.concatenate(dv), (np.concatenate(ri), np.concatenate(ci))),
            shape=(n_par * r, n_fac * r))
    d = d.tocsr()
    cache[key] = d
    return d


# ---------------------------------------------------------------------------
# mass and pointwise norms


def _scalar_mass_blocks(mesh: SimplicialMesh, p: int) -> np.ndarray:
    """(n_top, C, C) Whitney mass blocks per top simplex."""
    key = ("mass_blocks", p)
    cache = _cache(mesh)
    if key in cache:
        return cache[key]
    grams, vols = mesh.top_geometry()
    _, vert, rem, pfact2 = tables.whitney_tables(mesh.dim, p)
    mom = tables.mass_moments(mesh.dim)
    blocks = _kernels.whitney_blocks(grams, vols, vert, rem, mom, pfact2)
    cache[key] = blocks
    return blocks


def _scalar_point_blocks(mesh: SimplicialMesh, p: int) -> np.ndarray:
    """(n_top, C, C) Gram matrices of Whitney forms at top barycenters."""
    key = ("point_blocks", p)
    cache = _cache(mesh)
    if key in cache:
        return cache[key]
    grams, vols = mesh.top_geometry()
    _, vert, rem, pfact2 = tables.whitney_tables(mesh.dim, p)
    bary = np.full(mesh.dim + 1, 1.0 / (mesh.dim + 1))
    mom = tables.point_moments(bary)
    blocks = _kernels.whitney_blocks(grams, np.ones_like(vols), vert,
                                     rem, mom, pfact2)
    cache[key] = blocks
    return blocks


def mass_matrix(mesh: SimplicialMesh, p: int,
                bundle: Optional[FlatBundle] = None) -> sp.csr_matrix:
    """Whitney mass matrix M_p (symmetric positive definite)."""
    _check_degree(mesh, p)
    key = ("mass", p, _bkey(bundle))
    cache = _cache(mesh)
    if key in cache:
        return cache[key]
    blocks = _scalar_mass_blocks(mesh, p)
    ids = mesh.top_faces[p]  # (n_top, C)
    n = mesh.num_simplices(p)
    if bundle is None:
        rows = np.broadcast_to(ids[:, :, None], blocks.shape).reshape(-1)
        cols = np.broadcast_to(ids[:, None, :], blocks.shape).reshape(-1)
        m = sp.coo_matrix((blocks.reshape(-1), (rows, cols)), shape=(n, n))
    else:
        r = bundle.rank
        rt = bundle.top_face_transports(p)  # (n_top, C, r, r)
        gram = np.einsum("tami,tbmj->tabij", rt, rt)
        data = blocks[:, :, :, None, None] * gram
        ii, jj = np.meshgrid(np.arange(r), np.arange(r), indexing="ij")
        rows = (ids[:, :, None] * r)[:, :, :, None, None] + ii
        rows = np.broadcast_to(rows, data.shape).reshape(-1)
        cols = (ids[:, None, :] * r)[:, :, :, None, None] + jj
        cols = np.broadcast_to(cols, data.shape).reshape(-1)
        m = sp.coo_matrix((data.reshape(-1), (rows, cols)),
                          shape=(n * r, n * r))
    m = m.tocsr()
    m.sum_duplicates()
    cache[key] = m
    return m


def pointwise_norms(mesh: SimplicialMesh, p: int, values: np.ndarray,
                    bundle: Optional[FlatBundle] = None) -> np.ndarray:
    """|f| at every top-simplex barycenter, using the Whitney metric."""
    _check_degree(mesh, p)
    blocks = _scalar_point_blocks(mesh, p)
    ids = mesh.top_faces[p]
    if bundle is None:
        v = np.asarray(values, dtype=float)[ids]  # (n_top, C)
        sq = np.einsum("tab,ta,tb->t", blocks, v, v)
    else:
        rt = bundle.top_face_transports(p)
        v = np.asarray(values, dtype=float)[ids]  # (n_top, C, r)
        w = np.einsum("tami,tai->tam", rt, v)
        sq = np.einsum("tab,tam,tbm->t", blocks, w, w)
    return np.sqrt(np.maximum(sq, 0.0))


def lq_norm(mesh: SimplicialMesh, p: int, values: np.ndarray, q: float,
            bundle: Optional[FlatBundle] = None,
            domain: str = "interior") -> float:
    """Lq norm of a p-cochain from barycenter values and top volumes.

    ``domain='boundary'`` takes the trace on the boundary complex first
    (requires p < dim and a nonempty boundary).
    """
    if q < 1:
        raise InvalidExponent("q must be >= 1")
    if domain == "boundary":
        if not mesh.has_boundary:
            raise InvalidParams("mesh has no boundary")
        if p > mesh.dim - 1:
            raise DegreeOutOfRange("boundary trace needs p < dim")
        bmesh, pverts, parent_ids = mesh.boundary_complex()
        vals = np.asarray(values)[parent_ids[p]]
        bnd = None
        if bundle is not None:
            bnd = bundle.boundary_restriction(bmesh, pverts, parent_ids[1])
        return lq_norm(bmesh, p, vals, q, bnd, domain="interior")
    if domain != "interior":
        raise InvalidParams(f"unknown domain {domain!r}")
    pts = pointwise_norms(mesh, p, values, bundle)
    if np.isinf(q):
        return float(pts.max()) if pts.size else 0.0
    vols = mesh.volumes()
    return float((pts ** q * vols).sum() ** (1.0 / q))


# ---------------------------------------------------------------------------
# codifferential


class Codifferential:
    """d*: (p+1)-cochains -> p-cochains, as M_p^-1 d^T M_{p+1}.

    Applies through a cached factorization of M_p; never materialized as a
    dense matrix.
    """

    def __init__(self, d: sp.spmatrix, m_p: sp.spmatrix, m_p1: sp.spmatrix):
        if d.shape != (m_p1.shape[0], m_p.shape[0]):
            raise ShapeMismatch(
                f"d is {d.shape}, masses {m_p.shape[0]}->{m_p1.shape[0]}")
        self.d = d
        self.m_p = m_p
        self.m_p1 = m_p1
        self._lu = spla.splu(m_p.tocsc())

    @property
    def shape(self):
        return (self.m_p.shape[0], self.m_p1.shape[0])

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self._lu.solve(self.d.T @ (self.m_p1 @ values))

    def __matmul__(self, values: np.ndarray) -> np.ndarray:
        return self.apply(values)


def codifferential(mesh: SimplicialMesh, p: int,
                   bundle: Optional[FlatBundle] = None) -> Codifferential:
    """d* on (p+1)-cochains for the full (Neumann) complex."""
    _check_degree(mesh, p, mesh.dim - 1)
    key = ("codiff", p, _bkey(bundle))
    cache = _cache(mesh)
    if key not in cache:
        cache[key] = Codifferential(exterior_derivative(mesh, p, bundle),
                                    mass_matrix(mesh, p, bundle),
                                    mass_matrix(mesh, p + 1, bundle))
    return cache[key]


def export_coo(matrix: sp.spmatrix, path: str) -> None:
    """Write a sparse matrix as 'row col value' text lines (debug aid)."""
    coo = matrix.tocoo()
    with open(path, "w") as fh:
        fh.write(f"# shape {coo.shape[0]} {coo.shape[1]} nnz {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {v:.17g}\n")


# ---------------------------------------------------------------------------
# boundary conditions and Hodge operators


def _dof_indices(mesh, q, bc, rank):
    """Flat DOF indices kept at degree q under the boundary condition."""
    if bc == "neumann" or not mesh.has_boundary:
        n = mesh.num_simplices(q)
        return np.arange(n * rank)
    if bc != "dirichlet":
        raise InvalidParams(f"unknown boundary condition {bc!r}")
    keep = np.where(mesh.interior_mask(q))[0]
    if rank == 1:
        return keep
    return (keep[:, None] * rank + np.arange(rank)).reshape(-1)


def _restrict(matrix, rows, cols):
    return matrix[rows][:, cols].tocsr()


class HodgeOperator:
    """Weak Hodge Laplacian A = d' M+ d + M dm Mm^-1 dm' M at one degree.

    Solves go through the symmetric mixed system

        [ -Mm   B' ] [s]   [0]      B = M dm,  A u = K u + B Mm^-1 B' u,
        [  B    K  ] [u] = [b]      K = d' M+ d,

    bordered with mass-orthonormal harmonic columns when A is singular.
    Dirichlet conditions remove boundary simplices at every degree.
    """

    def __init__(self, mesh: SimplicialMesh, p: int, bc: str = "neumann",
                 bundle: Optional[FlatBundle] = None):
        _check_degree(mesh, p)
        if bc not in ("neumann", "dirichlet"):
            raise InvalidParams(f"unknown boundary condition {bc!r}")
        self.mesh = mesh
        self.p = p
        self.bc = bc
        self.bundle = bundle
        self.rank = 1 if bundle is None else bundle.rank
        n = mesh.dim
        self.idx = {p: _dof_indices(mesh, p, bc, self.rank)}
        self.M = _restrict(mass_matrix(mesh, p, bundle),
                           self.idx[p], self.idx[p])
        self.ndof = self.M.shape[0]
        self.has_up = p < n
        self.has_down = p > 0
        if self.has_up:
            self.idx[p + 1] = _dof_indices(mesh, p + 1, bc, self.rank)
            mup = _restrict(mass_matrix(mesh, p + 1, bundle),
                            self.idx[p + 1], self.idx[p + 1])
            dup = _restrict(exterior_derivative(mesh, p, bundle),
                            self.idx[p + 1], self.idx[p])
            self.d_up = dup
            self.M_up = mup
            self.K = (dup.T @ mup @ dup).tocsr()
        else:
            self.d_up = None
            self.M_up = None
            self.K = sp.csr_matrix((self.ndof, self.ndof))
        if self.has_down:
            self.idx[p - 1] = _dof_indices(mesh, p - 1, bc, self.rank)
            self.M_down = _restrict(mass_matrix(mesh, p - 1, bundle),
                                    self.idx[p - 1], self.idx[p - 1])
            self.d_down = _restrict(exterior_derivative(mesh, p - 1, bundle),
                                    self.idx[p], self.idx[p - 1])
            self.B = (self.M @ self.d_down).tocsr()
            self._mdown_lu = spla.splu(self.M_down.tocsc())
        else:
            self.M_down = None
            self.d_down = None
            self.B = None
            self._mdown_lu = None
        self._saddle_lu = None
        self._harmonics = None
        self._harmonic_tol = None

    # -- cochain embedding ----------------------------------------------

    def restrict(self, values: np.ndarray) -> np.ndarray:
        """Full p-cochain values -> DOF vector."""
        flat = np.asarray(values, dtype=float).reshape(-1)
        return flat[self.idx[self.p]]

    def extend(self, dof: np.ndarray) -> np.ndarray:
        """DOF vector -> full p-cochain values (zero on removed simplices)."""
        n = self.mesh.num_simplices(self.p) * self.rank
        full = np.zeros(n)
        full[self.idx[self.p]] = dof
        if self.rank == 1:
            return full
        return full.reshape(-1, self.rank)

    def cochain(self, dof: np.ndarray) -> Cochain:
        return Cochain(self.mesh, self.p, self.extend(dof), self.bundle)

    # -- basic actions ----------------------------------------------------

    def apply(self, u: np.ndarray) -> np.ndarray:
        """A @ u."""
        out = self.K @ u
        if self.has_down:
            out = out + self.B @ self._mdown_lu.solve(self.B.T @ u)
        return out

    def d(self, u: np.ndarray) -> np.ndarray:
        if not self.has_up:
            return np.zeros(0)
        return self.d_up @ u

    def codifferential(self, u: np.ndarray) -> np.ndarray:
        if not self.has_down:
            return np.zeros(0)
        return self._mdown_lu.solve(self.B.T @ u)

    def energy(self, u: np.ndarray, v: np.ndarray) -> float:
        """Dirichlet energy <du, dv> + <d*u, d*v>."""
        tot = 0.0
        if self.has_up:
            tot += float((self.d_up @ u) @ (self.M_up @ (self.d_up @ v)))
        if self.has_down:
            su = self.codifferential(u)
            sv = self.codifferential(v)
            tot += float(su @ (self.M_down @ sv))
        return tot

    # -- harmonic space ----------------------------------------------------

    def harmonics(self, max_dim: int = 8, tol: float = 1e-8) -> np.ndarray:
        """(ndof, h) M-orthonormal basis of ker A."""
        if self._harmonics is not None:
            return self._harmonics
        if self.ndof == 0:
            self._harmonics = np.zeros((0, 0))
            return self._harmonics
        k = min(max_dim + 3, self.ndof - 1)
        if k < 1 or self.ndof <= _DENSE_EIG_LIMIT:
            vals, vecs = self._dense_eigs()
        else:
            vals, vecs = self._sparse_eigs(k)
        scale = max(vals.max(), 1.0 / max(self.mesh.total_volume(), 1e-30))
        zero = vals < tol * scale
        if zero.all() and self.ndof > _DENSE_EIG_LIMIT:
            # every computed mode is harmonic: retry dense to be safe
            vals, vecs = self._dense_eigs()
            scale = max(vals.max(), 1e-30)
            zero = vals < tol * scale
        h = vecs[:, zero]
        h = self._mass_orthonormalize(h)
        self._harmonics = h
        return h

    def _mass_orthonormalize(self, h: np.ndarray) -> np.ndarray:
        if h.shape[1] == 0:
            return h
        g = h.T @ (self.M @ h)
        w, v = np.linalg.eigh(g)
        keep = w > 1e-12 * w.max()
        return h @ (v[:, keep] / np.sqrt(w[keep]))

    def dense_matrix(self) -> np.ndarray:
        """Materialize A densely (small problems only)."""
        a = self.K.toarray()
        if self.has_down:
            x = self._mdown_lu.solve(self.B.T.toarray())
            a = a + self.B @ x
        return a

    def _dense_eigs(self, k: Optional[int] = None):
        a = self.dense_matrix()
        m = self.M.toarray()
        vals, vecs = dense_eigh(a, m)
        vals = np.maximum(vals, 0.0)
        if k is not None:
            return vals[:k], vecs[:, :k]
        return vals, vecs

    def _sparse_eigs(self, k: int):
        sigma = -1e-3 * (1.0 + self.K.diagonal().sum()
                         / max(self.M.diagonal().sum(), 1e-30))
        lu = self._shifted_saddle_lu(sigma)
        nd = self.ndof
        m = self.M_down.shape[0] if self.has_down else 0

        def opinv(y):
            rhs = np.zeros(m + nd)
            rhs[m:] = y
            return lu.solve(rhs)[m:]

        op_a = spla.LinearOperator((nd, nd), matvec=self.apply)
        op_inv = spla.LinearOperator((nd, nd), matvec=opinv)
        # fixed generic start vector: ARPACK's default v0 is drawn from
        # numpy's global RNG, which would break run-to-run reproducibility
        v0 = np.sin(0.7 * np.arange(nd) + 0.3)
        vals, vecs = spla.eigsh(op_a, k=k, M=self.M, sigma=sigma,
                                which="LM", OPinv=op_inv, mode="normal",
                                v0=v0)
        order = np.argsort(vals)
        return np.maximum(vals[order], 0.0), vecs[:, order]

    def eigenpairs(self, k: int):
        """k smallest eigenpairs of A x = lam M x."""
        if k >= self.ndof or self.ndof <= _DENSE_EIG_LIMIT:
            vals, vecs = self._dense_eigs()
            return vals[:k], vecs[:, :k]
        return self._sparse_eigs(k)

    # -- solving ------------------------------------------------------------

    def _shifted_saddle_lu(self, sigma: float):
        k = self.K - sigma * self.M if sigma != 0.0 else self.K
        if self.has_down:
            s = sp.bmat([[-self.M_down, self.B.T], [self.B, k]],
                        format="csc")
        else:
            s = k.tocsc()
        return spla.splu(s)

    def _solver(self):
        if self._saddle_lu is not None:
            return self._saddle_lu
        h = self.harmonics()
        m = self.M_down.shape[0] if self.has_down else 0
        blocks_k = self.K
        border = self.M @ h if h.shape[1] else None
        rows = []
        if self.has_down:
            top = [-self.M_down, self.B.T]
            mid = [self.B, blocks_k]
            if border is not None:
                top.append(sp.csr_matrix((m, h.shape[1])))
                mid.append(sp.csr_matrix(border))
                rows = [top, mid,
                        [sp.csr_matrix((h.shape[1], m)),
                         sp.csr_matrix(border.T),
                         sp.csr_matrix((h.shape[1], h.shape[1]))]]
            else:
                rows = [top, mid]
        else:
            if border is not None:
                rows = [[blocks_k, sp.csr_matrix(border)],
                        [sp.csr_matrix(border.T),
                         sp.csr_matrix((h.shape[1], h.shape[1]))]]
            else:
                rows = [[blocks_k]]
        s = sp.bmat(rows, format="csc") if len(rows) > 1 or len(rows[0]) > 1 \
            else rows[0][0].tocsc()
        try:
            lu = spla.splu(s)
        except RuntimeError as exc:
            raise SingularOperator(str(exc)) from None
        self._saddle_lu = (lu, m, h.shape[1])
        return self._saddle_lu

    def solve(self, b: np.ndarray, return_multipliers: bool = False):
        """Solve A u = b with u M-orthogonal to the harmonic space.

        Returns ``u`` or ``(u, mu)``; ``mu`` holds the harmonic multipliers,
        nonzero exactly when b is inconsistent (its harmonic part).
        """
        b = np.asarray(b, dtype=float)
        if b.shape != (self.ndof,):
            raise ShapeMismatch(f"rhs has shape {b.shape}, "
                                f"expected ({self.ndof},)")
        lu, m, hdim = self._solver()
        rhs = np.zeros(m + self.ndof + hdim)
        rhs[m:m + self.ndof] = b
        sol = lu.solve(rhs)
        u = sol[m:m + self.ndof]
        mu = sol[m + self.ndof:]
        if return_multipliers:
            return u, mu
        return u

    def solve_many(self, bs: np.ndarray) -> np.ndarray:
        """Column-wise solve; ``bs`` is (ndof, k)."""
        lu, m, hdim = self._solver()
        rhs = np.zeros((m + self.ndof + hdim, bs.shape[1]))
        rhs[m:m + self.ndof] = bs
        sol = lu.solve(rhs)
        return sol[m:m + self.ndof]


def harmonic_extension(mesh: SimplicialMesh, p: int,
                       boundary_values: np.ndarray,
                       bundle: Optional[FlatBundle] = None) -> np.ndarray:
    """Discrete Laplace-harmonic p-cochain with prescribed boundary values.

    Partitions the natural (Neumann-form) Hodge Laplacian into interior and
    boundary DOFs and solves the interior block.  p = 0 uses the sparse
    stiffness matrix; higher degrees go dense, so keep the mesh moderate.
    """
    if not mesh.has_boundary:
        raise InvalidParams("harmonic extension needs a boundary")
    rank = 1 if bundle is None else bundle.rank
    op = hodge_laplacian(mesh, p, "neumann", bundle)
    idx_int = _dof_indices(mesh, p, "dirichlet", rank)
    n = mesh.num_simplices(p) * rank
    idx_bnd = np.setdiff1d(np.arange(n), idx_int)
    b = np.asarray(boundary_values, dtype=float).reshape(-1)
    if b.shape != idx_bnd.shape:
        raise ShapeMismatch(f"expected {idx_bnd.size} boundary values")
    full = np.zeros(n)
    full[idx_bnd] = b
    if idx_int.size:
        if p == 0:
            a = op.K
            a_ii = a[idx_int][:, idx_int].tocsc()
            a_ib = a[idx_int][:, idx_bnd]
            full[idx_int] = spla.spsolve(a_ii, -(a_ib @ b))
        else:
            if n > _DENSE_EIG_LIMIT * 2:
                raise InvalidParams("harmonic extension for p >= 1 is dense; "
                                    f"{n} DOFs is too large")
            a = op.dense_matrix()
            full[idx_int] = np.linalg.solve(a[np.ix_(idx_int, idx_int)],
                                            -(a[np.ix_(idx_int, idx_bnd)] @ b))
    return full


def boundary_dof_count(mesh: SimplicialMesh, p: int,
                       bundle: Optional[FlatBundle] = None) -> int:
    rank = 1 if bundle is None else bundle.rank
    return int((~mesh.interior_mask(p)).sum()) * rank


def hodge_laplacian(mesh: SimplicialMesh, p: int, bc: str = "neumann",
                    bundle: Optional[FlatBundle] = None) -> HodgeOperator:
    """Build the weak Hodge Laplacian at degree p under the given BC.

    Instances are cached per (mesh, p, bc, bundle) so factorizations and
    harmonic bases are shared across calls.
    """
    key = ("hodge", p, bc, _bkey(bundle))
    cache = _cache(mesh)
    if key not in cache:
        cache[key] = HodgeOperator(mesh, p, bc, bundle)
    return cache[key]
