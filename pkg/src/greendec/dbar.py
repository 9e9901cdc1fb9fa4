"""Planar finite-difference dbar model: weighted minimal solutions and the
improved L2 estimate.

Complex dimension is fixed at one with a trivial line bundle carrying the
metric e^{-phi}.  Forms reduce to scalar coefficient fields and every metric
factor (|dz|^2 = 2, |dzbar wedge dz|^2 = 4) multiplies both sides of the
inequalities below, so the checks work with plain coefficients:

* u ~ v dz on interior nodes N,
* f ~ g dzbar wedge dz on the forward-stencil rows R,
* dbar: N -> R is the one-sided difference (d_x + i d_y)/2 stored as a
  complex CSR matrix (equivalent to 2x2 real blocks),
* A = (discrete Laplacian of phi)/4, the curvature scalar of the weight.

All L2 norms are taken against the weight e^{-phi} times the cell area h^2;
boundary traces use staircase boundary nodes weighted by h (the O(1)
staircase-versus-smooth-perimeter factor is absorbed into the empirical
constants).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from .errors import (BaselineViolated, DisconnectedInterior, InvalidParams,
                     RankDeficient)
from .rng import PortableRng

DELTA_GRID = np.logspace(-6.0, 2.0, 81)


# ---------------------------------------------------------------------------
# domain


@dataclass
class PlanarDomain:
    """Grid sample of a defining function and a weight on a bounding box.

    epsilon records the minimum of the discrete five-point Laplacian of phi
    over interior nodes; strict subharmonicity (epsilon > 0) is required
    only by the curvature-weighted estimates, not by the domain itself.
    """

    h: float
    origin: np.ndarray          # coordinates of grid node (0, 0)
    rho: np.ndarray             # (nx, ny)
    phi: np.ndarray             # (nx, ny)
    mask: np.ndarray            # (nx, ny) bool, rho < 0
    epsilon: float

    @property
    def n_interior(self) -> int:
        return int(self.mask.sum())

    def coordinates(self) -> np.ndarray:
        nx, ny = self.mask.shape
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        return self.origin[None, None, :] + self.h * np.stack(
            [ii, jj], axis=-1)


def _five_point_laplacian(phi: np.ndarray, h: float) -> np.ndarray:
    lap = np.full_like(phi, np.nan)
    lap[1:-1, 1:-1] = (phi[2:, 1:-1] + phi[:-2, 1:-1] + phi[1:-1, 2:]
                       + phi[1:-1, :-2] - 4.0 * phi[1:-1, 1:-1]) / h ** 2
    return lap


def planar_disk(h: float, radius: float = 1.0,
                weight: Union[str, Callable] = "abs2") -> PlanarDomain:
    """Disk {|z| < radius} sampled on a uniform grid with margin 2h.

    weight: "abs2" for phi = |z|^2 (Delta phi = 4 exactly), "zero" for the
    unweighted case, or a callable phi(x, y).
    """
    if h <= 0 or radius <= 0:
        raise InvalidParams("need h > 0 and radius > 0")
    half = radius + 2.0 * h
    n_side = int(np.ceil(2.0 * half / h)) + 1
    origin = np.array([-half, -half])
    ii, jj = np.meshgrid(np.arange(n_side), np.arange(n_side), indexing="ij")
    x = origin[0] + h * ii
    y = origin[1] + h * jj
    rho = x ** 2 + y ** 2 - radius ** 2
    if weight == "abs2":
        phi = x ** 2 + y ** 2
    elif weight == "zero":
        phi = np.zeros_like(x)
    elif callable(weight):
        phi = np.asarray(weight(x, y), dtype=float)
    else:
        raise InvalidParams(f"unknown weight spec {weight!r}")
    mask = rho < 0.0
    _check_connected(mask)
    lap = _five_point_laplacian(phi, h)
    eps = float(np.nanmin(np.where(mask, lap, np.nan)))
    return PlanarDomain(h=h, origin=origin, rho=rho, phi=phi, mask=mask,
                        epsilon=eps)


def _check_connected(mask: np.ndarray):
    idx = -np.ones(mask.shape, dtype=np.int64)
    n = int(mask.sum())
    if n == 0:
        raise DisconnectedInterior("interior mask is empty")
    idx[mask] = np.arange(n)
    rows, cols = [], []
    right = mask[:-1, :] & mask[1:, :]
    up = mask[:, :-1] & mask[:, 1:]
    rows.extend(idx[:-1, :][right]); cols.extend(idx[1:, :][right])
    rows.extend(idx[:, :-1][up]); cols.extend(idx[:, 1:][up])
    g = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp = connected_components(g, directed=False)[0]
    if ncomp != 1:
        raise DisconnectedInterior(
            f"interior mask splits into {ncomp} components")


# ---------------------------------------------------------------------------
# system


@dataclass
class DbarSystem:
    """Forward-difference dbar with weighted inner products."""

    domain: PlanarDomain
    node_index: np.ndarray      # (nx, ny) -> N index or -1
    node_ij: np.ndarray         # (N, 2) grid coordinates
    rows_of: np.ndarray         # (R,) node index of each dbar row
    dbar: sp.csr_matrix         # (R, N) complex128
    weight_node: np.ndarray     # (N,) e^{-phi}
    weight_row: np.ndarray      # (R,)
    a_row: np.ndarray           # (R,) Delta phi / 4 at row nodes
    boundary_nodes: np.ndarray  # (B,) node indices with an exterior 4-neighbor
    backward_nodes: np.ndarray  # (R2,) nodes whose -x,-y neighbors are interior
    meta: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return self.domain.h

    @property
    def n_nodes(self) -> int:
        return self.node_ij.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rows_of.size

    def node_coordinates(self) -> np.ndarray:
        return self.domain.origin[None, :] + self.h * self.node_ij

    def row_coordinates(self) -> np.ndarray:
        return self.node_coordinates()[self.rows_of]

    # -- norms --------------------------------------------------------------

    def node_norm(self, u: np.ndarray) -> float:
        """Weighted L2 norm of a node field."""
        return float(np.sqrt((np.abs(u) ** 2 * self.weight_node).sum()
                             * self.h ** 2))

    def row_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt((np.abs(f) ** 2 * self.weight_row).sum()
                             * self.h ** 2))

    def trace_norm(self, u: np.ndarray) -> float:
        """Staircase boundary L2 norm, h-weighted."""
        b = self.boundary_nodes
        return float(np.sqrt((np.abs(u[b]) ** 2
                              * self.weight_node[b]).sum() * self.h))

    def curvature_pairing(self, f: np.ndarray) -> float:
        """N_f = sum |f|^2 e^{-phi} / A * cell area over rows."""
        if self.a_row.min() <= 0.0:
            raise InvalidParams(
                "curvature pairing needs strictly subharmonic weight")
        return float(((np.abs(f) ** 2 / self.a_row)
                      * self.weight_row).sum() * self.h ** 2)

    # -- operators ----------------------------------------------------------

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.dbar @ u

    def adjoint_apply(self, v: np.ndarray) -> np.ndarray:
        """Exact weighted matrix adjoint: <dbar u, v>_w = <u, adjoint v>_w."""
        return (self.dbar.conj().T @ (self.weight_row * v)) / self.weight_node

    def formal_codifferential(self, f: np.ndarray) -> np.ndarray:
        """Interior-stencil weighted adjoint of the (1,0) derivative.

        Backward differences of e^{-phi} f at nodes whose -x and -y
        neighbors are interior; boundary layers are excluded so constants
        map to zero in the unweighted case.  Returns values on
        ``backward_nodes``.
        """
        nx, ny = self.domain.mask.shape
        g = np.zeros((nx, ny), dtype=complex)
        ij = self.node_ij
        g[ij[:, 0], ij[:, 1]] = self.weight_node * f
        b = self.node_ij[self.backward_nodes]
        gx = g[b[:, 0], b[:, 1]] - g[b[:, 0] - 1, b[:, 1]]
        gy = g[b[:, 0], b[:, 1]] - g[b[:, 0], b[:, 1] - 1]
        val = (gx + 1j * gy) / (2.0 * self.h)
        return val / self.weight_node[self.backward_nodes]

    def codifferential_norm(self, f: np.ndarray) -> float:
        v = self.formal_codifferential(f)
        w = self.weight_node[self.backward_nodes]
        return float(np.sqrt((np.abs(v) ** 2 * w).sum() * self.h ** 2))


def build_system(domain: PlanarDomain) -> DbarSystem:
    """Assemble the forward-difference dbar operator and weights."""
    mask = domain.mask
    _check_connected(mask)
    h = domain.h
    nx, ny = mask.shape
    n = int(mask.sum())
    node_index = -np.ones((nx, ny), dtype=np.int64)
    node_index[mask] = np.arange(n)
    ii, jj = np.nonzero(mask)
    node_ij = np.column_stack([ii, jj])

    fwd_ok = mask.copy()
    fwd_ok[:-1, :] &= mask[1:, :]
    fwd_ok[-1, :] = False
    fwd_ok2 = fwd_ok.copy()
    fwd_ok2[:, :-1] &= mask[:, 1:]
    fwd_ok2[:, -1] = False
    ri, rj = np.nonzero(fwd_ok2)
    rows_of = node_index[ri, rj]
    r = rows_of.size
    rr = np.arange(r)
    data = np.concatenate([
        np.full(r, -(1.0 + 1.0j) / (2.0 * h)),
        np.full(r, 1.0 / (2.0 * h), dtype=complex),
        np.full(r, 1.0j / (2.0 * h)),
    ])
    cols = np.concatenate([node_index[ri, rj], node_index[ri + 1, rj],
                           node_index[ri, rj + 1]])
    dbar = sp.csr_matrix((data, (np.tile(rr, 3), cols)), shape=(r, n))

    phi_nodes = domain.phi[ii, jj]
    weight_node = np.exp(-phi_nodes)
    weight_row = weight_node[rows_of]
    lap = _five_point_laplacian(domain.phi, h)
    a_row = lap[ri, rj] / 4.0

    ext = ~mask
    bmask = mask & (np.roll(ext, 1, 0) | np.roll(ext, -1, 0)
                    | np.roll(ext, 1, 1) | np.roll(ext, -1, 1))
    # roll wraps; nodes on the box frame are boundary by construction
    bmask[0, :] |= mask[0, :]
    bmask[-1, :] |= mask[-1, :]
    bmask[:, 0] |= mask[:, 0]
    bmask[:, -1] |= mask[:, -1]
    boundary_nodes = node_index[bmask]

    bwd_ok = mask.copy()
    bwd_ok[1:, :] &= mask[:-1, :]
    bwd_ok[0, :] = False
    bwd_ok[:, 1:] &= mask[:, :-1]
    bwd_ok[:, 0] = False
    backward_nodes = node_index[bwd_ok]

    system = DbarSystem(domain=domain, node_index=node_index,
                        node_ij=node_ij, rows_of=rows_of, dbar=dbar,
                        weight_node=weight_node, weight_row=weight_row,
                        a_row=a_row, boundary_nodes=boundary_nodes,
                        backward_nodes=backward_nodes)
    # first-order consistency gate on the holomorphic sample z^2
    z = system.node_coordinates() @ np.array([1.0, 1.0j])
    resid = np.abs(system.apply(z ** 2)).max() if r else 0.0
    if resid > 10.0 * h:
        raise InvalidParams(
            f"dbar consistency check failed: |dbar z^2| = {resid:.3e}")
    system.meta["z2_residual"] = float(resid)
    return system


# ---------------------------------------------------------------------------
# minimal solutions


@dataclass
class MinimalSolveReport:
    residual: float
    u_norm: float
    f_norm: float


def minimal_solution(system: DbarSystem, f: np.ndarray):
    """Weighted-minimal-norm u with dbar u = f via the normal equations.

    Minimizing the weighted norm subject to the exact constraint gives
    u = W^{-1} dbar^H mu with (dbar W^{-1} dbar^H) mu = f, where W is the
    diagonal of node weights.  The cell area cancels and is omitted.
    Returns (u, report).
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (system.n_rows,):
        raise InvalidParams("data must live on the dbar rows")
    fn = system.row_norm(f)
    if fn == 0.0:
        return np.zeros(system.n_nodes, dtype=complex), \
            MinimalSolveReport(0.0, 0.0, 0.0)
    lu = _normal_lu(system)
    mu = lu.solve(f)
    u = (system.dbar.conj().T @ mu) / system.weight_node
    resid = system.row_norm(system.apply(u) - f) / fn
    report = MinimalSolveReport(residual=float(resid),
                                u_norm=system.node_norm(u), f_norm=fn)
    if not np.isfinite(resid) or resid > 1e-10:
        raise RankDeficient(
            f"constraint residual {resid:.3e} exceeds 1e-10", report=report)
    return u, report


def _normal_lu(system: DbarSystem):
    if "normal_lu" not in system.meta:
        winv = sp.diags(1.0 / system.weight_node)
        g = system.dbar @ winv @ system.dbar.conj().T
        system.meta["normal_lu"] = splu(g.tocsc())
    return system.meta["normal_lu"]


# ---------------------------------------------------------------------------
# ensembles


def bandlimited_ensemble(system: DbarSystem, count: int = 30, seed: int = 0,
                         degree: int = 3,
                         where: str = "rows") -> List[np.ndarray]:
    """Random low-degree polynomials in z and conj(z) sampled on the grid."""
    if count < 1:
        raise InvalidParams("need count >= 1")
    if where not in ("rows", "nodes"):
        raise InvalidParams(f"unknown sample location {where!r}")
    coords = (system.row_coordinates() if where == "rows"
              else system.node_coordinates())
    z = coords @ np.array([1.0, 1.0j])
    powers = [(m, k) for m in range(degree + 1) for k in range(degree + 1)
              if m + k <= degree]
    basis = np.column_stack([z ** m * np.conj(z) ** k for m, k in powers])
    rng = PortableRng(seed)
    samples = []
    for _ in range(count):
        c = (rng.standard_normal(len(powers))
             + 1j * rng.standard_normal(len(powers)))
        samples.append(basis @ c)
    return samples


# ---------------------------------------------------------------------------
# improved weighted estimate


@dataclass
class ImprovedEstimateRow:
    sample: int
    f_norm_sq: float
    curvature_pairing: float
    u_norm_sq: float
    delta_hat: float


@dataclass
class ImprovedEstimateReport:
    h: float
    delta_hat: float
    rows: List[ImprovedEstimateRow]


def improved_estimate_check(system: DbarSystem,
                            ensemble: Optional[Sequence[np.ndarray]] = None,
                            delta_grid: Optional[np.ndarray] = None,
                            count: int = 30, seed: int = 0,
                            require_positive: bool = True
                            ) -> ImprovedEstimateReport:
    """Largest delta with |u|^2 <= |f| / sqrt(|f|^2 + delta N_f) * N_f.

    The delta = 0 baseline |u|^2 <= N_f must hold for every sample; a
    violation indicates a discretization bug and raises BaselineViolated.
    With require_positive the minimum delta-hat over the ensemble must
    also clear the bottom of the grid (single-spike data is exempted by
    callers since it saturates the baseline).
    """
    if system.domain.epsilon <= 0.0 or system.a_row.min() <= 0.0:
        raise InvalidParams(
            "improved estimate needs a strictly subharmonic weight")
    if delta_grid is None:
        delta_grid = DELTA_GRID
    delta_grid = np.asarray(delta_grid, dtype=float)
    if ensemble is None:
        ensemble = bandlimited_ensemble(system, count=count, seed=seed)
    rows = []
    for i, f in enumerate(ensemble):
        u, rep = minimal_solution(system, f)
        u2 = rep.u_norm ** 2
        f2 = rep.f_norm ** 2
        if f2 == 0.0:
            continue
        nf = system.curvature_pairing(f)
        if u2 > nf * (1.0 + 1e-10):
            raise BaselineViolated(
                f"sample {i}: |u|^2 = {u2:.6e} exceeds N_f = {nf:.6e}")
        dhat = _delta_witness(u2, f2, nf, delta_grid)
        rows.append(ImprovedEstimateRow(sample=i, f_norm_sq=f2,
                                        curvature_pairing=nf, u_norm_sq=u2,
                                        delta_hat=dhat))
    if not rows:
        raise InvalidParams("ensemble contained no nonzero samples")
    dmin = min(r.delta_hat for r in rows)
    if require_positive and dmin <= 0.0:
        raise BaselineViolated(
            "improved bound failed at the smallest grid delta")
    return ImprovedEstimateReport(h=system.h, delta_hat=dmin, rows=rows)


def _delta_witness(u2: float, f2: float, nf: float,
                   delta_grid: np.ndarray) -> float:
    """Largest grid delta satisfying the improved bound (0.0 if none)."""
    bound = np.sqrt(f2) / np.sqrt(f2 + delta_grid * nf) * nf
    ok = u2 <= bound
    return float(delta_grid[ok][-1]) if ok.any() else 0.0


def curvature_monotonicity_check(system: DbarSystem,
                                 ensemble: Optional[Sequence[np.ndarray]] = None,
                                 count: int = 12, seed: int = 3) -> bool:
    """Doubling A must not shrink any sample's scale-free witness.

    delta enters the bound only through the product delta * N_f, so the
    raw witness scales like N_f (doubling A halves both) and the stable
    quantity is delta-hat per unit N_f^{-1}.  Exactly: delta-hat equals
    (|f|^2/N_f)(N_f^2/|u|^4 - 1), so halving N_f multiplies delta-hat by
    (m^2 - 4)/(2 m^2 - 2) with m = N_f/|u|^2, which stays within one grid
    step of 1/2 whenever the baseline margin m exceeds about 3; a second
    step absorbs witness quantization.
    """
    if ensemble is None:
        ensemble = bandlimited_ensemble(system, count=count, seed=seed)
    step = DELTA_GRID[1] / DELTA_GRID[0]
    for f in ensemble:
        u, rep = minimal_solution(system, f)
        if rep.f_norm == 0.0:
            continue
        u2, f2 = rep.u_norm ** 2, rep.f_norm ** 2
        nf = system.curvature_pairing(f)
        base = _delta_witness(u2, f2, nf, DELTA_GRID)
        doubled = _delta_witness(u2, f2, nf / 2.0, DELTA_GRID)
        if doubled / (nf / 2.0) < base / nf / step ** 2 * (1.0 - 1e-12):
            return False
    return True


# ---------------------------------------------------------------------------
# unweighted-style Sobolev bound (codifferential + boundary trace)


@dataclass
class DbarSobolevReport:
    h: float
    delta_hat: float
    ensemble_size: int
    skipped: int
    lhs: List[float]
    rhs: List[float]


def l2_sobolev_check(system: DbarSystem,
                     ensemble: Optional[Sequence[np.ndarray]] = None,
                     count: int = 30, seed: int = 1) -> DbarSobolevReport:
    """Empirical delta-hat for |f| <= C (|codifferential f| + trace of f).

    delta-hat is the min over the ensemble of RHS / LHS with all norms
    weighted; f samples live on interior nodes.  Samples with vanishing
    LHS are skipped.
    """
    if ensemble is None:
        ensemble = bandlimited_ensemble(system, count=count, seed=seed,
                                        where="nodes")
    lhs_list, rhs_list = [], []
    skipped = 0
    for f in ensemble:
        f = np.asarray(f, dtype=complex)
        if f.shape != (system.n_nodes,):
            raise InvalidParams("samples must live on interior nodes")
        lhs = system.node_norm(f)
        if lhs <= 1e-14 * max(1.0, np.abs(f).max()):
            skipped += 1
            continue
        rhs = system.codifferential_norm(f) + system.trace_norm(f)
        lhs_list.append(lhs)
        rhs_list.append(rhs)
    if not lhs_list:
        raise InvalidParams("all ensemble samples were degenerate")
    ratios = np.array(rhs_list) / np.array(lhs_list)
    return DbarSobolevReport(h=system.h, delta_hat=float(ratios.min()),
                             ensemble_size=len(ensemble), skipped=skipped,
                             lhs=lhs_list, rhs=rhs_list)


def adjoint_consistency_check(system: DbarSystem, pairs: int = 100,
                              seed: int = 7) -> float:
    """Max relative defect of <dbar u, v>_w = <u, dbar* v>_w over random
    pairs."""
    rng = PortableRng(seed)
    worst = 0.0
    for _ in range(pairs):
        u = (rng.standard_normal(system.n_nodes)
             + 1j * rng.standard_normal(system.n_nodes))
        v = (rng.standard_normal(system.n_rows)
             + 1j * rng.standard_normal(system.n_rows))
        left = np.vdot(v * system.weight_row, system.apply(u)) * system.h ** 2
        right = np.vdot(system.adjoint_apply(v) * system.weight_node,
                        u) * system.h ** 2
        scale = max(abs(left), abs(right), 1e-30)
        worst = max(worst, abs(left - right) / scale)
    return worst
