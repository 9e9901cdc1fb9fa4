"""Columns of the discrete Dirichlet Green operator and kernel statistics.

A Green column is the Galerkin solve A u = e_s with A the Dirichlet form of
the Hodge Laplacian and e_s a coefficient unit load.  Tested against Whitney
basis forms, e_s is the current of unit density carried by the source
simplex (an exact point mass for 0-forms), so after dividing by the source
p-volume the interpolated column samples the continuous kernel pointwise.
Against coefficient vectors, applying the cochain Laplacian M^{-1}A to a
column returns M^{-1}e_s, the mass-normalized delta; consequently
f = G (M Delta f) holds as a literal matrix identity whenever f carries
Dirichlet conditions, which is what ``integral_representation_check``
exercises in compact mode.

Decay statistics weight pointwise column norms by the graph distance to the
source; the near-diagonal region (distance below two mesh widths) is always
excluded because the discrete kernel is bounded where the continuum one is
singular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .bundles import FlatBundle
from .errors import (BallTooSmall, EmptySourceSet, InsufficientSamples,
                     InvalidParams, SingularOperator,
                     UnsupportedConfiguration)
from .mesh import SimplicialMesh
from .operators import (Cochain, HodgeOperator, boundary_dof_count,
                        codifferential, exterior_derivative,
                        harmonic_extension, hodge_laplacian, mass_matrix,
                        pointwise_norms)
from .rng import PortableRng

_CUTOFF_WIDTHS = 2.0
_RESIDUAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# kernel columns


@dataclass
class GreenKernel:
    """Dense Green columns on the full complex (zero on boundary DOFs)."""

    p: int
    source_dofs: np.ndarray       # full-complex DOF indices
    source_simplices: np.ndarray  # p-simplex index per source DOF
    columns: np.ndarray           # (full DOFs, sources)
    source_volumes: np.ndarray    # p-volume per source
    normalization: str
    operator: HodgeOperator
    bundle: Optional[FlatBundle] = None
    residuals: Optional[np.ndarray] = None

    @property
    def mesh(self) -> SimplicialMesh:
        return self.operator.mesh

    @property
    def n_sources(self) -> int:
        return int(self.source_dofs.size)

    def column(self, j: int) -> Cochain:
        values = self.columns[:, j]
        if self.bundle is not None:
            values = values.reshape(-1, self.bundle.rank)
        return Cochain(self.mesh, self.p, values, self.bundle)

    def symmetry_defect(self) -> float:
        """max |G(s,t) - G(t,s)| over source pairs, relative to max |G|."""
        block = self.columns[self.source_dofs, :]
        scale = max(np.abs(self.columns).max(), 1e-300)
        return float(np.abs(block - block.T).max() / scale)


def _quantile_picks(order: np.ndarray, count: int) -> np.ndarray:
    if order.size == 0 or count <= 0:
        return np.zeros(0, dtype=np.int64)
    picks = np.unique(np.round(
        np.linspace(0, order.size - 1, min(count, order.size))
    ).astype(np.int64))
    return order[picks]


def select_sources(mesh: SimplicialMesh, p: int, count: int = 16,
                   bundle: Optional[FlatBundle] = None) -> np.ndarray:
    """Interior source DOFs stratified by boundary-distance quantiles.

    Half the picks spread over all interior simplices (the decay weights
    need sources at varied boundary distance), half over the subset beyond
    the near-diagonal cutoff so distance fits keep enough clean sources.
    """
    interior = np.nonzero(mesh.interior_mask(p))[0]
    if interior.size == 0:
        raise EmptySourceSet(f"no interior {p}-simplices")
    delta = mesh.boundary_distance().at_simplices(p)[interior]
    order = interior[np.argsort(delta, kind="stable")]
    cutoff = _CUTOFF_WIDTHS * mesh.mesh_width()
    away = order[np.sort(delta, kind="stable") >= cutoff]
    simplices = np.unique(np.concatenate([
        _quantile_picks(order, count - count // 2),
        _quantile_picks(away, count // 2)]))
    rank = 1 if bundle is None else bundle.rank
    return simplices * rank  # fiber component 0


def green_columns(laplacian: HodgeOperator, mass: sp.spmatrix,
                  sources: Union[np.ndarray, Sequence[int], str],
                  orthogonalize: bool = False) -> GreenKernel:
    """Solve one Dirichlet column per source DOF; residual <= 1e-10 each."""
    op = laplacian
    mesh, p, bundle = op.mesh, op.p, op.bundle
    rank = 1 if bundle is None else bundle.rank
    idx = op.idx[p]
    if isinstance(sources, str):
        if sources != "all":
            raise InvalidParams(f"unknown source spec {sources!r}")
        dofs = idx.copy()
    else:
        dofs = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if dofs.size == 0:
        raise EmptySourceSet("green_columns needs at least one source")
    pos = {int(g): i for i, g in enumerate(idx)}
    try:
        local = np.asarray([pos[int(s)] for s in dofs], dtype=np.int64)
    except KeyError as e:
        raise InvalidParams(f"source DOF {e} is not an interior DOF") from e

    basis = op.harmonics()
    if basis.shape[1] > 0 and not orthogonalize:
        raise SingularOperator(
            f"Dirichlet Delta_{p} has a {basis.shape[1]}-dim kernel; "
            "pass orthogonalize=True to project loads")
    loads = np.zeros((op.ndof, dofs.size))
    loads[local, np.arange(dofs.size)] = 1.0
    if basis.shape[1] > 0:
        loads = loads - (op.M @ basis) @ (basis.T @ loads)
    cols_int = op.solve_many(loads)
    res = np.column_stack([op.apply(cols_int[:, j])
                           for j in range(dofs.size)]) - loads
    resid = np.linalg.norm(res, axis=0) / np.maximum(
        np.linalg.norm(loads, axis=0), 1e-300)
    worst = float(resid.max())
    if worst > _RESIDUAL_TOL:
        raise SingularOperator(f"Green column residual {worst:.3e} exceeds "
                               f"{_RESIDUAL_TOL:.0e}")
    columns = np.zeros((mesh.num_simplices(p) * rank, dofs.size))
    columns[idx, :] = cols_int
    simplices = dofs // rank
    vols = mesh.p_volumes(p)[simplices]
    return GreenKernel(
        p=p, source_dofs=dofs, source_simplices=simplices, columns=columns,
        source_volumes=vols,
        normalization=("coefficient unit load e_s: the Whitney-dual simplex "
                       "current; Delta column = mass-normalized delta"),
        operator=op, bundle=bundle, residuals=resid)


def green_kernel(mesh: SimplicialMesh, p: int,
                 sources: Union[np.ndarray, str, None] = None,
                 bundle: Optional[FlatBundle] = None,
                 count: int = 16, orthogonalize: bool = False) -> GreenKernel:
    """Convenience wrapper: Dirichlet operator plus stratified sources."""
    op = hodge_laplacian(mesh, p, "dirichlet", bundle)
    if sources is None:
        sources = select_sources(mesh, p, count, bundle)
    return green_columns(op, mass_matrix(mesh, p, bundle), sources,
                         orthogonalize)


# ---------------------------------------------------------------------------
# decay statistics


@dataclass
class DecayReport:
    mode: str
    p: int
    pairs_sampled: int
    fitted_slope: float
    empirical_constant: float
    resolution_hint: float
    d_constant: Optional[float] = None
    dstar_constant: Optional[float] = None
    slope_series: List[float] = field(default_factory=list)
    constant_series: List[float] = field(default_factory=list)
    cloud: Optional[np.ndarray] = None  # (2, K) pairs behind the statistic

    def __post_init__(self):
        if not self.slope_series:
            self.slope_series = [self.fitted_slope]
        if not self.constant_series:
            self.constant_series = [self.empirical_constant]


def merge_refinements(reports: List[DecayReport]) -> DecayReport:
    """Finest report carrying the coarse-to-fine series of both statistics."""
    if not reports:
        raise InvalidParams("no reports to merge")
    last = reports[-1]
    last.slope_series = [r.fitted_slope for r in reports]
    last.constant_series = [r.empirical_constant for r in reports]
    return last


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2 or np.ptp(x) < 1e-12:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


def distance_cache(kernel: GreenKernel,
                   cache: Optional[Dict[int, object]] = None
                   ) -> Dict[int, object]:
    """Graph distance fields keyed by source simplex id (reusable)."""
    mesh = kernel.mesh
    cache = {} if cache is None else cache
    for sid in kernel.source_simplices:
        sid = int(sid)
        if sid not in cache:
            verts = np.unique(mesh.simplices[kernel.p][sid])
            cache[sid] = mesh.distance_field(verts)
    return cache


def decay_report(kernel: GreenKernel, mesh: SimplicialMesh, mode: str,
                 distance: Optional[Dict[int, object]] = None) -> DecayReport:
    """Empirical surrogate for one kernel decay estimate.

    mode=kernel:          |G| against d^{2-n} (n>=3 slope fit) or 1+|ln d|.
    mode=kernel_boundary_weighted: |G| d^{n-1}/delta(x), n=2 analogue
                          |G| d / ((1+|ln d|) delta(x)).
    mode=derivative:      |d_y G| and |d*_y G| against d^{1-n} (n=2 with the
                          logarithmic factor); both maxima recorded.
    """
    if mode not in ("kernel", "kernel_boundary_weighted", "derivative"):
        raise InvalidParams(f"unknown decay mode {mode!r}")
    if mesh is not kernel.mesh:
        raise InvalidParams("kernel was computed on a different mesh")
    p, bundle = kernel.p, kernel.bundle
    n = mesh.dim
    width = mesh.mesh_width()
    cutoff = _CUTOFF_WIDTHS * width
    delta_src = mesh.boundary_distance().at_simplices(p)[
        kernel.source_simplices]
    away = delta_src >= cutoff
    if int(away.sum()) < 8:
        raise InsufficientSamples(
            f"only {int(away.sum())} sources lie {_CUTOFF_WIDTHS} mesh "
            "widths from the boundary; need 8")
    use = np.ones(kernel.n_sources, dtype=bool) if \
        mode == "kernel_boundary_weighted" else away
    fields = distance_cache(kernel, distance)
    delta_top = mesh.boundary_distance().at_tops()

    xs, ys, weighted = [], [], []
    wd, wds = [], []
    cx, cy = [], []
    for j in np.nonzero(use)[0]:
        sid = int(kernel.source_simplices[j])
        d_top = fields[sid].at_tops()
        vol = kernel.source_volumes[j]
        col = kernel.columns[:, j]
        shaped = col if bundle is None else col.reshape(-1, bundle.rank)
        keep = d_top >= cutoff
        if mode == "kernel_boundary_weighted":
            keep &= delta_top > 1e-12
        if not keep.any():
            continue
        d = d_top[keep]
        # slope fits use only pairs both of whose endpoints clear the
        # boundary by the pair distance, isolating the interior power law
        # from Dirichlet image suppression; the constants stay global
        clear = np.minimum(delta_top[keep], delta_src[j]) >= d
        if mode in ("kernel", "kernel_boundary_weighted"):
            v = pointwise_norms(mesh, p, shaped, bundle)[keep] / vol
            if mode == "kernel":
                if n >= 3:
                    weighted.append(v * d ** (n - 2))
                else:
                    weighted.append(v / (1.0 + np.abs(np.log(d))))
            else:
                dx = delta_top[keep]
                if n >= 3:
                    weighted.append(v * d ** (n - 1) / dx)
                else:
                    weighted.append(v * d / ((1.0 + np.abs(np.log(d))) * dx))
            pos = v > 1e-14 * max(v.max(), 1e-300)
            if mode == "kernel_boundary_weighted":
                cx.append(d)
                cy.append(weighted[-1])
            if n == 2 and mode == "kernel":
                xs.append(np.log(d[pos]))
                ys.append(v[pos])
                cx.append(d[pos])
                cy.append(v[pos])
            else:
                pos &= clear
                xs.append(np.log(d[pos]))
                ys.append(np.log(v[pos]))
                if mode == "kernel":
                    cx.append(d[pos])
                    cy.append(v[pos])
        else:
            log_weight = d ** (n - 1) if n >= 3 else \
                d / (1.0 + np.abs(np.log(d)))
            if p < mesh.dim:
                dcol = exterior_derivative(mesh, p, bundle) @ col
                dshape = dcol if bundle is None else \
                    dcol.reshape(-1, bundle.rank)
                vd = pointwise_norms(mesh, p + 1, dshape, bundle)[keep] / vol
            else:
                vd = np.zeros(int(keep.sum()))
            if p > 0:
                # the column carries Dirichlet conditions: use the matching
                # constrained codifferential, zero on boundary simplices
                # (the full-complex one would add a spurious surface layer)
                op = kernel.operator
                rk = 1 if bundle is None else bundle.rank
                scol = np.zeros(mesh.num_simplices(p - 1) * rk)
                scol[op.idx[p - 1]] = op.codifferential(op.restrict(col))
                sshape = scol if bundle is None else \
                    scol.reshape(-1, bundle.rank)
                vs = pointwise_norms(mesh, p - 1, sshape, bundle)[keep] / vol
            else:
                vs = np.zeros(int(keep.sum()))
            wd.append(vd * log_weight)
            wds.append(vs * log_weight)
            vmax = np.maximum(vd, vs)
            pos = (vmax > 1e-14 * max(vmax.max(), 1e-300)) & clear
            xs.append(np.log(d[pos]))
            ys.append(np.log(vmax[pos]))
            cx.append(d[pos])
            cy.append(vmax[pos])

    pairs = sum(w.size for w in (weighted if weighted else wd))
    if pairs < 8:
        raise InsufficientSamples("too few pairs beyond the cutoff")
    x = np.concatenate(xs) if xs else np.zeros(0)
    y = np.concatenate(ys) if ys else np.zeros(0)
    if x.size < 8:
        slope = math.nan  # clearance-gated cloud too small to fit
    elif mode == "kernel" and n == 2:
        # linear fit of |G| against 1+|ln d|; the constant is the max ratio
        slope = _fit_slope(1.0 + np.abs(x), y)
    else:
        slope = _fit_slope(x, y)
    cloud = np.vstack([np.concatenate(cx), np.concatenate(cy)]) if cx \
        else None
    if mode == "derivative":
        cd = float(max((w.max() for w in wd), default=0.0))
        cs = float(max((w.max() for w in wds), default=0.0))
        const = max(cd, cs)
        return DecayReport(mode=mode, p=p, pairs_sampled=pairs,
                           fitted_slope=slope, empirical_constant=const,
                           resolution_hint=width, d_constant=cd,
                           dstar_constant=cs, cloud=cloud)
    const = float(max(w.max() for w in weighted))
    if const < 0:
        raise InvalidParams("negative empirical constant")
    return DecayReport(mode=mode, p=p, pairs_sampled=pairs,
                       fitted_slope=slope, empirical_constant=const,
                       resolution_hint=width, cloud=cloud)


# ---------------------------------------------------------------------------
# integral representations


@dataclass
class RepresentationReport:
    mode: str
    p: int
    n_sources: int
    residual: float
    volume_term_max: float = 0.0
    boundary_term_max: float = 0.0


def integral_representation_check(f: Cochain, kernel: GreenKernel,
                                  mode: str = "compact",
                                  laplacian: Optional[np.ndarray] = None
                                  ) -> RepresentationReport:
    """Reconstruct f at the kernel sources from Green-column pairings.

    compact: f(s) = <column_s, A f>, exact for f with Dirichlet support.
    energy:  f(s) = <d f, d G_s> + <d* f, d* G_s>, the same identity
             written through the energy form.
    full:    0-forms only; volume term against a supplied pointwise
             Laplacian plus boundary quadrature of the one-sided normal
             derivative of each column (the Poisson kernel surrogate).
    """
    op = kernel.operator
    mesh, p, bundle = op.mesh, op.p, op.bundle
    if f.p != p or f.mesh is not mesh:
        raise InvalidParams("cochain and kernel live on different spaces")
    fflat = f.values.reshape(-1)
    scale = max(np.abs(fflat).max(), 1e-300)

    if mode in ("compact", "energy"):
        outside = np.setdiff1d(np.arange(fflat.size), op.idx[p])
        if outside.size and np.abs(fflat[outside]).max() > 1e-12 * scale:
            raise InvalidParams(
                "compact-mode cochain must vanish on boundary DOFs")
        fr = op.restrict(fflat)
        if mode == "compact":
            load = op.apply(fr)
            rec = kernel.columns[op.idx[p], :].T @ load
        else:
            rec = np.asarray([
                op.energy(fr, op.restrict(kernel.columns[:, j]))
                for j in range(kernel.n_sources)])
        truth = fflat[kernel.source_dofs]
        residual = float(np.abs(rec - truth).max() / scale)
        return RepresentationReport(mode=mode, p=p,
                                    n_sources=kernel.n_sources,
                                    residual=residual)

    if mode != "full":
        raise InvalidParams(f"unknown representation mode {mode!r}")
    if p != 0:
        raise UnsupportedConfiguration(
            "full boundary-term reconstruction is only defined for 0-forms")
    if bundle is not None:
        raise UnsupportedConfiguration("full mode needs the trivial bundle")
    if laplacian is None:
        laplacian = np.zeros_like(fflat)
    m0 = mass_matrix(mesh, 0)
    weak = m0 @ np.asarray(laplacian, dtype=float)
    vol_term = kernel.columns.T @ weak

    pois = _poisson_kernel_matrix(mesh, kernel)      # (sources, n_bd)
    bverts = np.nonzero(mesh.boundary_mask[0])[0]
    bterm = pois @ fflat[bverts]
    rec = vol_term + bterm
    truth = fflat[kernel.source_dofs]
    # the h-scale normal differences cannot resolve sources hugging the
    # boundary; apply the standard near-diagonal cutoff
    delta_src = mesh.boundary_distance().at_simplices(0)[
        kernel.source_simplices]
    use = delta_src >= _CUTOFF_WIDTHS * mesh.mesh_width()
    if not use.any():
        raise InsufficientSamples(
            "every source sits within the boundary cutoff")
    residual = float(np.abs(rec[use] - truth[use]).max() / scale)
    return RepresentationReport(
        mode=mode, p=p, n_sources=int(use.sum()), residual=residual,
        volume_term_max=float(np.abs(vol_term[use]).max() / scale),
        boundary_term_max=float(np.abs(bterm[use]).max() / scale))


def _boundary_vertex_normals(mesh: SimplicialMesh):
    """Inward unit normals and lumped arc weights at boundary vertices."""
    if mesh.dim != 2:
        raise UnsupportedConfiguration("boundary quadrature is 2D only")
    bedges = mesh.simplices[1][mesh.boundary_mask[1]]
    verts = mesh.vertices
    tang = verts[bedges[:, 1]] - verts[bedges[:, 0]]
    lengths = np.linalg.norm(tang, axis=1)
    normals = np.column_stack([-tang[:, 1], tang[:, 0]]) / lengths[:, None]
    # orient each edge normal toward the adjacent triangle's barycenter
    owner = mesh._lookup(1, bedges)
    tri_of_edge = np.full(mesh.num_simplices(1), -1, dtype=np.int64)
    ids1 = mesh.top_faces[1]
    for c in range(ids1.shape[1]):
        tri_of_edge[ids1[:, c]] = np.arange(ids1.shape[0])
    tris = mesh.simplices[mesh.dim][tri_of_edge[owner]]
    bary = mesh.vertices[tris].mean(axis=1)
    mid = 0.5 * (verts[bedges[:, 0]] + verts[bedges[:, 1]])
    flip = ((bary - mid) * normals).sum(axis=1) < 0
    normals[flip] *= -1.0

    bverts = np.nonzero(mesh.boundary_mask[0])[0]
    slot = -np.ones(verts.shape[0], dtype=np.int64)
    slot[bverts] = np.arange(bverts.size)
    nu = np.zeros((bverts.size, 2))
    w = np.zeros(bverts.size)
    for k in range(2):
        np.add.at(nu, slot[bedges[:, k]], normals)
        np.add.at(w, slot[bedges[:, k]], 0.5 * lengths)
    norms = np.linalg.norm(nu, axis=1)
    if norms.min() < 1e-12:
        raise InvalidParams("degenerate boundary normal")
    nu /= norms[:, None]
    return bverts, nu, w


def _interpolation_matrix(mesh: SimplicialMesh,
                          points: np.ndarray) -> sp.csr_matrix:
    """Barycentric interpolation of vertex cochains at arbitrary points."""
    tris = mesh.simplices[mesh.dim]
    corners = mesh.vertices[tris]          # (T, 3, 2)
    a = corners[:, 0]
    e1 = corners[:, 1] - a                 # (T, 2)
    e2 = corners[:, 2] - a
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    rows, cols, vals = [], [], []
    for i, pt in enumerate(points):
        r = pt[None, :] - a
        u = (r[:, 0] * e2[:, 1] - r[:, 1] * e2[:, 0]) / det
        v = (e1[:, 0] * r[:, 1] - e1[:, 1] * r[:, 0]) / det
        lam = np.column_stack([1.0 - u - v, u, v])
        inside = (lam >= -1e-10).all(axis=1)
        if not inside.any():
            raise InvalidParams(f"point {pt} lies outside the mesh")
        t = int(np.argmax(inside))
        rows.extend([i, i, i])
        cols.extend(tris[t].tolist())
        vals.extend(np.clip(lam[t], 0.0, None).tolist())
    return sp.csr_matrix((vals, (rows, cols)),
                         shape=(points.shape[0], mesh.vertices.shape[0]))


def _poisson_kernel_matrix(mesh: SimplicialMesh,
                           kernel: GreenKernel) -> np.ndarray:
    """-d/dnu of each column at boundary vertices, times lumped weights.

    One-sided second order using G = 0 on the boundary:
    dG/d(inward) ~ (4 G(b + h nu) - G(b + 2h nu)) / (2h).
    """
    bverts, nu, w = _boundary_vertex_normals(mesh)
    h = mesh.mesh_width()
    p1 = mesh.vertices[bverts] + h * nu
    p2 = mesh.vertices[bverts] + 2.0 * h * nu
    t1 = _interpolation_matrix(mesh, p1)
    t2 = _interpolation_matrix(mesh, p2)
    g1 = t1 @ kernel.columns               # (n_bd, sources)
    g2 = t2 @ kernel.columns
    dn = (4.0 * g1 - g2) / (2.0 * h)
    return (w[:, None] * dn).T             # (sources, n_bd)


# ---------------------------------------------------------------------------
# interior gradient estimate


@dataclass
class GradientReport:
    p: int
    radius: float
    n_tops: int
    ensemble: int
    skipped: int
    ratios: List[float]
    constant: float


def gradient_estimate_check(mesh: SimplicialMesh, p: int, center,
                            radius: float, ensemble: int = 20, seed: int = 0,
                            boundary_samples: Optional[
                                List[np.ndarray]] = None,
                            bundle: Optional[FlatBundle] = None
                            ) -> GradientReport:
    """Interior derivative bound for Delta_p-harmonic forms on a ball.

    Solves random-boundary harmonic extensions on B(center, radius) and
    reports the max of r * max(sup_{r/2}|df|, sup_{r/2}|d*f|) / sup_r |f|.
    """
    center = np.asarray(center, dtype=float)
    width = mesh.mesh_width()
    if radius < 8.0 * width:
        raise BallTooSmall(
            f"radius {radius:.3g} is below 8 mesh widths ({8 * width:.3g})")
    if mesh.has_boundary:
        bverts = np.nonzero(mesh.boundary_mask[0])[0]
        gap = np.linalg.norm(mesh.vertices[bverts] - center, axis=1).min()
        if gap < radius:
            raise BallTooSmall(
                f"ball of radius {radius:.3g} leaves the interior "
                f"(boundary at {gap:.3g})")
    if bundle is not None:
        raise UnsupportedConfiguration(
            "the harmonic-ball ensemble is defined for the trivial bundle")
    subbundle = None
    dist_v = np.linalg.norm(mesh.vertices - center, axis=1)
    top_mask = (dist_v[mesh.simplices[mesh.dim]] <= radius).all(axis=1)
    sub, vids, _ = mesh.submesh(top_mask)

    bary = sub.vertices[sub.simplices[sub.dim]].mean(axis=1)
    inner = np.linalg.norm(bary - center[None, :], axis=1) <= radius / 2.0
    if not inner.any():
        raise BallTooSmall("no top simplices inside the half ball")

    rng = PortableRng(seed)
    nb = boundary_dof_count(sub, p, subbundle)
    if boundary_samples is None:
        boundary_samples = [np.asarray(rng.standard_normal(nb))
                            for _ in range(ensemble)]
    ratios: List[float] = []
    skipped = 0
    for b in boundary_samples:
        u = harmonic_extension(sub, p, np.asarray(b, dtype=float), subbundle)
        sup_f = float(pointwise_norms(sub, p, u, subbundle).max())
        if sup_f <= 1e-300:
            skipped += 1
            continue
        sup_d = 0.0
        if p < sub.dim:
            du = exterior_derivative(sub, p, subbundle) @ u
            sup_d = float(pointwise_norms(sub, p + 1, du,
                                          subbundle)[inner].max())
        sup_s = 0.0
        if p > 0:
            su = codifferential(sub, p - 1, subbundle).apply(u)
            sup_s = float(pointwise_norms(sub, p - 1, su,
                                          subbundle)[inner].max())
        ratios.append(radius * max(sup_d, sup_s) / sup_f)
    if not ratios:
        raise InsufficientSamples("all harmonic samples vanished")
    const = float(max(ratios))
    if not math.isfinite(const):
        raise InvalidParams("gradient ratio overflowed")
    return GradientReport(p=p, radius=float(radius),
                          n_tops=int(top_mask.sum()),
                          ensemble=len(boundary_samples), skipped=skipped,
                          ratios=ratios, constant=const)
