"""Harmonic spaces, potentials, the du = f solver, and Hodge decomposition.

The solver follows a two-potential construction: split f against the
Dirichlet harmonic space, take the Dirichlet potential of the orthogonal
part, correct by a Neumann potential, and read off u as a codifferential.
The result is automatically orthogonal to closed forms, which makes it the
minimal-norm solution up to discretization; when f is closed but not exact
the leftover harmonic component is reported as an obstruction instead of
being silently dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .bundles import FlatBundle
from .errors import (InadmissibleExponents, InvalidParams, NotClosed,
                     NotOrthogonal, ObstructionNonExact)
from .inequalities import ExponentTuple, admissible
from .mesh import SimplicialMesh
from .operators import (Cochain, HodgeOperator, codifferential,
                        exterior_derivative, hodge_laplacian, lq_norm,
                        mass_matrix)

_ORTHO_RTOL = 1e-8
_EXACT_RTOL = 1e-6


@dataclass
class HarmonicSpace:
    """Mass-orthonormal basis of the BC-restricted harmonic p-forms."""

    p: int
    bc: str  # "D" or "N"
    basis: List[Cochain]
    dimension: int
    operator: HodgeOperator

    def project_coefficients(self, values: np.ndarray) -> np.ndarray:
        """Coefficients of the mass-orthogonal projection onto the basis."""
        if self.dimension == 0:
            return np.zeros(0)
        op = self.operator
        w = mass_matrix(op.mesh, self.p, op.bundle) @ np.asarray(
            values, dtype=float).reshape(-1)
        return op.harmonics().T @ w[op.idx[self.p]]


def _bc_name(bc: str) -> str:
    low = bc.lower()
    if low in ("d", "dirichlet"):
        return "dirichlet"
    if low in ("n", "neumann"):
        return "neumann"
    raise InvalidParams(f"unknown boundary condition {bc!r}")


def harmonic_space(mesh: SimplicialMesh, p: int,
                   bundle: Optional[FlatBundle] = None,
                   bc: str = "N") -> HarmonicSpace:
    """Kernel of the BC-restricted Hodge Laplacian at degree p."""
    kind = _bc_name(bc)
    op = hodge_laplacian(mesh, p, kind, bundle)
    h = op.harmonics()
    basis = [op.cochain(h[:, j]) for j in range(h.shape[1])]
    for j in range(h.shape[1]):
        du = op.d(h[:, j])
        if du.size and op.M_up is not None:
            nrm = math.sqrt(max(float(du @ (op.M_up @ du)), 0.0))
            if nrm > _ORTHO_RTOL:
                raise InvalidParams(f"harmonic basis element {j} has "
                                    f"|db| = {nrm:.2e}")
        su = op.codifferential(h[:, j])
        if su.size and op.M_down is not None:
            nrm = math.sqrt(max(float(su @ (op.M_down @ su)), 0.0))
            if nrm > _ORTHO_RTOL:
                raise InvalidParams(f"harmonic basis element {j} has "
                                    f"|d*b| = {nrm:.2e}")
    return HarmonicSpace(p=p, bc="D" if kind == "dirichlet" else "N",
                         basis=basis, dimension=h.shape[1], operator=op)


def _mass_norm(op: HodgeOperator, dof: np.ndarray) -> float:
    return math.sqrt(max(float(dof @ (op.M @ dof)), 0.0))


def potential(f: Cochain, kind: str, project: bool = False) -> Cochain:
    """Solve the Laplace equation for f under Dirichlet or Neumann BC.

    The returned cochain phi satisfies the weak equation against the
    BC-restricted test space, vanishes on boundary simplices in the
    Dirichlet case, and is mass-orthogonal to the harmonic space.  Unless
    ``project`` is set, f carrying a harmonic component above 1e-8 relative
    raises NotOrthogonal.
    """
    kind = _bc_name(kind)
    op = hodge_laplacian(f.mesh, f.p, kind, f.bundle)
    w = mass_matrix(f.mesh, f.p, f.bundle) @ f.flat
    b = w[op.idx[f.p]]
    phi, mu = op.solve(b, return_multipliers=True)
    fnorm = _mass_norm(op, op.restrict(f.values))
    if not project and mu.size and np.linalg.norm(mu) > _ORTHO_RTOL * max(
            fnorm, 1e-300):
        raise NotOrthogonal(
            f"harmonic component {np.linalg.norm(mu):.2e} exceeds tolerance; "
            "pass project=True to remove it")
    return op.cochain(phi)


@dataclass
class SolveReport:
    """Outcome of a du = f solve."""

    residual: float
    q: float
    k: float
    norm_ratio: float
    obstruction_norm: float
    u_norm_q: float = 0.0
    f_norm_k: float = 0.0
    projection_correction: float = 0.0
    extra: dict = field(default_factory=dict)


def solve_d_equation(f: Cochain, q: float, k: float):
    """Solve du = f for a d-closed p-cochain f, with Lq/Lk norm reporting.

    Returns ``(u, report)`` with u of degree p-1.  Raises NotClosed when
    df != 0 and ObstructionNonExact when f is closed but not exact; the
    attached report carries the harmonic obstruction norm.
    """
    mesh, p, bundle = f.mesh, f.p, f.bundle
    n = mesh.dim
    if p < 1:
        raise InvalidParams("du = f needs degree p >= 1")
    t = ExponentTuple(q=q, k=k, n=n)
    if not admissible(t, "thm_lqp"):
        raise InadmissibleExponents(f"(q, k) = ({q}, {k}) rejected for n={n}")

    opN = hodge_laplacian(mesh, p, "neumann", bundle)
    m_p = mass_matrix(mesh, p, bundle)
    fflat = f.flat
    f_mass = math.sqrt(max(float(fflat @ (m_p @ fflat)), 0.0))
    if f_mass == 0.0:
        u = Cochain(mesh, p - 1,
                    np.zeros(mesh.num_simplices(p - 1) if bundle is None
                             else (mesh.num_simplices(p - 1), bundle.rank)),
                    bundle)
        return u, SolveReport(residual=0.0, q=q, k=k, norm_ratio=0.0,
                              obstruction_norm=0.0)

    if p < n:
        df = exterior_derivative(mesh, p, bundle) @ fflat
        m_up = mass_matrix(mesh, p + 1, bundle)
        df_mass = math.sqrt(max(float(df @ (m_up @ df)), 0.0))
        if df_mass > _ORTHO_RTOL * f_mass:
            raise NotClosed(f"|df|/|f| = {df_mass / f_mass:.2e}")

    # Dirichlet potential of f2 = f minus its Dirichlet-harmonic part;
    # the bordered solve performs that projection itself.
    phi = potential(f, "dirichlet", project=True)
    opD = hodge_laplacian(mesh, p, "dirichlet", bundle)
    sigma_d = opD.codifferential(opD.restrict(phi.values))
    sigma_full = np.zeros(mesh.num_simplices(p - 1) *
                          (1 if bundle is None else bundle.rank))
    if opD.has_down:
        sigma_full[opD.idx[p - 1]] = sigma_d
    g = fflat - exterior_derivative(mesh, p - 1, bundle) @ sigma_full

    # Neumann potential of g; multipliers = harmonic obstruction of f
    bN = m_p @ g
    psi, mu = opN.solve(bN, return_multipliers=True)
    obstruction = float(np.linalg.norm(mu))

    u_flat = opN.codifferential(psi) + sigma_full

    # enforce orthogonality to harmonic (p-1)-forms (a near-no-op: both
    # terms of u are codifferentials)
    opN_dn = hodge_laplacian(mesh, p - 1, "neumann", bundle)
    h_dn = opN_dn.harmonics()
    correction = 0.0
    if h_dn.shape[1]:
        m_dn = mass_matrix(mesh, p - 1, bundle)
        coeff = h_dn.T @ (m_dn @ u_flat)
        u_flat = u_flat - h_dn @ coeff
        correction = float(np.linalg.norm(coeff))

    du = exterior_derivative(mesh, p - 1, bundle) @ u_flat
    diff = du - fflat
    residual = math.sqrt(max(float(diff @ (m_p @ diff)), 0.0)) / f_mass

    if bundle is None:
        u = Cochain(mesh, p - 1, u_flat, None)
    else:
        u = Cochain(mesh, p - 1, u_flat.reshape(-1, bundle.rank), bundle)
    f_k = lq_norm(mesh, p, f.values, k, bundle)
    u_q = lq_norm(mesh, p - 1, u.values, q, bundle)
    report = SolveReport(residual=residual, q=q, k=k,
                         norm_ratio=u_q / f_k if f_k > 0 else 0.0,
                         obstruction_norm=obstruction,
                         u_norm_q=u_q, f_norm_k=f_k,
                         projection_correction=correction)
    if residual > _EXACT_RTOL:
        raise ObstructionNonExact(
            f"du = f fails at relative residual {residual:.2e} "
            f"(harmonic obstruction {obstruction:.2e})", report=report)
    return u, report


@dataclass
class HodgeDecomposition:
    """f = exact + coexact + harmonic, mutually mass-orthogonal."""

    exact: Cochain
    coexact: Cochain
    harmonic: Cochain
    a: Optional[Cochain]  # exact = d a
    b: Optional[Cochain]  # coexact = d* b
    reconstruction_error: float


def hodge_decompose(f: Cochain) -> HodgeDecomposition:
    """Three-way Hodge decomposition under the natural (Neumann) form."""
    mesh, p, bundle = f.mesh, f.p, f.bundle
    rank = 1 if bundle is None else bundle.rank
    op = hodge_laplacian(mesh, p, "neumann", bundle)
    m_p = mass_matrix(mesh, p, bundle)
    fflat = f.flat
    h = op.harmonics()
    hc = h @ (h.T @ (m_p @ fflat)) if h.shape[1] else np.zeros_like(fflat)
    psi, _ = op.solve(m_p @ fflat, return_multipliers=True)

    def as_cochain(q, flat):
        vals = flat if rank == 1 else flat.reshape(-1, rank)
        return Cochain(mesh, q, vals, bundle)

    if op.has_down:
        a_flat = op.codifferential(psi)
        exact_flat = exterior_derivative(mesh, p - 1, bundle) @ a_flat
        a = as_cochain(p - 1, a_flat)
    else:
        exact_flat = np.zeros_like(fflat)
        a = None
    if op.has_up:
        b_flat = op.d(psi)
        coexact_flat = codifferential(mesh, p, bundle).apply(b_flat)
        b = as_cochain(p + 1, b_flat)
    else:
        coexact_flat = np.zeros_like(fflat)
        b = None
    recon = exact_flat + coexact_flat + hc
    diff = recon - fflat
    fn = math.sqrt(max(float(fflat @ (m_p @ fflat)), 0.0))
    err = math.sqrt(max(float(diff @ (m_p @ diff)), 0.0)) / max(fn, 1e-300)
    return HodgeDecomposition(exact=as_cochain(p, exact_flat),
                              coexact=as_cochain(p, coexact_flat),
                              harmonic=as_cochain(p, hc),
                              a=a, b=b, reconstruction_error=err)
