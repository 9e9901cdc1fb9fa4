"""Exponent admissibility tables and ensemble Sobolev-type inequality checks.

The admissibility predicate reproduces three case tables exactly, strict
and non-strict branches included:

* ``cor_laplace``   volume exponent k against the Laplacian plus a boundary
                    exponent r;
* ``cor_gradient``  exponents k, r for df and d*f plus a boundary exponent s;
* ``thm_lqp``       the solvability window q(n - k) <= nk with 1 < q, k < oo.

``sobolev_check`` then estimates the inequality constant empirically:
delta_hat is the minimum of RHS/LHS over a seeded ensemble of smooth random
cochains (low Laplace eigenvector combinations, and discrete-harmonic
boundary lifts for 0-forms).  Eigenvector samples carry their Laplacian
structurally (sum of lambda_i c_i v_i), which keeps the RHS free of
mesh-boundary discretization spikes; d and d* are always applied honestly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .bundles import FlatBundle
from .errors import (EnsembleDegenerate, InadmissibleExponents, InvalidParams,
                     UnsupportedConfiguration)
from .mesh import SimplicialMesh
from .operators import (boundary_dof_count, codifferential,
                        exterior_derivative, harmonic_extension,
                        hodge_laplacian, lq_norm, mass_matrix,
                        pointwise_norms)
from .rng import PortableRng

INF = math.inf
_N_EIGEN = 20


@dataclass(frozen=True)
class ExponentTuple:
    """Integrability exponents; use math.inf for the essential sup."""

    q: float
    k: float
    r: float = 2.0
    s: float = 2.0
    n: int = 2

    def __post_init__(self):
        for name in ("q", "k", "r", "s"):
            v = getattr(self, name)
            if not (v >= 1.0):
                raise InvalidParams(f"exponent {name} = {v} must be >= 1")
        if self.n not in (2, 3):
            raise InvalidParams(f"dimension n = {self.n} not supported")


def _ratio(num: float, den: float) -> float:
    """num/den extended by +inf when the denominator is not positive."""
    if den <= 0.0:
        return INF
    return num / den


def admissible(t: ExponentTuple, which: str) -> bool:
    """Case-by-case admissibility of an exponent tuple."""
    n, q, k, r, s = t.n, t.q, t.k, t.r, t.s
    if which == "cor_laplace":
        if k == 1.0 or k == n / 2.0:
            ok_k = q < _ratio(n * k, n - 2.0 * k)
        elif 1.0 < k < n / 2.0:
            ok_k = q <= _ratio(n * k, n - 2.0 * k)
        else:  # k > n/2: only the sup-norm variant applies
            return False
        if r == 1.0:
            ok_r = q < n / (n - 1.0)
        else:  # 1 < r <= inf
            ok_r = q <= _ratio(n * r, n - 1.0) if math.isfinite(r) else True
        return bool(ok_k and ok_r)
    if which == "cor_gradient":
        def grad_branch(e: float) -> Optional[bool]:
            if e == 1.0 or e == float(n):
                return q < _ratio(n * e, n - e)
            if 1.0 < e < n:
                return q <= _ratio(n * e, n - e)
            return None  # e > n: only the sup-norm variant applies
        ok_k = grad_branch(k)
        ok_r = grad_branch(r)
        if ok_k is None or ok_r is None:
            return False
        if s == 1.0:
            ok_s = q < n / (n - 1.0)
        else:
            ok_s = q <= _ratio(n * s, n - 1.0) if math.isfinite(s) else True
        return bool(ok_k and ok_r and ok_s)
    if which == "thm_lqp":
        if not (1.0 < q < INF and 1.0 < k < INF):
            return False
        return q * (n - k) <= n * k
    raise InvalidParams(f"unknown admissibility table {which!r}")


# ---------------------------------------------------------------------------
# ensembles


@dataclass
class EnsembleSample:
    """One random test field; ``laplacian`` is its structural Delta_p."""

    values: np.ndarray  # flat DOF vector on the full complex
    laplacian: Optional[np.ndarray]
    kind: str


@dataclass
class ExperimentConfig:
    mesh: SimplicialMesh
    p: int
    exponents: ExponentTuple
    bundle: Optional[FlatBundle] = None
    ensemble: int = 50
    seed: int = 0
    curvature_assumption: str = "flat"
    meta: dict = field(default_factory=dict)


def build_ensemble(mesh: SimplicialMesh, p: int, count: int, seed: int,
                   bundle: Optional[FlatBundle] = None,
                   kinds=("neumann", "dirichlet", "lift")) -> List[EnsembleSample]:
    """Smooth random cochains with structurally known Laplacians.

    ``neumann``/``dirichlet`` samples combine the lowest eigenvectors of the
    respective Laplacian (Dirichlet ones are zero-extended, so their
    boundary trace vanishes); ``lift`` samples are discrete-harmonic
    extensions of random boundary data (0-forms only), with Laplacian zero.
    """
    rng = PortableRng(seed)
    kinds = [k for k in kinds
             if not (k == "lift" and (p != 0 or not mesh.has_boundary))
             and not (k == "dirichlet" and not mesh.has_boundary)]
    if not kinds:
        raise InvalidParams("no usable ensemble kinds")
    samples: List[EnsembleSample] = []
    bases = {}
    for kind in kinds:
        if kind in ("neumann", "dirichlet"):
            op = hodge_laplacian(mesh, p, kind, bundle)
            k_eig = min(_N_EIGEN, max(op.ndof - 2, 1))
            vals, vecs = op.eigenpairs(k_eig)
            bases[kind] = (op, vals, vecs)
    n_full = mesh.num_simplices(p) * (1 if bundle is None else bundle.rank)
    for i in range(count):
        kind = kinds[i % len(kinds)]
        if kind == "lift":
            nb = boundary_dof_count(mesh, p, bundle)
            b = np.asarray(rng.standard_normal(nb))
            values = harmonic_extension(mesh, p, b, bundle)
            samples.append(EnsembleSample(values, np.zeros(n_full), "lift"))
            continue
        op, vals, vecs = bases[kind]
        c = np.asarray(rng.standard_normal(vecs.shape[1]))
        dof = vecs @ c
        lap_dof = vecs @ (vals * c)
        values = op.extend(dof)
        lap = op.extend(lap_dof)
        samples.append(EnsembleSample(np.asarray(values).reshape(-1),
                                      np.asarray(lap).reshape(-1), kind))
    return samples


# ---------------------------------------------------------------------------
# inequality checks


@dataclass
class SobolevReport:
    which: str
    exponents: ExponentTuple
    p: int
    ensemble_size: int
    delta_hat: float
    skipped: int
    lhs: List[float]
    rhs: List[float]
    meta: dict = field(default_factory=dict)


def _require(cond: bool, msg: str):
    if not cond:
        raise InadmissibleExponents(msg)


def sobolev_check(config: ExperimentConfig, which: str,
                  normalize_volume: bool = False) -> SobolevReport:
    """Empirical constant of one Sobolev-type inequality over an ensemble.

    Reports delta_hat = min over samples of RHS/LHS.  For the sup-norm
    modes LHS is sup_M |f| - sup_dM |f| so that delta_hat witnesses the
    reciprocal of the inequality constant; harmonic_max asserts the
    maximum principle directly.
    """
    if config.curvature_assumption != "flat":
        raise UnsupportedConfiguration(
            "inequality experiments require the flat curvature assumption")
    mesh, p, bundle = config.mesh, config.p, config.bundle
    t = config.exponents
    if t.n != mesh.dim:
        raise InvalidParams(f"tuple has n={t.n}, mesh dim {mesh.dim}")
    if not mesh.has_boundary:
        raise InvalidParams("inequality checks need a boundary")

    if which == "laplace":
        _require(admissible(t, "cor_laplace"),
                 f"(q,k,r)=({t.q},{t.k},{t.r}) fails the Laplace table")
    elif which == "gradient":
        _require(admissible(t, "cor_gradient"),
                 f"(q,k,r,s)=({t.q},{t.k},{t.r},{t.s}) fails the "
                 "gradient table")
    elif which == "max_laplace":
        _require(t.k > t.n / 2.0, f"k={t.k} must exceed n/2")
    elif which == "max_gradient":
        _require(t.k > t.n and t.r > t.n, f"k={t.k}, r={t.r} must exceed n")
    elif which != "harmonic_max":
        raise InvalidParams(f"unknown inequality mode {which!r}")

    if which == "harmonic_max":
        return _harmonic_max_check(config)

    samples = build_ensemble(mesh, p, config.ensemble, config.seed, bundle)
    vol = mesh.total_volume()
    lhs_list, rhs_list = [], []
    skipped = 0
    for s in samples:
        if which in ("laplace", "max_laplace"):
            rhs_vol = lq_norm(mesh, p, _shape(s.laplacian, bundle), t.k,
                              bundle)
        else:
            df = exterior_derivative(mesh, p, bundle) @ s.values
            sf = codifferential(mesh, p - 1, bundle).apply(s.values) \
                if p > 0 else None
            rhs_vol = lq_norm(mesh, p + 1, _shape(df, bundle), t.k, bundle)
            if sf is not None:
                rhs_vol += lq_norm(mesh, p - 1, _shape(sf, bundle), t.r,
                                   bundle)
        if which == "laplace":
            lhs = lq_norm(mesh, p, _shape(s.values, bundle), t.q, bundle)
            if normalize_volume and math.isfinite(t.q):
                lhs /= vol ** (1.0 / t.q)
            rhs = rhs_vol + lq_norm(mesh, p, _shape(s.values, bundle), t.r,
                                    bundle, domain="boundary")
        elif which == "gradient":
            lhs = lq_norm(mesh, p, _shape(s.values, bundle), t.q, bundle)
            if normalize_volume and math.isfinite(t.q):
                lhs /= vol ** (1.0 / t.q)
            rhs = rhs_vol + lq_norm(mesh, p, _shape(s.values, bundle), t.s,
                                    bundle, domain="boundary")
        else:  # max_laplace, max_gradient
            sup_m = lq_norm(mesh, p, _shape(s.values, bundle), INF, bundle)
            sup_b = lq_norm(mesh, p, _shape(s.values, bundle), INF, bundle,
                            domain="boundary")
            lhs = max(sup_m - sup_b, 0.0)
            rhs = rhs_vol
        scale = max(abs(lhs), abs(rhs))
        if lhs <= 1e-12 * max(scale, 1e-300):
            skipped += 1
            continue
        lhs_list.append(lhs)
        rhs_list.append(rhs)
    if not lhs_list:
        raise EnsembleDegenerate("all ensemble samples had vanishing LHS")
    ratios = [r / l for r, l in zip(rhs_list, lhs_list)]
    return SobolevReport(which=which, exponents=t, p=p,
                         ensemble_size=len(samples),
                         delta_hat=float(min(ratios)), skipped=skipped,
                         lhs=lhs_list, rhs=rhs_list)


def _shape(flat: np.ndarray, bundle: Optional[FlatBundle]):
    if bundle is None:
        return flat
    return flat.reshape(-1, bundle.rank)


def _harmonic_max_check(config: ExperimentConfig) -> SobolevReport:
    """Maximum principle for discrete harmonic forms.

    Asserted (5% slack) for 0-forms on acute meshes, reported otherwise.
    """
    mesh, p, bundle = config.mesh, config.p, config.bundle
    rng = PortableRng(config.seed)
    lhs_list, rhs_list = [], []
    skipped = 0
    for _ in range(config.ensemble):
        nb = boundary_dof_count(mesh, p, bundle)
        b = np.asarray(rng.standard_normal(nb))
        values = harmonic_extension(mesh, p, b, bundle)
        sup_m = lq_norm(mesh, p, _shape(values, bundle), INF, bundle)
        sup_b = lq_norm(mesh, p, _shape(values, bundle), INF, bundle,
                        domain="boundary")
        if sup_b <= 1e-300:
            skipped += 1
            continue
        lhs_list.append(sup_m)
        rhs_list.append(sup_b)
    if not lhs_list:
        raise EnsembleDegenerate("all harmonic samples vanished")
    worst = max(l / r for l, r in zip(lhs_list, rhs_list))
    report = SobolevReport(which="harmonic_max", exponents=config.exponents,
                           p=p, ensemble_size=config.ensemble,
                           delta_hat=float(min(r / l for r, l in
                                               zip(rhs_list, lhs_list))),
                           skipped=skipped, lhs=lhs_list, rhs=rhs_list,
                           meta={"worst_ratio": worst})
    if p == 0 and worst > 1.05:
        raise EnsembleDegenerate(
            f"harmonic maximum principle violated: sup ratio {worst:.4f}")
    return report


def check_refinement_stability(deltas: List[float],
                               factor: float = 2.0) -> bool:
    """True when each refinement shrinks delta_hat by at most ``factor``."""
    for a, b in zip(deltas[:-1], deltas[1:]):
        if b < a / factor:
            return False
    return True
