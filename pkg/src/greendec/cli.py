"""Experiment runner.

Subcommands map one-to-one onto the package's numerical checks:

* ``mesh-gen``        write test geometries in the plain-text mesh format
* ``green-decay``     kernel decay statistics with log-log plots
* ``representation``  reconstruction residuals of the kernel pairings
* ``solve-d``         potential-based du = f solves, incl. obstructions
* ``sobolev``         empirical constants for the norm inequalities
* ``dbar``            planar weighted dbar estimates

Configs are INI files (flat key-value with sections); see the repository
README for the schema of each subcommand.  Exit codes: 0 all assertions
passed, 2 an experiment assertion failed (a failure summary is printed),
1 usage or configuration error.  Output directory resolution order:
``--out-dir`` flag, ``GREENDEC_OUT_DIR`` environment variable, the
config's ``[output] dir``, then ``runs/<subcommand>``.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import dbar as dbar_mod
from . import green as green_mod
from . import hodge as hodge_mod
from . import inequalities as ineq_mod
from . import reports
from .bundles import build_flat_bundle
from .errors import (ConfigParse, GreendecError, InadmissibleExponents,
                     InvalidExponent, InvalidParams, MissingInput,
                     UnsupportedConfiguration)
from .mesh import SimplicialMesh, generate_mesh, load_mesh, save_mesh
from .operators import cochain_from_flat, exterior_derivative
from .rng import PortableRng

_USAGE = 1
_FAILED = 2

_USAGE_ERRORS = (ConfigParse, MissingInput, InvalidParams, InvalidExponent,
                 InadmissibleExponents, UnsupportedConfiguration)

_DECAY_CLAIMS = {"kernel": "Thm1.1.i",
                 "kernel_boundary_weighted": "Thm1.1.ii",
                 "derivative": "Thm1.1.iv"}
_REPR_CLAIMS = {"compact": "Thm1.3.i", "energy": "Thm1.3.ii",
                "full": "Thm1.3.i"}
_SOBOLEV_CLAIMS = {"laplace": "Cor1.4", "gradient": "Cor1.5",
                   "max_laplace": "Prop4.1.i", "max_gradient": "Prop4.1.ii",
                   "harmonic_max": "Prop4.1.max"}


# ---------------------------------------------------------------------------
# config plumbing


_REQUIRED = object()


def _load_config(path) -> tuple:
    p = Path(path)
    if not p.exists():
        raise MissingInput(f"config file {p} does not exist")
    raw = p.read_bytes()
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cfg.read_string(raw.decode())
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigParse(f"{p}: {exc}")
    return cfg, raw


def _get(cfg, section: str, key: str, cast: Callable = str,
         default=_REQUIRED):
    try:
        raw = cfg.get(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError):
        if default is _REQUIRED:
            raise ConfigParse(f"missing key [{section}] {key}")
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigParse(f"bad value for [{section}] {key}: {exc}")


def _int(raw: str) -> int:
    return int(raw)


def _float(raw: str) -> float:
    return float(raw)


def _ints(raw: str) -> List[int]:
    return [int(tok) for tok in raw.split()]


def _words(raw: str) -> List[str]:
    return raw.split()


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _exponent_tuples(raw: str) -> List[tuple]:
    """Parse 'q:k[:r[:s]]' tokens; missing entries default to 2."""
    out = []
    for tok in raw.split():
        parts = tok.split(":")
        if len(parts) < 2 or len(parts) > 4:
            raise ValueError(f"expected q:k[:r[:s]], got {tok!r}")
        vals = [math.inf if t in ("inf", "oo") else float(t) for t in parts]
        while len(vals) < 4:
            vals.append(2.0)
        out.append(tuple(vals))
    return out


def _resolve_out_dir(args, cfg, name: str) -> Path:
    out = args.out_dir or os.environ.get("GREENDEC_OUT_DIR") \
        or _get(cfg, "output", "dir", str, None) or os.path.join("runs", name)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    return _get(cfg, "experiment", "seed", _int, 0)


def _resolutions(cfg, args, section: str = "mesh",
                 key: str = "resolutions", single: str = "resolution",
                 step: float = 2.0) -> List[int]:
    """Refinement ladder: explicit list, or the base value doubled.

    --refinements N truncates or extends the configured ladder to N runs.
    """
    values = _get(cfg, section, key, _ints, None)
    if values is None:
        values = [_get(cfg, section, single, _int)]
    if args.refinements is not None:
        if args.refinements < 1:
            raise ConfigParse("--refinements must be >= 1")
        values = list(values[:args.refinements])
        while len(values) < args.refinements:
            values.append(int(round(values[-1] * step)))
    return values


def _mesh_at(cfg, resolution: Optional[int]) -> SimplicialMesh:
    mesh_file = _get(cfg, "mesh", "file", str, None)
    if mesh_file is not None:
        path = Path(mesh_file)
        if not path.exists():
            raise MissingInput(f"mesh file {path} does not exist")
        return load_mesh(path)
    shape = _get(cfg, "mesh", "shape")
    params = {}
    for key, cast in (("radius", _float), ("r_in", _float),
                      ("r_out", _float), ("side", _float)):
        val = _get(cfg, "mesh", key, cast, None)
        if val is not None:
            params[key] = val
    return generate_mesh(shape, resolution, **params)


def _bundle_for(cfg, mesh: SimplicialMesh):
    kind = _get(cfg, "experiment", "bundle", str, None)
    if kind in (None, "none"):
        return None
    rank = _get(cfg, "experiment", "bundle_rank", _int, 2)
    seed = _get(cfg, "experiment", "bundle_seed", _int, 0)
    angle = _get(cfg, "experiment", "bundle_angle", _float, 0.0)
    return build_flat_bundle(mesh, kind, rank=rank, seed=seed, angle=angle)


def _within_factor(values: Sequence[float], factor: float) -> bool:
    vals = [v for v in values if not math.isnan(v)]
    if len(vals) < 2:
        return True
    for a, b in zip(vals, vals[1:]):
        if a <= 0 or b <= 0 or not (1.0 / factor <= b / a <= factor):
            return False
    return True


def _finish(out_dir: Path, name: str, config_raw: bytes, seed: int,
            outputs: List[str]) -> None:
    manifest = reports.RunManifest(
        experiment=name, config_hash=reports.hash_bytes(config_raw),
        seed=seed, versions=reports.package_versions(),
        outputs=sorted(outputs))
    reports.write_manifest(out_dir / "manifest.json", manifest)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_mesh_gen(args) -> List[str]:
    cfg, raw = _load_config(args.config)
    out_dir = _resolve_out_dir(args, cfg, "mesh-gen")
    seed = _resolve_seed(args, cfg)
    shape = _get(cfg, "mesh", "shape")
    rows, outputs = [], []
    for res in _resolutions(cfg, args):
        mesh = _mesh_at(cfg, res)
        name = f"{shape}_{res}.mesh"
        save_mesh(mesh, out_dir / name)
        outputs.append(name)
        rows.append({"shape": shape, "resolution": res,
                     "vertices": mesh.vertices.shape[0],
                     "tops": mesh.simplices[mesh.dim].shape[0],
                     "mesh_width": mesh.mesh_width(),
                     "volume": mesh.total_volume()})
    reports.write_csv(out_dir / "mesh_gen.csv", rows,
                      ["shape", "resolution", "vertices", "tops",
                       "mesh_width", "volume"])
    outputs.append("mesh_gen.csv")
    _finish(out_dir, "mesh-gen", raw, seed, outputs)
    return []


def _cmd_green_decay(args) -> List[str]:
    cfg, raw = _load_config(args.config)
    out_dir = _resolve_out_dir(args, cfg, "green-decay")
    seed = _resolve_seed(args, cfg)
    p = _get(cfg, "experiment", "p", _int)
    modes = _get(cfg, "experiment", "modes", _words,
                 ["kernel", "kernel_boundary_weighted", "derivative"])
    count = _get(cfg, "experiment", "sources", _int, 16)
    resolutions = _resolutions(cfg, args)

    rows, outputs, failures = [], [], []
    per_mode: Dict[str, List[green_mod.DecayReport]] = {m: [] for m in modes}
    shape = _get(cfg, "mesh", "shape", str, "file")
    dim = 0
    for res in resolutions:
        mesh = _mesh_at(cfg, res)
        dim = mesh.dim
        bundle = _bundle_for(cfg, mesh)
        kernel = green_mod.green_kernel(mesh, p, bundle=bundle, count=count)
        dist = green_mod.distance_cache(kernel)
        for mode in modes:
            rep = green_mod.decay_report(kernel, mesh, mode, dist)
            per_mode[mode].append(rep)
            rows.append({"claim": _DECAY_CLAIMS[mode], "shape": shape,
                         "resolution": res, "p": p, "mode": mode,
                         "pairs": rep.pairs_sampled,
                         "mesh_width": rep.resolution_hint,
                         "fitted_slope": rep.fitted_slope,
                         "empirical_constant": rep.empirical_constant,
                         "d_constant": rep.d_constant,
                         "dstar_constant": rep.dstar_constant})
    reports.write_csv(out_dir / "green_decay.csv", rows,
                      ["claim", "shape", "resolution", "p", "mode", "pairs",
                       "mesh_width", "fitted_slope", "empirical_constant",
                       "d_constant", "dstar_constant"])
    outputs.append("green_decay.csv")

    for mode in modes:
        merged = green_mod.merge_refinements(per_mode[mode])
        if merged.cloud is not None and merged.cloud.shape[1]:
            # the 2d kernel statistic is logarithmic, not a power law; mark
            # the cloud level instead of drawing a misleading line
            log_branch = mode == "kernel" and dim == 2
            slope = math.nan if log_branch else merged.fitted_slope
            name = f"green_decay_{mode}.svg"
            reports.svg_loglog(out_dir / name, merged.cloud[0],
                               merged.cloud[1], slope=slope,
                               title=f"{mode} decay, p={p}",
                               xlabel="d(x,y)", ylabel="|G|")
            outputs.append(name)
        smin = _get(cfg, "assert", f"{mode}_slope_min", _float, None)
        smax = _get(cfg, "assert", f"{mode}_slope_max", _float, None)
        if smin is not None and not merged.fitted_slope >= smin:
            failures.append(f"{mode} slope {merged.fitted_slope:.4g} "
                            f"below {smin}")
        if smax is not None and not merged.fitted_slope <= smax:
            failures.append(f"{mode} slope {merged.fitted_slope:.4g} "
                            f"above {smax}")
        factor = _get(cfg, "assert", "stability_factor", _float, None)
        if factor is not None and \
                not _within_factor(merged.constant_series, factor):
            failures.append(
                f"{mode} constants {merged.constant_series} vary by more "
                f"than factor {factor}")
    _finish(out_dir, "green-decay", raw, seed, outputs)
    return failures


def _representation_data(mesh, p, bundle, mode, seed):
    """Deterministic test datum for one reconstruction mode."""
    rank = 1 if bundle is None else bundle.rank
    n_p = mesh.num_simplices(p) * rank
    rng = PortableRng(seed)
    if mode == "full":
        # quadratic plus a random affine part: the structural Laplacian of
        # a|z|^2 + b.x + c is the constant -4a on interior vertices
        if p != 0:
            raise ConfigParse("full reconstruction is a p=0 experiment")
        a = 1.0 + rng.uniform()
        coeffs = rng.standard_normal(mesh.vertices.shape[1] + 1)
        quad = a * (mesh.vertices ** 2).sum(axis=1)
        affine = mesh.vertices @ coeffs[:-1] + coeffs[-1]
        f = cochain_from_flat(mesh, 0, quad + affine, bundle)
        lap = np.full(mesh.num_simplices(0), -4.0 * a)
        return f, lap
    interior = mesh.interior_mask(p)
    values = rng.standard_normal(n_p)
    values = values.reshape(-1, rank) if rank > 1 else values
    values[~interior] = 0.0
    return cochain_from_flat(mesh, p, values.reshape(-1), bundle), None


def _cmd_representation(args) -> List[str]:
    cfg, raw = _load_config(args.config)
    out_dir = _resolve_out_dir(args, cfg, "representation")
    seed = _resolve_seed(args, cfg)
    p = _get(cfg, "experiment", "p", _int)
    modes = _get(cfg, "experiment", "modes", _words, ["compact"])
    count = _get(cfg, "experiment", "sources", _int, 16)
    clearance = _get(cfg, "experiment", "clearance", _float, None)
    shape = _get(cfg, "mesh", "shape", str, "file")
    rows, outputs, failures = [], [], []
    residual_series: Dict[str, List[float]] = {m: [] for m in modes}
    for res in _resolutions(cfg, args):
        mesh = _mesh_at(cfg, res)
        bundle = _bundle_for(cfg, mesh)
        if clearance is not None:
            # fixed absolute clearance band: keeps the boundary-quadrature
            # error O(h) instead of saturating at the moving relative cutoff
            dist = mesh.boundary_distance().at_simplices(p)
            sources = np.nonzero(dist >= clearance)[0]
            if sources.size == 0:
                raise ConfigParse(
                    f"clearance {clearance} excludes every {p}-simplex")
        else:
            sources = "all" if "full" in modes else None
        kernel = green_mod.green_kernel(mesh, p, bundle=bundle,
                                        sources=sources, count=count)
        for mode in modes:
            f, lap = _representation_data(mesh, p, bundle, mode, seed)
            rep = green_mod.integral_representation_check(
                f, kernel, mode=mode, laplacian=lap)
            residual_series[mode].append(rep.residual)
            rows.append({"claim": _REPR_CLAIMS[mode], "shape": shape,
                         "resolution": res, "p": p, "mode": mode,
                         "n_sources": rep.n_sources,
                         "residual": rep.residual,
                         "volume_term_max": rep.volume_term_max,
                         "boundary_term_max": rep.boundary_term_max})
    reports.write_csv(out_dir / "representation.csv", rows,
                      ["claim", "shape", "resolution", "p", "mode",
                       "n_sources", "residual", "volume_term_max",
                       "boundary_term_max"])
    outputs.append("representation.csv")
    for mode in modes:
        cap = _get(cfg, "assert", f"{mode}_residual_max", _float, None)
        series = residual_series[mode]
        if cap is not None:
            worst = max(series)
            if not worst <= cap:
                failures.append(f"{mode} residual {worst:.4g} above {cap}")
        if _get(cfg, "assert", f"{mode}_decreasing", _bool, False) and \
                any(b > a for a, b in zip(series, series[1:])):
            failures.append(f"{mode} residuals {series} not decreasing "
                            "under refinement")
    _finish(out_dir, "representation", raw, seed, outputs)
    return failures


def _cmd_solve_d(args) -> List[str]:
    cfg, raw = _load_config(args.config)
    out_dir = _resolve_out_dir(args, cfg, "solve-d")
    seed = _resolve_seed(args, cfg)
    p = _get(cfg, "experiment", "p", _int)
    q = _get(cfg, "experiment", "q", _float, 2.0)
    k = _get(cfg, "experiment", "k", _float, 2.0)
    generator = _get(cfg, "experiment", "generator", str, "exact")
    trials = _get(cfg, "experiment", "trials", _int, 10)
    shape = _get(cfg, "mesh", "shape", str, "file")
    if generator not in ("exact", "harmonic"):
        raise ConfigParse(f"unknown generator {generator!r}")
    rows, outputs, failures = [], [], []
    for res in _resolutions(cfg, args):
        mesh = _mesh_at(cfg, res)
        bundle = _bundle_for(cfg, mesh)
        rank = 1 if bundle is None else bundle.rank
        rng = PortableRng(seed + res)
        if generator == "harmonic":
            space = hodge_mod.harmonic_space(mesh, p, bc="neumann",
                                             bundle=bundle)
            if space.dimension == 0:
                raise InvalidParams(
                    f"no harmonic {p}-forms on this mesh to test with")
        for trial in range(trials):
            if generator == "exact":
                v = rng.standard_normal(mesh.num_simplices(p - 1) * rank)
                flat = exterior_derivative(mesh, p - 1, bundle) @ v
                f = cochain_from_flat(mesh, p, flat, bundle)
            else:
                f = space.basis[trial % space.dimension]
            try:
                u, rep = hodge_mod.solve_d_equation(f, q=q, k=k)
            except GreendecError as exc:
                rows.append({"claim": "Thm1.6", "shape": shape,
                             "resolution": res, "p": p, "q": q, "k": k,
                             "trial": trial, "residual": math.nan,
                             "norm_ratio": math.nan,
                             "obstruction_norm": getattr(
                                 getattr(exc, "report", None),
                                 "obstruction_norm", math.nan),
                             "error": type(exc).__name__})
                failures.append(f"trial {trial} at resolution {res}: "
                                f"{type(exc).__name__}: {exc}")
                continue
            rows.append({"claim": "Thm1.6", "shape": shape,
                         "resolution": res, "p": p, "q": q, "k": k,
                         "trial": trial, "residual": rep.residual,
                         "norm_ratio": rep.norm_ratio,
                         "obstruction_norm": rep.obstruction_norm,
                         "error": ""})
            cap = _get(cfg, "assert", "residual_max", _float, None)
            if cap is not None and not rep.residual <= cap:
                failures.append(f"trial {trial} residual "
                                f"{rep.residual:.4g} above {cap}")
    reports.write_csv(out_dir / "solve_d.csv", rows,
                      ["claim", "shape", "resolution", "p", "q", "k",
                       "trial", "residual", "norm_ratio",
                       "obstruction_norm", "error"])
    outputs.append("solve_d.csv")
    _finish(out_dir, "solve-d", raw, seed, outputs)
    return failures


def _cmd_sobolev(args) -> List[str]:
    cfg, raw = _load_config(args.config)
    out_dir = _resolve_out_dir(args, cfg, "sobolev")
    seed = _resolve_seed(args, cfg)
    p = _get(cfg, "experiment", "p", _int)
    which = _get(cfg, "experiment", "which")
    if which not in _SOBOLEV_CLAIMS:
        raise ConfigParse(f"unknown inequality mode {which!r}")
    tuples = _get(cfg, "experiment", "exponents", _exponent_tuples,
                  [(2.0, 1.0, 2.0, 2.0)])
    ensemble = _get(cfg, "experiment", "ensemble", _int, 50)
    normalize = _get(cfg, "experiment", "normalize_volume", _bool, False)
    shape = _get(cfg, "mesh", "shape", str, "file")
    rows, outputs, failures = [], [], []
    series: Dict[tuple, List[float]] = {t: [] for t in tuples}
    for res in _resolutions(cfg, args):
        mesh = _mesh_at(cfg, res)
        bundle = _bundle_for(cfg, mesh)
        for tup in tuples:
            exps = ineq_mod.ExponentTuple(q=tup[0], k=tup[1], r=tup[2],
                                          s=tup[3], n=mesh.dim)
            config = ineq_mod.ExperimentConfig(
                mesh=mesh, p=p, exponents=exps, bundle=bundle,
                ensemble=ensemble, seed=seed)
            rep = ineq_mod.sobolev_check(config, which,
                                         normalize_volume=normalize)
            series[tup].append(rep.delta_hat)
            rows.append({"claim": _SOBOLEV_CLAIMS[which], "which": which,
                         "shape": shape, "resolution": res, "p": p,
                         "q": tup[0], "k": tup[1], "r": tup[2], "s": tup[3],
                         "ensemble": rep.ensemble_size,
                         "skipped": rep.skipped,
                         "delta_hat": rep.delta_hat})
    reports.write_csv(out_dir / "sobolev.csv", rows,
                      ["claim", "which", "shape", "resolution", "p", "q",
                       "k", "r", "s", "ensemble", "skipped", "delta_hat"])
    outputs.append("sobolev.csv")
    if _get(cfg, "assert", "delta_positive", _bool, True):
        for tup, vals in series.items():
            if not all(v > 0 for v in vals):
                failures.append(f"delta-hat not positive for exponents "
                                f"{tup}: {vals}")
    factor = _get(cfg, "assert", "stability_factor", _float, None)
    if factor is not None:
        for tup, vals in series.items():
            if not _within_factor(vals, factor):
                failures.append(f"delta-hat for exponents {tup} varies by "
                                f"more than factor {factor}: {vals}")
    _finish(out_dir, "sobolev", raw, seed, outputs)
    return failures


def _cmd_dbar(args) -> List[str]:
    cfg, raw = _load_config(args.config)
    out_dir = _resolve_out_dir(args, cfg, "dbar")
    seed = _resolve_seed(args, cfg)
    radius = _get(cfg, "experiment", "radius", _float, 1.0)
    weight = _get(cfg, "experiment", "weight", str, "abs2")
    count = _get(cfg, "experiment", "count", _int, 30)
    checks = _get(cfg, "experiment", "checks", _words,
                  ["improved", "l2_sobolev", "adjoint", "monotonicity"])
    grid_ns = _resolutions(cfg, args, section="experiment", key="grid_ns",
                           single="grid_n")
    rows_imp, rows_sob, summary, outputs, failures = [], [], [], [], []
    improved_series, sobolev_series = [], []
    for grid_n in grid_ns:
        domain = dbar_mod.planar_disk(1.0 / grid_n, radius=radius,
                                      weight=weight)
        system = dbar_mod.build_system(domain)
        h = system.h
        if "improved" in checks:
            rep = dbar_mod.improved_estimate_check(system, count=count,
                                                   seed=seed)
            improved_series.append(rep.delta_hat)
            for r in rep.rows:
                rows_imp.append({"claim": "Thm1.13", "h": h,
                                 "sample": r.sample,
                                 "f_norm_sq": r.f_norm_sq,
                                 "curvature_pairing": r.curvature_pairing,
                                 "u_norm_sq": r.u_norm_sq,
                                 "delta_hat": r.delta_hat})
            summary.append({"claim": "Thm1.13", "check": "improved", "h": h,
                            "value": rep.delta_hat,
                            "passed": rep.delta_hat > 0})
            if not rep.delta_hat > 0:
                failures.append(f"improved delta-hat not positive at "
                                f"h={h:.5g}")
        if "l2_sobolev" in checks:
            rep = dbar_mod.l2_sobolev_check(system, count=count,
                                            seed=seed + 1)
            sobolev_series.append(rep.delta_hat)
            for i, (lhs, rhs) in enumerate(zip(rep.lhs, rep.rhs)):
                rows_sob.append({"claim": "Thm1.8", "h": h, "sample": i,
                                 "lhs": lhs, "rhs": rhs,
                                 "ratio": rhs / lhs})
            summary.append({"claim": "Thm1.8", "check": "l2_sobolev",
                            "h": h, "value": rep.delta_hat,
                            "passed": rep.delta_hat > 0})
            if not rep.delta_hat > 0:
                failures.append(f"l2 sobolev delta-hat not positive at "
                                f"h={h:.5g}")
        if "adjoint" in checks:
            defect = dbar_mod.adjoint_consistency_check(system, seed=seed)
            summary.append({"claim": "Thm1.13", "check": "adjoint", "h": h,
                            "value": defect, "passed": defect <= 1e-10})
            if defect > 1e-10:
                failures.append(f"adjoint defect {defect:.3e} above 1e-10 "
                                f"at h={h:.5g}")
        if "monotonicity" in checks:
            ok = dbar_mod.curvature_monotonicity_check(system, seed=seed)
            summary.append({"claim": "Thm1.13", "check": "monotonicity",
                            "h": h, "value": 1.0 if ok else 0.0,
                            "passed": ok})
            if not ok:
                failures.append(f"curvature monotonicity failed at "
                                f"h={h:.5g}")
    factor = _get(cfg, "assert", "stability_factor", _float, None)
    if factor is not None:
        if "improved" in checks and \
                not _within_factor(improved_series, factor):
            failures.append(f"improved delta-hat unstable across grids: "
                            f"{improved_series}")
        if "l2_sobolev" in checks and \
                not _within_factor(sobolev_series, factor):
            failures.append(f"l2 sobolev delta-hat unstable across grids: "
                            f"{sobolev_series}")
    if rows_imp:
        reports.write_csv(out_dir / "dbar_improved.csv", rows_imp,
                          ["claim", "h", "sample", "f_norm_sq",
                           "curvature_pairing", "u_norm_sq", "delta_hat"])
        outputs.append("dbar_improved.csv")
    if rows_sob:
        reports.write_csv(out_dir / "dbar_sobolev.csv", rows_sob,
                          ["claim", "h", "sample", "lhs", "rhs", "ratio"])
        outputs.append("dbar_sobolev.csv")
    reports.write_csv(out_dir / "dbar_summary.csv", summary,
                      ["claim", "check", "h", "value", "passed"])
    outputs.append("dbar_summary.csv")
    _finish(out_dir, "dbar", raw, seed, outputs)
    return failures


_DISPATCH = {"mesh-gen": _cmd_mesh_gen,
             "green-decay": _cmd_green_decay,
             "representation": _cmd_representation,
             "solve-d": _cmd_solve_d,
             "sobolev": _cmd_sobolev,
             "dbar": _cmd_dbar}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greendec",
        description="Run the package's numerical experiments from configs.")
    sub = parser.add_subparsers(dest="command")
    for name in _DISPATCH:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True,
                       help="INI config file for the experiment")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out-dir", default=None,
                       help="artifact directory (also: GREENDEC_OUT_DIR)")
        p.add_argument("--refinements", type=int, default=None,
                       help="number of refinement runs")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else _USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return _USAGE
    try:
        failures = _DISPATCH[args.command](args)
    except _USAGE_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _USAGE
    except GreendecError as exc:
        print(f"FAIL {args.command}: {type(exc).__name__}: {exc}")
        return _FAILED
    if failures:
        for line in failures:
            print(f"FAIL {args.command}: {line}")
        return _FAILED
    print(f"PASS {args.command}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
