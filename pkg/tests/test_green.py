"""Green kernels: oracles, decay statistics, integral representations."""

import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from greendec.errors import InsufficientSamples, InvalidParams
from greendec.green import (decay_report, gradient_estimate_check,
                            green_kernel, integral_representation_check,
                            merge_refinements)
from greendec.mesh import generate_mesh
from greendec.operators import boundary_dof_count, cochain_from_flat
from greendec.rng import PortableRng


def _center_vertex(mesh):
    return int(np.argmin(np.linalg.norm(mesh.vertices, axis=1)))


def test_disk_kernel_matches_log_oracle(disk32):
    """Center-source column tracks -(1/2pi) ln|y| on the middle annulus."""
    center = _center_vertex(disk32)
    kernel = green_kernel(disk32, 0, sources=np.array([center]))
    vals = kernel.columns[:, 0]
    r = np.linalg.norm(disk32.vertices, axis=1)
    band = (r >= 0.2) & (r <= 0.8)
    exact = -np.log(r[band]) / (2.0 * math.pi)
    rel = np.abs(vals[band] - exact) / exact
    assert rel.max() <= 0.05


def test_kernel_positivity_on_acute_mesh(disk16):
    kernel = green_kernel(disk16, 0, count=16)
    assert kernel.columns.min() >= -1e-10


def test_kernel_symmetry(disk16):
    for p in (0, 1):
        kernel = green_kernel(disk16, p, count=6)
        c = kernel.columns
        dofs = kernel.source_dofs
        worst = 0.0
        for a in range(len(dofs)):
            for b in range(a + 1, len(dofs)):
                worst = max(worst, abs(c[dofs[b], a] - c[dofs[a], b]))
        assert worst <= 1e-8 * np.abs(c).max()


def test_kernel_decreases_with_distance_spearman(disk16):
    center = _center_vertex(disk16)
    kernel = green_kernel(disk16, 0, sources=np.array([center]))
    dist = disk16.distance_field(np.array([center])).at_simplices(0)
    far = dist >= 2.0 * disk16.mesh_width()
    rho = spearmanr(kernel.columns[far, 0], -dist[far]).statistic
    assert rho >= 0.9


def test_decay_cutoff_excludes_near_diagonal(disk16):
    kernel = green_kernel(disk16, 0, count=16)
    for mode in ("kernel", "kernel_boundary_weighted", "derivative"):
        rep = decay_report(kernel, disk16, mode)
        assert rep.cloud[0].min() >= 2.0 * disk16.mesh_width() - 1e-12
        assert rep.empirical_constant >= 0.0


def test_decay_requires_enough_clear_sources():
    mesh = generate_mesh("disk", 8)
    kernel = green_kernel(mesh, 0, count=4)
    with pytest.raises(InsufficientSamples):
        decay_report(kernel, mesh, "kernel")


def test_box3d_kernel_slope_in_window():
    # the coarse-grid fit overshoots; the window is attained by res 16
    mesh = generate_mesh("box3d", 16)
    kernel = green_kernel(mesh, 0, count=16)
    rep = decay_report(kernel, mesh, "kernel")
    assert -1.3 <= rep.fitted_slope <= -0.75


def test_disk_p1_log_statistic_stable():
    reports = []
    for res in (8, 12, 16):
        mesh = generate_mesh("disk", res)
        kernel = green_kernel(mesh, 1, count=16)
        reports.append(decay_report(kernel, mesh, "kernel"))
    series = merge_refinements(reports).constant_series
    for a, b in zip(series, series[1:]):
        assert 0.5 <= b / a <= 2.0


def test_box3d_p1_weighted_constant_refinement():
    consts = []
    for res in (8, 12):
        mesh = generate_mesh("box3d", res)
        kernel = green_kernel(mesh, 1, count=24)
        rep = decay_report(kernel, mesh, "kernel_boundary_weighted")
        consts.append(rep.empirical_constant)
    assert consts[1] >= consts[0] / 2.0
    assert consts[1] <= consts[0] * 2.0


def test_unknown_decay_mode_rejected(disk16):
    kernel = green_kernel(disk16, 0, count=16)
    with pytest.raises(InvalidParams):
        decay_report(kernel, disk16, "sideways")


def test_compact_reconstruction_of_bump_1form(disk16):
    mesh = disk16
    kernel = green_kernel(mesh, 1, count=12)
    rng = PortableRng(3)
    mids = mesh.vertices[mesh.simplices[1]].mean(axis=1)
    inner = np.linalg.norm(mids, axis=1) <= 0.5
    values = np.where(inner, rng.standard_normal(mesh.num_simplices(1)), 0.0)
    f = cochain_from_flat(mesh, 1, values)
    rep = integral_representation_check(f, kernel, mode="compact")
    assert rep.residual <= 1e-8
    rep_e = integral_representation_check(f, kernel, mode="energy")
    assert rep_e.residual <= 1e-8


def test_reconstruction_of_zero(disk16):
    kernel = green_kernel(disk16, 1, count=12)
    f = cochain_from_flat(disk16, 1, np.zeros(disk16.num_simplices(1)))
    rep = integral_representation_check(f, kernel, mode="compact")
    assert rep.residual == 0.0


def test_compact_mode_rejects_boundary_support(disk16):
    values = np.ones(disk16.num_simplices(1))
    f = cochain_from_flat(disk16, 1, values)
    with pytest.raises(InvalidParams):
        integral_representation_check(f, green_kernel(disk16, 1, count=12),
                                      mode="compact")


def _clearance_sources(mesh, clearance):
    dist = mesh.boundary_distance().at_simplices(0)
    return np.nonzero(dist >= clearance)[0]


def test_full_reconstruction_of_harmonic_re_z2(disk32):
    """Re(z^2): zero volume term, boundary quadrature carries everything."""
    mesh = disk32
    kernel = green_kernel(mesh, 0, sources=_clearance_sources(mesh, 0.3))
    values = mesh.vertices[:, 0] ** 2 - mesh.vertices[:, 1] ** 2
    f = cochain_from_flat(mesh, 0, values)
    rep = integral_representation_check(f, kernel, mode="full")
    assert rep.volume_term_max <= 1e-12
    assert rep.residual <= 0.05
    assert 0.5 <= rep.boundary_term_max <= 1.5


def test_full_reconstruction_converges():
    errs = []
    for res in (16, 32):
        mesh = generate_mesh("disk", res)
        kernel = green_kernel(mesh, 0, sources=_clearance_sources(mesh, 0.3))
        values = (mesh.vertices ** 2).sum(axis=1)
        f = cochain_from_flat(mesh, 0, values)
        lap = np.full(mesh.num_simplices(0), -4.0)
        rep = integral_representation_check(f, kernel, mode="full",
                                            laplacian=lap)
        errs.append(rep.residual)
    assert errs[1] < errs[0]
    assert errs[1] <= 0.05


def test_gradient_ratio_of_constant(disk24):
    dist = np.linalg.norm(disk24.vertices - 0.0, axis=1)
    top_mask = (dist[disk24.simplices[2]] <= 0.5).all(axis=1)
    sub, _, _ = disk24.submesh(top_mask)
    nb = boundary_dof_count(sub, 0)
    rep = gradient_estimate_check(disk24, 0, (0.0, 0.0), 0.5,
                                  boundary_samples=[np.ones(nb)])
    assert rep.ratios[0] <= 1e-10


def test_gradient_ratio_of_linear_coordinate(disk24):
    dist = np.linalg.norm(disk24.vertices, axis=1)
    top_mask = (dist[disk24.simplices[2]] <= 0.5).all(axis=1)
    sub, _, _ = disk24.submesh(top_mask)
    bverts = np.nonzero(sub.boundary_mask[0])[0]
    sample = sub.vertices[bverts, 0]
    rep = gradient_estimate_check(disk24, 0, (0.0, 0.0), 0.5,
                                  boundary_samples=[sample])
    assert 0.3 <= rep.ratios[0] <= 2.0


def test_gradient_constant_stable_under_refinement():
    consts = []
    for res in (24, 32):
        mesh = generate_mesh("disk", res)
        rep = gradient_estimate_check(mesh, 1, (0.0, 0.0), 0.5,
                                      ensemble=20, seed=5)
        consts.append(rep.constant)
    assert 0.5 <= consts[1] / consts[0] <= 2.0
