"""Planar weighted dbar model: operator oracles and estimate checks."""

import math

import numpy as np
import pytest

from greendec.dbar import (DELTA_GRID, PlanarDomain, adjoint_consistency_check,
                           bandlimited_ensemble, build_system,
                           curvature_monotonicity_check,
                           improved_estimate_check, l2_sobolev_check,
                           minimal_solution, planar_disk)
from greendec.errors import (DisconnectedInterior, InvalidParams,
                             RankDeficient)


@pytest.fixture(scope="module")
def sys32():
    return build_system(planar_disk(1.0 / 32))


@pytest.fixture(scope="module")
def sys32_flat():
    return build_system(planar_disk(1.0 / 32, weight="zero"))


def _nodes_z(system):
    xy = system.node_coordinates()
    return xy[:, 0] + 1j * xy[:, 1]


def test_dbar_of_constant_is_zero(sys32):
    f = np.ones(sys32.n_nodes, dtype=complex)
    assert np.abs(sys32.apply(f)).max() == 0.0


def test_dbar_of_zbar_is_one(sys32):
    f = np.conj(_nodes_z(sys32))
    out = sys32.apply(f)
    assert np.abs(out - 1.0).max() <= 1e-12


def test_dbar_of_z_is_zero(sys32):
    out = sys32.apply(_nodes_z(sys32))
    assert np.abs(out).max() <= 1e-12


def test_dbar_of_z_squared_small(sys32):
    h = sys32.h
    out = sys32.apply(_nodes_z(sys32) ** 2)
    resid = np.abs(out).max()
    assert resid <= 10.0 * h
    # one-sided differences of z^2 have the exact defect h*sqrt(2)/2
    assert resid == pytest.approx(h * math.sqrt(2) / 2, rel=1e-12)
    assert sys32.meta["z2_residual"] == pytest.approx(resid, rel=1e-12)


def test_planar_disk_rejects_bad_params():
    with pytest.raises(InvalidParams):
        planar_disk(0.0)
    with pytest.raises(DisconnectedInterior):
        planar_disk(2.5)  # no interior at this step
    with pytest.raises(InvalidParams):
        planar_disk(1.0 / 16, radius=-1.0)
    with pytest.raises(InvalidParams):
        planar_disk(1.0 / 16, weight="sombrero")


def test_disconnected_interior_is_rejected():
    n = 14
    mask = np.zeros((n, n), dtype=bool)
    mask[2:5, 2:5] = True
    mask[8:12, 8:12] = True
    rho = np.where(mask, -1.0, 1.0)
    domain = PlanarDomain(h=0.1, origin=np.array([0.0, 0.0]), rho=rho,
                          phi=np.zeros((n, n)), mask=mask, epsilon=0.0)
    with pytest.raises(DisconnectedInterior):
        build_system(domain)


def test_minimal_solution_of_zero(sys32):
    u, rep = minimal_solution(sys32, np.zeros(sys32.n_rows, dtype=complex))
    assert np.abs(u).max() == 0.0
    assert rep.residual == 0.0


def test_minimal_solution_of_unit_data(sys32_flat):
    """du = 1 has the particular solution zbar; minimality can't exceed it."""
    f = np.ones(sys32_flat.n_rows, dtype=complex)
    u, rep = minimal_solution(sys32_flat, f)
    assert rep.residual <= 1e-10
    assert sys32_flat.node_norm(u) <= \
        sys32_flat.node_norm(np.conj(_nodes_z(sys32_flat))) + 1e-12


def test_minimal_solution_vs_manufactured(sys32):
    z = _nodes_z(sys32)
    u0 = np.conj(z) * np.exp(-np.abs(z) ** 2 / 2.0)
    f = sys32.apply(u0)
    u, rep = minimal_solution(sys32, f)
    assert rep.residual <= 1e-10
    assert sys32.node_norm(u) <= sys32.node_norm(u0) + 1e-8


def test_improved_estimate_classical_bound_unit_weight(sys32):
    """phi = |z|^2 gives A = 1, so the delta = 0 bound reads |u|^2 <= |f|^2."""
    f = np.ones(sys32.n_rows, dtype=complex)
    rep = improved_estimate_check(sys32, ensemble=[f])
    row = rep.rows[0]
    assert row.curvature_pairing == pytest.approx(row.f_norm_sq, rel=1e-12)
    assert row.u_norm_sq <= row.f_norm_sq
    assert rep.delta_hat > 0


def test_improved_estimate_single_spike(sys32):
    f = np.zeros(sys32.n_rows, dtype=complex)
    f[sys32.n_rows // 2] = 1.0
    rep = improved_estimate_check(sys32, ensemble=[f], require_positive=False)
    assert np.isfinite(rep.rows[0].curvature_pairing)
    assert rep.delta_hat >= 0.0


def test_improved_estimate_needs_positive_curvature(sys32_flat):
    with pytest.raises(InvalidParams):
        improved_estimate_check(sys32_flat, count=2)


def test_improved_estimate_refinement_stability():
    deltas = []
    for n in (32, 64):
        system = build_system(planar_disk(1.0 / n))
        rep = improved_estimate_check(system, count=30, seed=0)
        assert rep.delta_hat > 0
        deltas.append(rep.delta_hat)
    assert 0.5 <= deltas[1] / deltas[0] <= 2.0


def test_l2_sobolev_skips_zero_sample(sys32_flat):
    zero = np.zeros(sys32_flat.n_nodes, dtype=complex)
    ones = np.ones(sys32_flat.n_nodes, dtype=complex)
    rep = l2_sobolev_check(sys32_flat, ensemble=[zero, ones])
    assert rep.skipped == 1
    assert rep.ensemble_size == 2


def test_l2_sobolev_unit_disk_magnitudes(sys32_flat):
    """f = 1 on the flat-weight disk: area pi, staircase rim of length
    4*sqrt(2); the codifferential of a constant vanishes."""
    ones = np.ones(sys32_flat.n_nodes, dtype=complex)
    assert np.abs(sys32_flat.formal_codifferential(ones)).max() <= 1e-12
    rep = l2_sobolev_check(sys32_flat, ensemble=[ones])
    lhs, rhs = rep.lhs[0], rep.rhs[0]
    assert lhs == pytest.approx(math.sqrt(math.pi), rel=0.02)
    assert rhs == pytest.approx(math.sqrt(4.0 * math.sqrt(2)), rel=0.03)
    assert 1.2 <= rep.delta_hat <= math.sqrt(2)


def test_l2_sobolev_ensemble_stability():
    deltas = []
    for n in (32, 64):
        system = build_system(planar_disk(1.0 / n, weight="zero"))
        rep = l2_sobolev_check(system, count=30, seed=1)
        assert rep.delta_hat > 0
        deltas.append(rep.delta_hat)
    assert 0.5 <= deltas[1] / deltas[0] <= 2.0


def test_adjoint_consistency(sys32, sys32_flat):
    assert adjoint_consistency_check(sys32, pairs=100, seed=7) <= 1e-10
    assert adjoint_consistency_check(sys32_flat, pairs=100, seed=7) <= 1e-10


def test_curvature_monotonicity(sys32):
    assert curvature_monotonicity_check(sys32, seed=0)
    assert curvature_monotonicity_check(sys32, seed=3)


def test_bandlimited_ensemble_deterministic(sys32):
    a = bandlimited_ensemble(sys32, count=4, seed=5)
    b = bandlimited_ensemble(sys32, count=4, seed=5)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    with pytest.raises(InvalidParams):
        bandlimited_ensemble(sys32, count=2, where="edges")


def test_delta_grid_shape():
    assert DELTA_GRID.shape == (81,)
    assert DELTA_GRID[0] == pytest.approx(1e-6)
    assert DELTA_GRID[-1] == pytest.approx(1e2)
    assert np.all(np.diff(np.log10(DELTA_GRID)) > 0)
