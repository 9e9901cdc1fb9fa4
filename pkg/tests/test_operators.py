"""Exterior derivative, mass matrices, codifferential, spectra, norms."""

import math

import numpy as np
import pytest
from scipy.sparse.linalg import eigsh

from greendec.bundles import build_flat_bundle
from greendec.mesh import SimplicialMesh, generate_mesh
from greendec.operators import (Cochain, cochain_from_flat, codifferential,
                                exterior_derivative, hodge_laplacian,
                                lq_norm, mass_matrix, pointwise_norms)

_SHAPES = [("disk", 8, {}), ("annulus", 8, {"r_in": 0.5, "r_out": 1.0}),
           ("torus2d", 6, {}), ("box3d", 4, {})]


def _right_triangle():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return SimplicialMesh(2, verts, np.array([[0, 1, 2]], dtype=np.int64))


def test_single_triangle_incidence_rows():
    mesh = _right_triangle()
    d0 = exterior_derivative(mesh, 0).toarray()
    assert d0.shape == (3, 3)
    # each oriented edge row: -1 at tail, +1 at head, 0 elsewhere
    assert np.array_equal(np.sort(d0, axis=1),
                          np.tile([-1.0, 0.0, 1.0], (3, 1)))
    assert np.array_equal(d0.sum(axis=1), np.zeros(3))


@pytest.mark.parametrize("shape,res,params", _SHAPES)
def test_dd_is_exactly_zero(shape, res, params):
    mesh = generate_mesh(shape, res, **params)
    for p in range(mesh.dim - 1):
        prod = (exterior_derivative(mesh, p + 1)
                @ exterior_derivative(mesh, p)).tocoo()
        assert np.abs(prod.data).max() == 0.0 if prod.nnz else True


def test_dd_flat_bundle_annulus(annulus16):
    bundle = build_flat_bundle(annulus16, "random_flat", rank=2, seed=0)
    prod = (exterior_derivative(annulus16, 1, bundle)
            @ exterior_derivative(annulus16, 0, bundle)).tocoo()
    assert np.abs(prod.data).max() <= 1e-10


def test_mass_p0_right_triangle_partition_of_unity():
    mesh = _right_triangle()
    m0 = mass_matrix(mesh, 0).toarray()
    assert m0.shape == (3, 3)
    assert np.allclose(m0, m0.T)
    assert m0.sum() == pytest.approx(0.5, abs=1e-14)


def test_mass_top_degree_is_inverse_volume():
    mesh = _right_triangle()
    m2 = mass_matrix(mesh, 2).toarray()
    assert np.allclose(m2, np.diag([2.0]), atol=1e-14)

    box = generate_mesh("box3d", 3)
    m3 = mass_matrix(box, 3)
    vols = box.volumes()
    assert np.allclose(m3.diagonal(), 1.0 / vols, rtol=1e-12)
    assert m3.nnz == box.num_simplices(3)


@pytest.mark.parametrize("shape,res,params", _SHAPES)
def test_mass_is_positive_definite(shape, res, params):
    mesh = generate_mesh(shape, res, **params)
    for p in range(mesh.dim + 1):
        m = mass_matrix(mesh, p)
        lam = eigsh(m, k=1, which="SA", return_eigenvectors=False,
                    v0=np.ones(m.shape[0]))[0]
        assert lam > 0


@pytest.mark.parametrize("shape,res,params", _SHAPES)
def test_mass_p0_row_sums_tile_the_volume(shape, res, params):
    # Whitney 0-forms sum to 1, so the all-ones quadratic form is |M|
    mesh = generate_mesh(shape, res, **params)
    ones = np.ones(mesh.num_simplices(0))
    total = ones @ (mass_matrix(mesh, 0) @ ones)
    assert total == pytest.approx(mesh.total_volume(), rel=1e-12)


def test_adjointness_on_random_pairs(disk16):
    rng = np.random.default_rng(11)
    m0 = mass_matrix(disk16, 0)
    m1 = mass_matrix(disk16, 1)
    d0 = exterior_derivative(disk16, 0)
    dstar = codifferential(disk16, 0)
    worst = 0.0
    for _ in range(100):
        a = rng.standard_normal(disk16.num_simplices(0))
        b = rng.standard_normal(disk16.num_simplices(1))
        lhs = (d0 @ a) @ (m1 @ b)
        rhs = a @ (m0 @ dstar.apply(b))
        na = math.sqrt(a @ (m0 @ a))
        nb = math.sqrt(b @ (m1 @ b))
        worst = max(worst, abs(lhs - rhs) / (na * nb))
    assert worst <= 1e-10


def test_codifferential_of_constant_gradient_is_zero(disk16):
    c = np.full(disk16.num_simplices(0), 3.7)
    dc = exterior_derivative(disk16, 0) @ c
    assert np.abs(dc).max() <= 1e-12
    assert np.abs(codifferential(disk16, 0).apply(dc)).max() <= 1e-12


def test_codifferential_squared_is_zero(torus8):
    rng = np.random.default_rng(5)
    d0s = codifferential(torus8, 0)
    d1s = codifferential(torus8, 1)
    for _ in range(10):
        w = rng.standard_normal(torus8.num_simplices(2))
        out = d0s.apply(d1s.apply(w))
        scale = max(np.abs(w).max(), 1.0)
        assert np.abs(out).max() <= 1e-10 * scale


def test_first_dirichlet_eigenvalue_of_the_disk(disk32):
    op = hodge_laplacian(disk32, 0, "dirichlet")
    vals, _ = op.eigenpairs(1)
    exact = 5.7832  # square of the first Bessel J0 zero
    assert vals[0] > 0
    assert abs(vals[0] - exact) / exact <= 0.05


def test_dirichlet_eigenvalue_improves_under_refinement():
    lam = []
    for res in (8, 16):
        op = hodge_laplacian(generate_mesh("disk", res), 0, "dirichlet")
        lam.append(op.eigenpairs(1)[0][0])
    exact = 5.7832
    assert abs(lam[1] - exact) < abs(lam[0] - exact)


def test_torus_p1_kernel_dimension(torus8):
    op = hodge_laplacian(torus8, 1, "neumann")
    assert op.harmonics().shape[1] == 2


def test_p0_laplacian_is_the_bochner_form(disk16):
    # flat metric, trivial bundle: no curvature term, K = d^T M_1 d exactly
    op = hodge_laplacian(disk16, 0, "neumann")
    d0 = exterior_derivative(disk16, 0)
    manual = d0.T @ (mass_matrix(disk16, 1) @ d0)
    diff = (op.K - manual).tocoo()
    scale = np.abs(manual.tocoo().data).max()
    assert diff.nnz == 0 or np.abs(diff.data).max() <= 1e-12 * scale


def test_lq_norm_constant(disk16):
    c = 2.5
    values = np.full(disk16.num_simplices(0), c)
    expected = c * math.sqrt(disk16.total_volume())
    assert lq_norm(disk16, 0, values, 2.0) == pytest.approx(expected,
                                                            abs=1e-12)


def test_lq_norm_zero(disk16):
    values = np.zeros(disk16.num_simplices(0))
    for q in (1.0, 2.0, math.inf):
        assert lq_norm(disk16, 0, values, q) == 0.0


def test_lq_sup_norm_of_coordinate(disk16):
    x = disk16.vertices[:, 0]
    sup = lq_norm(disk16, 0, x, math.inf)
    assert abs(sup - 1.0) <= disk16.mesh_width()


def test_pointwise_norms_constant_field(disk16):
    values = np.full(disk16.num_simplices(0), -1.5)
    norms = pointwise_norms(disk16, 0, values)
    assert norms.shape == (disk16.num_simplices(2),)
    assert np.allclose(norms, 1.5, atol=1e-12)


def test_eigensolve_is_deterministic(disk24):
    op = hodge_laplacian(disk24, 0, "dirichlet")
    a_vals, a_vecs = op.eigenpairs(3)
    b_vals, b_vecs = op.eigenpairs(3)
    assert np.array_equal(a_vals, b_vals)
    assert np.array_equal(a_vecs, b_vecs)


def test_cochain_from_flat_roundtrip(disk16):
    flat = np.arange(disk16.num_simplices(1), dtype=float)
    c = cochain_from_flat(disk16, 1, flat)
    assert isinstance(c, Cochain)
    assert c.p == 1
    assert np.array_equal(c.flat, flat)
