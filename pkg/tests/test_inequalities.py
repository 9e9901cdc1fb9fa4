"""Exponent admissibility tables and empirical inequality constants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greendec.errors import InadmissibleExponents
from greendec.inequalities import (ExperimentConfig, ExponentTuple,
                                   admissible, check_refinement_stability,
                                   sobolev_check)
from greendec.mesh import generate_mesh
from greendec.operators import harmonic_extension, lq_norm

INF = math.inf


def _t(q, k, r=2.0, s=2.0, n=2):
    return ExponentTuple(q=q, k=k, r=r, s=s, n=n)


def _cfg(mesh, p, t, ensemble=30, seed=0):
    return ExperimentConfig(mesh=mesh, p=p, exponents=t, bundle=None,
                            ensemble=ensemble, seed=seed)


# ---------------------------------------------------------------------------
# admissibility tables


def test_laplace_table_cited_cases():
    assert admissible(_t(2.9, 1.0, r=2.0, n=3), "cor_laplace")
    assert not admissible(_t(3.0, 1.0, r=2.0, n=3), "cor_laplace")


def test_lqp_table_cited_case():
    assert admissible(_t(2.0, 2.0, n=3), "thm_lqp")


def test_gradient_table_sup_exclusion():
    # k = n hits the strict branch, so q = inf is out
    assert not admissible(_t(INF, 2.0, r=2.0, s=2.0, n=2), "cor_gradient")


def test_laplace_strictness_at_interior_k():
    # 1 < k < n/2 admits the endpoint q = nk/(n-2k) itself
    t_at = _t(7.5, 1.25, r=6.0, n=3)
    t_above = _t(7.5 + 1e-9, 1.25, r=6.0, n=3)
    assert admissible(t_at, "cor_laplace")
    assert not admissible(t_above, "cor_laplace")


def test_laplace_k_above_half_dimension_is_out():
    assert not admissible(_t(2.0, 1.6, r=2.0, n=3), "cor_laplace")
    assert admissible(_t(2.0, 1.5, r=2.0, n=3), "cor_laplace")


@given(q1=st.floats(1.01, 40.0), q2=st.floats(1.01, 40.0),
       k=st.floats(1.0, 3.0), r=st.floats(1.0, 8.0),
       n=st.sampled_from([2, 3]))
@settings(max_examples=300, deadline=None)
def test_laplace_admissibility_down_closed_in_q(q1, q2, k, r, n):
    lo, hi = min(q1, q2), max(q1, q2)
    if admissible(_t(hi, k, r=r, n=n), "cor_laplace"):
        assert admissible(_t(lo, k, r=r, n=n), "cor_laplace")


@given(q=st.floats(1.01, 40.0), k=st.floats(1.01, 20.0))
@settings(max_examples=300, deadline=None)
def test_lqp_table_matches_closed_form(q, k):
    n = 3
    assert admissible(_t(q, k, n=n), "thm_lqp") == (q * (n - k) <= n * k)


@given(eps=st.floats(1e-9, 0.5), n=st.sampled_from([2, 3]))
@settings(max_examples=100, deadline=None)
def test_laplace_k1_endpoint_flip(eps, n):
    bound = n / (n - 1.0)  # the r = 1 cap
    assert admissible(_t(bound - eps * (bound - 1), 1.0, r=1.0, n=n),
                      "cor_laplace")
    assert not admissible(_t(bound, 1.0, r=1.0, n=n), "cor_laplace")


# ---------------------------------------------------------------------------
# empirical constants


def test_constant_field_ratio_is_isoperimetric(disk16):
    ones = np.ones(disk16.num_simplices(0))
    interior = lq_norm(disk16, 0, ones, 2.0)
    boundary = lq_norm(disk16, 0, ones, 2.0, domain="boundary")
    blen = disk16.p_volumes(1)[disk16.boundary_mask[1]].sum()
    expected = math.sqrt(blen / disk16.total_volume())
    assert boundary / interior == pytest.approx(expected, rel=1e-12)
    assert boundary / interior == pytest.approx(math.sqrt(2.0), rel=0.05)


def test_laplace_delta_positive_and_stable():
    deltas = []
    for res in (12, 16):
        mesh = generate_mesh("disk", res)
        rep = sobolev_check(_cfg(mesh, 0, _t(2.0, 1.0)), "laplace")
        assert rep.delta_hat > 0
        deltas.append(rep.delta_hat)
    assert check_refinement_stability(deltas, factor=2.0)


def test_gradient_delta_positive_and_stable():
    deltas = []
    for res in (12, 16):
        mesh = generate_mesh("disk", res)
        rep = sobolev_check(_cfg(mesh, 0, _t(2.0, 2.0)), "gradient")
        assert rep.delta_hat > 0
        deltas.append(rep.delta_hat)
    assert check_refinement_stability(deltas, factor=2.0)


def test_max_modes_delta_positive(disk16):
    rep = sobolev_check(_cfg(disk16, 0, _t(INF, 2.0)), "max_laplace")
    assert rep.delta_hat > 0
    rep = sobolev_check(_cfg(disk16, 0, _t(INF, 3.0, r=3.0)), "max_gradient")
    assert rep.delta_hat > 0


def test_laplace_rejects_inadmissible_tuple(disk16):
    with pytest.raises(InadmissibleExponents):
        sobolev_check(_cfg(disk16, 0, _t(2.0, 2.0)), "laplace")


def test_max_laplace_requires_large_k(disk16):
    with pytest.raises(InadmissibleExponents):
        sobolev_check(_cfg(disk16, 0, _t(INF, 1.0)), "max_laplace")


def test_harmonic_max_passes_on_acute_disk(disk16):
    rep = sobolev_check(_cfg(disk16, 0, _t(INF, 2.0)), "harmonic_max")
    assert rep.meta["worst_ratio"] <= 1.05


def test_harmonic_extension_of_coordinate_attains_equality(disk16):
    bverts = np.nonzero(disk16.boundary_mask[0])[0]
    values = harmonic_extension(disk16, 0, disk16.vertices[bverts, 0])
    sup_m = np.abs(values).max()
    sup_b = np.abs(values[bverts]).max()
    assert sup_m == pytest.approx(sup_b, rel=1e-10)


def test_p1_annulus_gradient_delta_positive(annulus16):
    rep = sobolev_check(_cfg(annulus16, 1, _t(2.0, 2.0)), "gradient")
    assert rep.delta_hat > 0


def test_delta_hat_is_seed_deterministic(disk16):
    a = sobolev_check(_cfg(disk16, 0, _t(2.0, 1.0), seed=8), "laplace")
    b = sobolev_check(_cfg(disk16, 0, _t(2.0, 1.0), seed=8), "laplace")
    assert a.delta_hat == b.delta_hat
    assert a.lhs == b.lhs
