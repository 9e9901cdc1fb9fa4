"""Flat bundle construction: orthogonality, holonomy, designed failures."""

import math

import numpy as np
import pytest

from greendec.bundles import build_flat_bundle, loop_holonomy
from greendec.errors import FlatnessViolation


def _triangle_holonomies(bundle):
    """Brute-force product of the three edge transports per triangle."""
    mesh = bundle.mesh
    out = []
    for tri in mesh.simplices[mesh.dim]:
        a, b, c = (int(v) for v in tri)
        hol = bundle.transport(c, a) @ bundle.transport(b, c) \
            @ bundle.transport(a, b)
        out.append(hol)
    return np.asarray(out)


def test_trivial_bundle_is_identity(disk16):
    bundle = build_flat_bundle(disk16, "trivial", rank=1)
    assert bundle.rank == 1
    assert np.array_equal(bundle.transports,
                          np.ones_like(bundle.transports))


def test_random_flat_triangle_holonomy_is_identity(disk16):
    bundle = build_flat_bundle(disk16, "random_flat", rank=2, seed=7)
    hols = _triangle_holonomies(bundle)
    eye = np.eye(2)
    assert np.abs(hols - eye[None]).max() <= 1e-10


def test_rotation_bundle_holonomy_around_the_hole(annulus16):
    angle = math.pi / 3
    bundle = build_flat_bundle(annulus16, "rotation_angle", rank=2,
                               angle=angle)
    hols = _triangle_holonomies(bundle)
    assert np.abs(hols - np.eye(2)[None]).max() <= 1e-10

    # generator cycle: inner boundary circle, walked edge by edge
    bedges = annulus16.simplices[1][annulus16.boundary_mask[1]]
    radii = np.linalg.norm(annulus16.vertices[bedges[:, 0]], axis=1)
    inner = bedges[radii < 0.75]
    adj = {}
    for a, b in inner:
        adj.setdefault(int(a), []).append(int(b))
        adj.setdefault(int(b), []).append(int(a))
    start = next(iter(adj))
    loop, prev, v = [start], start, adj[start][0]
    while v != start:
        loop.append(v)
        nxt = [u for u in adj[v] if u != prev]
        prev, v = v, nxt[0]
    hol = loop_holonomy(bundle, loop)
    rot = np.array([[math.cos(angle), -math.sin(angle)],
                    [math.sin(angle), math.cos(angle)]])
    assert min(np.abs(hol - rot).max(), np.abs(hol - rot.T).max()) <= 1e-8


def test_rotation_bundle_impossible_on_contractible_domain(disk16):
    with pytest.raises(FlatnessViolation):
        build_flat_bundle(disk16, "rotation_angle", rank=2,
                          angle=math.pi / 3)


def test_random_flat_is_seed_deterministic(annulus16):
    a = build_flat_bundle(annulus16, "random_flat", rank=2, seed=3)
    b = build_flat_bundle(annulus16, "random_flat", rank=2, seed=3)
    assert np.array_equal(a.transports, b.transports)
    c = build_flat_bundle(annulus16, "random_flat", rank=2, seed=4)
    assert not np.array_equal(a.transports, c.transports)
