"""Flat orthogonal bundles over simplicial meshes.

A bundle of rank r attaches R^r to every vertex and an orthogonal transport
matrix to every edge.  Cochain values of a p-simplex live in the fiber of
its smallest vertex (the base vertex of the sorted tuple).  Flatness -- the
ordered transport product around every triangle equal to the identity --
is what makes the twisted coboundary square to zero, and is validated at
construction.

Builders
--------
``trivial``         identity transports, any rank.
``random_flat``     a random orthogonal gauge per vertex; transports
                    g_b g_a^T (pure gauge, hence flat and globally trivial).
``rotation_angle``  rank-2 transports that rotate by a fixed angle on edges
                    crossing a ray from the origin; flat wherever the domain
                    misses the ray's endpoint, with holonomy R(angle) around
                    the hole of an annulus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import FlatnessViolation, InvalidParams, NotOrthogonal
from .mesh import SimplicialMesh
from .rng import PortableRng

_ORTHO_TOL = 1e-12
_FLAT_TOL = 1e-10


@dataclass
class FlatBundle:
    """Orthogonal edge transports over a mesh.

    ``transports[e]`` maps the fiber at the smaller endpoint of edge ``e``
    (sorted tuples) to the fiber at the larger endpoint.
    """

    mesh: SimplicialMesh
    rank: int
    transports: np.ndarray  # (E, r, r)
    kind: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        E = self.mesh.num_simplices(1)
        if self.transports.shape != (E, self.rank, self.rank):
            raise InvalidParams("transport array shape mismatch")
        self.validate()

    # -- validation ----------------------------------------------------

    def validate(self) -> None:
        q = self.transports
        qtq = np.einsum("eki,ekj->eij", q, q)
        eye = np.eye(self.rank)
        err = np.abs(qtq - eye).max()
        if err > _ORTHO_TOL:
            raise NotOrthogonal(f"edge transport orthogonality error {err:.2e}")
        herr = self.max_holonomy_defect()
        if herr > _FLAT_TOL:
            raise FlatnessViolation(f"triangle holonomy defect {herr:.2e}")

    def triangle_holonomies(self) -> np.ndarray:
        """Transport product around each 2-simplex (v0 -> v1 -> v2 -> v0)."""
        tris = self.mesh.simplices[2]
        e01 = self.mesh._lookup(1, tris[:, [0, 1]])
        e12 = self.mesh._lookup(1, tris[:, [1, 2]])
        e02 = self.mesh._lookup(1, tris[:, [0, 2]])
        q01 = self.transports[e01]
        q12 = self.transports[e12]
        q02t = self.transports[e02].transpose(0, 2, 1)
        return np.einsum("tij,tjk,tkl->til", q02t, q12, q01)

    def max_holonomy_defect(self) -> float:
        if self.mesh.dim < 2:
            return 0.0
        hol = self.triangle_holonomies()
        return float(np.abs(hol - np.eye(self.rank)).max())

    # -- assembly helpers ----------------------------------------------

    def transport(self, a: int, b: int) -> np.ndarray:
        """Transport matrix moving fiber(a) to fiber(b) along edge (a, b)."""
        eid = self.mesh.simplex_index((a, b))
        q = self.transports[eid]
        return q if a < b else q.T

    def coboundary_base_transports(self, p: int) -> np.ndarray:
        """Per (p+1)-simplex: transport fiber(v1) -> fiber(v0).

        This is the only non-identity factor in the twisted coboundary:
        the face dropping vertex 0 has base v1, all other faces share the
        parent base v0.
        """
        rows = self.mesh.simplices[p + 1]
        eids = self.mesh._lookup(1, rows[:, [0, 1]])
        return self.transports[eids].transpose(0, 2, 1)

    def top_face_transports(self, p: int) -> np.ndarray:
        """(N_top, C, r, r): fiber(base(face)) -> fiber(base(top))."""
        mesh = self.mesh
        d = mesh.dim
        tops = mesh.simplices[d]
        combs = list(combinations(range(d + 1), p + 1))
        n = tops.shape[0]
        out = np.empty((n, len(combs), self.rank, self.rank))
        eye = np.eye(self.rank)
        for c, comb in enumerate(combs):
            if comb[0] == 0:
                out[:, c] = eye
            else:
                pairs = np.stack([tops[:, 0], tops[:, comb[0]]], axis=1)
                eids = mesh._lookup(1, pairs)
                out[:, c] = self.transports[eids].transpose(0, 2, 1)
        return out

    def boundary_restriction(self, bmesh, parent_vertex_ids, parent_edge_ids):
        """Bundle induced on a boundary/sub complex (same fibers, same edges)."""
        return FlatBundle(bmesh, self.rank, self.transports[parent_edge_ids],
                          kind=self.kind, meta=dict(self.meta))


def build_flat_bundle(mesh: SimplicialMesh, kind: str, rank: int = 1,
                      seed: int = 0, angle: float = 0.0) -> FlatBundle:
    """Construct one of the supported flat bundles (see module docstring)."""
    E = mesh.num_simplices(1)
    if kind == "trivial":
        if rank < 1:
            raise InvalidParams("rank must be >= 1")
        q = np.broadcast_to(np.eye(rank), (E, rank, rank)).copy()
        return FlatBundle(mesh, rank, q, kind="trivial")
    if kind == "random_flat":
        if rank < 1:
            raise InvalidParams("rank must be >= 1")
        gauges = _random_gauges(mesh.num_simplices(0), rank, seed)
        edges = mesh.simplices[1]
        q = np.einsum("eij,ekj->eik", gauges[edges[:, 1]], gauges[edges[:, 0]])
        return FlatBundle(mesh, rank, q, kind="random_flat",
                          meta={"seed": seed, "gauges": gauges})
    if kind == "rotation_angle":
        if rank not in (1, 2):
            raise InvalidParams("rotation_angle is a rank-2 construction")
        q = _rotation_transports(mesh, angle)
        return FlatBundle(mesh, 2, q, kind="rotation_angle",
                          meta={"angle": angle})
    raise InvalidParams(f"unknown bundle kind {kind!r}")


def _random_gauges(n: int, rank: int, seed: int) -> np.ndarray:
    rng = PortableRng(seed)
    out = np.empty((n, rank, rank))
    for v in range(n):
        a = np.asarray(rng.standard_normal(rank * rank)).reshape(rank, rank)
        q, r = np.linalg.qr(a)
        q = q * np.sign(np.diag(r))[None, :]  # fix QR sign ambiguity
        out[v] = q
    return out


def _rotation_transports(mesh: SimplicialMesh, angle: float) -> np.ndarray:
    """Rotation by ``angle * (signed crossings of a fixed ray)`` per edge."""
    verts = mesh.vertices
    theta = np.arctan2(verts[:, 1], verts[:, 0])
    # pick a cut direction strictly between two existing vertex angles
    uniq = np.unique(np.mod(theta, 2.0 * np.pi))
    if uniq.size < 2:
        raise InvalidParams("rotation_angle needs angular spread")
    phi0 = 0.5 * (uniq[0] + uniq[1])
    edges = mesh.simplices[1]
    ta, tb = theta[edges[:, 0]], theta[edges[:, 1]]
    dtheta = np.mod(tb - ta + np.pi, 2.0 * np.pi) - np.pi
    ra = np.mod(ta - phi0, 2.0 * np.pi)
    rb = np.mod(tb - phi0, 2.0 * np.pi)
    crossings = np.rint((dtheta - (rb - ra)) / (2.0 * np.pi))
    rot = angle * crossings
    c, s = np.cos(rot), np.sin(rot)
    q = np.zeros((edges.shape[0], 2, 2))
    q[:, 0, 0] = c
    q[:, 1, 1] = c
    q[:, 0, 1] = -s
    q[:, 1, 0] = s
    return q


def loop_holonomy(bundle: FlatBundle, vertex_loop) -> np.ndarray:
    """Ordered transport product along a closed vertex path."""
    loop = list(vertex_loop)
    if loop[0] != loop[-1]:
        loop = loop + [loop[0]]
    hol = np.eye(bundle.rank)
    for a, b in zip(loop[:-1], loop[1:]):
        hol = bundle.transport(a, b) @ hol
    return hol
