"""Simplicial meshes for flat 2- and 3-manifolds with (or without) boundary.

A mesh stores vertices, the full face lattice of its top simplices, and an
orientation sign per top simplex.  All p-simplices are canonicalised to
sorted vertex tuples; the orientation sign says whether the sorted tuple
agrees with the intended orientation.  Geometry (volumes, barycentric
gradient Grams) is always computed from *per-top-simplex local coordinates*,
which equal the gathered vertex coordinates except on periodic meshes
(flat torus), where they hold an unwrapped image of each triangle.

Supported generators: ``disk``, ``annulus``, ``box3d``, ``torus2d``.
Element quality is enforced at generation time (aspect ratio <= 6,
positive volumes, consistent orientation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import dijkstra

from . import _kernels
from .errors import (
    DegenerateSimplex,
    DegreeOutOfRange,
    EmptySourceSet,
    InvalidParams,
    UnsupportedConfiguration,
)

_ASPECT_LIMIT = 6.0


def _pack_rows(rows: np.ndarray, base: int) -> np.ndarray:
    """Injective int64 key for sorted index rows (requires base**width < 2^63)."""
    rows = np.asarray(rows, dtype=np.int64)
    width = rows.shape[1]
    if width > 0 and base ** width >= 2 ** 62:
        raise UnsupportedConfiguration(
            f"vertex count {base} too large to pack {width}-tuples"
        )
    key = rows[:, 0].copy()
    for c in range(1, width):
        key *= base
        key += rows[:, c]
    return key


@dataclass
class DistanceField:
    """Graph geodesic distances from a source vertex set."""

    sources: np.ndarray
    values: np.ndarray  # (V,) distance per vertex
    mesh: "SimplicialMesh"

    def at_simplices(self, p: int) -> np.ndarray:
        """Distance averaged over the vertices of each p-simplex."""
        return self.values[self.mesh.simplices[p]].mean(axis=1)

    def at_tops(self) -> np.ndarray:
        return self.at_simplices(self.mesh.dim)


class SimplicialMesh:
    """Oriented simplicial complex with per-element geometry.

    Parameters
    ----------
    dim : int
        Top simplex dimension (2 or 3).
    vertices : (V, m) float array
        Vertex coordinates, m >= dim.
    tops : (N, dim+1) int array
        Top simplices in positively oriented vertex order.
    local_coords : optional (N, dim+1, m) float array
        Per-top vertex coordinates in the order of ``tops`` (periodic meshes).
    validate : bool
        Run manifold/quality checks (default True).
    """

    def __init__(self, dim, vertices, tops, local_coords=None, validate=True,
                 meta=None):
        self.dim = int(dim)
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] < self.dim:
            raise InvalidParams("vertex array must be (V, m) with m >= dim")
        tops = np.asarray(tops, dtype=np.int64)
        if tops.ndim != 2 or tops.shape[1] != self.dim + 1:
            raise InvalidParams("top simplex array must be (N, dim+1)")
        self.meta = dict(meta or {})

        order = np.argsort(tops, axis=1)
        sorted_tops = np.take_along_axis(tops, order, axis=1)
        self.top_orientations = _permutation_parity(order)
        if local_coords is None:
            self.local_coords = self.vertices[sorted_tops]
        else:
            local_coords = np.asarray(local_coords, dtype=np.float64)
            self.local_coords = np.take_along_axis(
                local_coords, order[:, :, None], axis=1
            )

        self._build_lattice(sorted_tops)
        self._geom_cache: dict = {}
        if validate:
            self._validate()

    # ------------------------------------------------------------------
    # lattice construction
    # ------------------------------------------------------------------

    def _build_lattice(self, tops: np.ndarray) -> None:
        V = self.vertices.shape[0]
        d = self.dim
        self.simplices: list[np.ndarray] = [None] * (d + 1)
        self.top_faces: list[np.ndarray] = [None] * (d + 1)

        self.simplices[0] = np.arange(V, dtype=np.int64)[:, None]
        self.simplices[d] = tops
        if np.unique(_pack_rows(tops, V)).size != tops.shape[0]:
            raise InvalidParams("duplicate top simplices")

        for p in range(1, d):
            combs = list(combinations(range(d + 1), p + 1))
            gathered = tops[:, combs]              # (N, C, p+1) already sorted
            flat = gathered.reshape(-1, p + 1)
            keys = _pack_rows(flat, V)
            uniq, inverse = np.unique(keys, return_inverse=True)
            # recover rows for unique keys
            first = np.zeros(uniq.size, dtype=np.int64)
            first[inverse] = np.arange(flat.shape[0])
            self.simplices[p] = flat[first]
            self.top_faces[p] = inverse.reshape(tops.shape[0], len(combs))
        self.top_faces[0] = tops
        self.top_faces[d] = np.arange(tops.shape[0], dtype=np.int64)[:, None]

        # boundary structure from (d-1)-face incidence
        self._build_boundary(tops)

    def _build_boundary(self, tops: np.ndarray) -> None:
        d = self.dim
        nf = self.simplices[d - 1].shape[0] if d >= 1 else 0
        face_ids = self.top_faces[d - 1]
        counts = np.bincount(face_ids.reshape(-1), minlength=nf)
        if counts.max(initial=0) > 2:
            raise InvalidParams("non-manifold: a ridge bounds more than two cells")
        if counts.min(initial=2) < 1:
            raise InvalidParams("isolated ridge")  # pragma: no cover

        # induced orientation accumulator: for top T with sorted vertices and
        # orientation o, dropping vertex j contributes (-1)^j * o to the face.
        signs = ((-1.0) ** np.arange(d + 1))[::-1]
        # combinations(range(d+1), d) drops exactly one vertex; the dropped
        # index for the c-th combination is d - c.
        contrib = self.top_orientations[:, None] * signs[None, :]
        acc = np.zeros(nf)
        np.add.at(acc, face_ids.reshape(-1), contrib.reshape(-1))

        self.boundary_mask: list[np.ndarray] = [None] * (d + 1)
        bnd_ridge = counts == 1
        self.boundary_mask[d - 1] = bnd_ridge
        self.boundary_mask[d] = np.zeros(tops.shape[0], dtype=bool)
        self._induced_ridge_orientation = np.where(bnd_ridge, acc, 0.0)
        interior_ok = np.abs(acc[counts == 2]).max(initial=0.0)
        self._orientation_consistent = interior_ok == 0.0

        V = self.vertices.shape[0]
        bnd_rows = self.simplices[d - 1][bnd_ridge]
        for p in range(0, d - 1):
            if bnd_rows.size == 0:
                self.boundary_mask[p] = np.zeros(self.simplices[p].shape[0], bool)
                continue
            combs = list(combinations(range(d), p + 1))
            sub = bnd_rows[:, combs].reshape(-1, p + 1)
            keys = np.unique(_pack_rows(sub, V))
            mask = np.isin(self._keys_of(p), keys)
            self.boundary_mask[p] = mask

    def _keys_of(self, p: int) -> np.ndarray:
        """Packed key per p-simplex, in row order."""
        return _pack_rows(self.simplices[p], self.vertices.shape[0])

    def _lookup(self, p: int, rows: np.ndarray) -> np.ndarray:
        """Indices of the given sorted vertex rows among the p-simplices."""
        keys = self._keys_of(p)
        order = np.argsort(keys)
        q = _pack_rows(rows, self.vertices.shape[0])
        pos = np.searchsorted(keys, q, sorter=order)
        if pos.max(initial=-1) >= keys.size:
            raise KeyError("simplex not in mesh")
        found = order[np.minimum(pos, keys.size - 1)]
        if not (keys[found] == q).all():
            raise KeyError("simplex not in mesh")
        return found

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------

    def num_simplices(self, p: int) -> int:
        self._check_degree(p)
        return self.simplices[p].shape[0]

    def _check_degree(self, p: int) -> None:
        if not 0 <= p <= self.dim:
            raise DegreeOutOfRange(f"degree {p} outside 0..{self.dim}")

    @property
    def has_boundary(self) -> bool:
        return bool(self.boundary_mask[self.dim - 1].any())

    def euler_characteristic(self) -> int:
        return int(sum((-1) ** p * self.num_simplices(p)
                       for p in range(self.dim + 1)))

    def interior_mask(self, p: int) -> np.ndarray:
        self._check_degree(p)
        return ~self.boundary_mask[p]

    def simplex_index(self, vertices_tuple) -> int:
        """Index of the p-simplex with the given (unsorted) vertex tuple."""
        row = np.sort(np.asarray(vertices_tuple, dtype=np.int64))
        return int(self._lookup(row.size - 1, row[None, :])[0])

    # ------------------------------------------------------------------
    # geometry
    # ------------------------------------------------------------------

    def top_geometry(self):
        """(grams, vols) of the top simplices (cached)."""
        if "top" not in self._geom_cache:
            grams, vols = _kernels.simplex_geometry(self.local_coords)
            self._geom_cache["top"] = (grams, vols)
        return self._geom_cache["top"]

    def volumes(self) -> np.ndarray:
        return self.top_geometry()[1]

    def total_volume(self) -> float:
        return float(self.volumes().sum())

    def face_local_coords(self, p: int) -> np.ndarray:
        """Coordinates of each p-simplex, taken from one containing top."""
        key = ("face_coords", p)
        if key not in self._geom_cache:
            d, m = self.dim, self.vertices.shape[1]
            n_p = self.num_simplices(p)
            combs = np.asarray(list(combinations(range(d + 1), p + 1)))
            out = np.empty((n_p, p + 1, m))
            ids = self.top_faces[p]            # (N, C)
            lc = self.local_coords             # (N, d+1, m)
            for c in range(combs.shape[0]):
                out[ids[:, c]] = lc[:, combs[c], :]
            self._geom_cache[key] = out
        return self._geom_cache[key]

    def p_volumes(self, p: int) -> np.ndarray:
        self._check_degree(p)
        key = ("pvol", p)
        if key not in self._geom_cache:
            if p == 0:
                vols = np.ones(self.num_simplices(0))
            elif p == self.dim:
                vols = self.volumes()
            else:
                _, vols = _kernels.simplex_geometry(self.face_local_coords(p))
            self._geom_cache[key] = vols
        return self._geom_cache[key]

    def edge_lengths(self) -> np.ndarray:
        return self.p_volumes(1)

    def mesh_width(self) -> float:
        """Median edge length; the unit for near-diagonal cutoffs."""
        return float(np.median(self.edge_lengths()))

    def barycenters(self, p: int) -> np.ndarray:
        """Barycenters in local (unwrapped) coordinates."""
        return self.face_local_coords(p).mean(axis=1)

    def is_delaunay(self) -> bool:
        """2D: every interior edge has nonnegative opposite-cotangent sum."""
        if self.dim != 2:
            return False
        lc = self.local_coords
        cot = np.empty((lc.shape[0], 3))
        for j in range(3):
            a = lc[:, j, :]
            u = lc[:, (j + 1) % 3, :] - a
            v = lc[:, (j + 2) % 3, :] - a
            cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
            cot[:, j] = (u * v).sum(axis=1) / np.abs(cross)
        # edge opposite to local vertex j is the face dropping vertex j;
        # with sorted tuples, top_faces[1] columns follow combinations order
        # (0,1),(0,2),(1,2) i.e. dropped vertex 2,1,0.
        acc = np.zeros(self.num_simplices(1))
        ids = self.top_faces[1]
        for c, dropped in enumerate((2, 1, 0)):
            np.add.at(acc, ids[:, c], cot[:, dropped])
        interior = self.interior_mask(1)
        return bool((acc[interior] >= -1e-12).all())

    def scaled(self, lam: float) -> "SimplicialMesh":
        """Homothety: all coordinates multiplied by lam."""
        meta = dict(self.meta)
        if "analytic_volume" in meta:
            meta["analytic_volume"] *= lam ** self.dim
        mesh = SimplicialMesh(
            self.dim,
            self.vertices * lam,
            self.simplices[self.dim] * 1,
            local_coords=self.local_coords * lam,
            validate=False,
            meta=meta,
        )
        # constructor re-sorts (already sorted) so orientations carry over
        mesh.top_orientations = self.top_orientations.copy()
        return mesh

    # ------------------------------------------------------------------
    # graph / distance
    # ------------------------------------------------------------------

    def _edge_graph(self) -> csr_matrix:
        if "graph" not in self._geom_cache:
            e = self.simplices[1]
            w = self.edge_lengths()
            V = self.vertices.shape[0]
            g = coo_matrix(
                (np.concatenate([w, w]),
                 (np.concatenate([e[:, 0], e[:, 1]]),
                  np.concatenate([e[:, 1], e[:, 0]]))),
                shape=(V, V),
            ).tocsr()
            self._geom_cache["graph"] = g
        return self._geom_cache["graph"]

    def distance_field(self, sources) -> DistanceField:
        sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        if sources.size == 0:
            raise EmptySourceSet("distance field needs at least one source")
        if sources.min() < 0 or sources.max() >= self.vertices.shape[0]:
            raise InvalidParams("source vertex id out of range")
        vals = dijkstra(self._edge_graph(), directed=False,
                        indices=sources, min_only=True)
        return DistanceField(sources=sources, values=vals, mesh=self)

    def boundary_distance(self) -> DistanceField:
        """Distance to the boundary vertex set (cached)."""
        if "bdist" not in self._geom_cache:
            if not self.has_boundary:
                raise EmptySourceSet("mesh has no boundary")
            bver = np.nonzero(self.boundary_mask[0])[0]
            self._geom_cache["bdist"] = self.distance_field(bver)
        return self._geom_cache["bdist"]

    # ------------------------------------------------------------------
    # derived complexes
    # ------------------------------------------------------------------

    def boundary_complex(self):
        """The closed (dim-1)-complex of boundary ridges.

        Returns (bmesh, parent_vertex_ids, parent_simplex_ids) where
        parent_simplex_ids[p] maps boundary-complex p-simplices to parent
        p-simplex indices.
        """
        d = self.dim
        if not self.has_boundary:
            raise EmptySourceSet("mesh has no boundary")
        ridges = self.simplices[d - 1][self.boundary_mask[d - 1]]
        orient = self._induced_ridge_orientation[self.boundary_mask[d - 1]]
        used = np.unique(ridges)
        remap = -np.ones(self.vertices.shape[0], dtype=np.int64)
        remap[used] = np.arange(used.size)
        tops = remap[ridges]
        # encode induced orientation by swapping two vertices when negative
        tops_oriented = tops.copy()
        neg = orient < 0
        if d - 1 >= 1:
            tops_oriented[neg, 0], tops_oriented[neg, 1] = (
                tops[neg, 1], tops[neg, 0])
        bmesh = SimplicialMesh(d - 1, self.vertices[used], tops_oriented,
                               validate=False,
                               meta={"shape": "boundary", "parent": self.meta.get("shape")})
        parent_ids = {}
        for p in range(0, d):
            rows = used[bmesh.simplices[p]]
            parent_ids[p] = self._lookup(p, rows)
        return bmesh, used, parent_ids

    def submesh(self, top_mask: np.ndarray):
        """Sub-complex of the selected top simplices.

        Returns (mesh, vertex_ids, simplex_ids_per_p).
        """
        top_mask = np.asarray(top_mask, dtype=bool)
        tops = self.simplices[self.dim][top_mask]
        if tops.size == 0:
            raise InvalidParams("empty submesh")
        used = np.unique(tops)
        remap = -np.ones(self.vertices.shape[0], dtype=np.int64)
        remap[used] = np.arange(used.size)
        rows = remap[tops]
        neg = self.top_orientations[top_mask] < 0
        rows_oriented = rows.copy()
        rows_oriented[neg, 0], rows_oriented[neg, 1] = rows[neg, 1], rows[neg, 0]
        local = self.local_coords[top_mask].copy()
        local[neg, 0], local[neg, 1] = local[neg, 1].copy(), local[neg, 0].copy()
        sub = SimplicialMesh(self.dim, self.vertices[used], rows_oriented,
                             local_coords=local, validate=False,
                             meta={"shape": "submesh",
                                   "parent": self.meta.get("shape")})
        ids = {}
        for p in range(0, self.dim + 1):
            ids[p] = self._lookup(p, used[sub.simplices[p]])
        return sub, used, ids

    # ------------------------------------------------------------------
    # validation
    # ------------------------------------------------------------------

    def _validate(self) -> None:
        if not self._orientation_consistent:
            raise InvalidParams("top-simplex orientations are inconsistent")
        _, vols = self.top_geometry()
        if vols.min(initial=np.inf) <= 0 or not np.isfinite(vols).all():
            raise DegenerateSimplex("zero or invalid top-simplex volume")
        scale = vols.max() ** (1.0 / self.dim)
        if vols.min() < 1e-12 * scale ** self.dim:
            raise DegenerateSimplex("near-degenerate top simplex")
        self._check_aspect()

    def _check_aspect(self) -> None:
        d = self.dim
        facets = self.local_coords[
            :, np.asarray(list(combinations(range(d + 1), d))), :]
        n, C = facets.shape[0], facets.shape[1]
        _, fvols = _kernels.simplex_geometry(facets.reshape(n * C, d, -1))
        fsum = fvols.reshape(n, C).sum(axis=1)
        edges = self.local_coords[
            :, np.asarray(list(combinations(range(d + 1), 2))), :]
        elen = np.linalg.norm(edges[:, :, 1, :] - edges[:, :, 0, :], axis=2)
        lmax = elen.max(axis=1)
        inradius = d * self.volumes() / fsum
        aspect = lmax / (2.0 * inradius)
        worst = float(aspect.max())
        if worst > _ASPECT_LIMIT:
            raise InvalidParams(
                f"element aspect ratio {worst:.2f} exceeds {_ASPECT_LIMIT}")
        self.meta.setdefault("max_aspect", worst)


def _permutation_parity(order: np.ndarray) -> np.ndarray:
    """Sign of each row permutation (rows of argsort output)."""
    n, k = order.shape
    parity = np.zeros(n, dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            parity += order[:, i] > order[:, j]
    return np.where(parity % 2 == 0, 1.0, -1.0)


# ----------------------------------------------------------------------
# generators
# ----------------------------------------------------------------------


def generate_mesh(shape: str, resolution: int, **params) -> SimplicialMesh:
    """Build one of the supported test geometries.

    Shapes: ``disk`` (radius), ``annulus`` (r_in, r_out), ``box3d`` (side),
    ``torus2d`` (side).  ``resolution`` scales inversely with edge length.
    """
    if int(resolution) != resolution or resolution < 1:
        raise InvalidParams("resolution must be a positive integer")
    resolution = int(resolution)
    builders = {
        "disk": _disk,
        "annulus": _annulus,
        "box3d": _box3d,
        "torus2d": _torus2d,
    }
    if shape not in builders:
        raise InvalidParams(f"unknown shape {shape!r}")
    return builders[shape](resolution, **params)


def _disk(resolution: int, radius: float = 1.0) -> SimplicialMesh:
    if radius <= 0:
        raise InvalidParams("radius must be positive")
    R = resolution
    if R < 2:
        raise InvalidParams("disk needs resolution >= 2")
    verts = [(0.0, 0.0)]
    ring_start = [0, 1]
    for k in range(1, R + 1):
        for j in range(6 * k):
            ang = 2.0 * math.pi * j / (6 * k)
            verts.append((radius * k / R * math.cos(ang),
                          radius * k / R * math.sin(ang)))
        ring_start.append(len(verts))
    tris = []
    for j in range(6):
        tris.append((0, 1 + j, 1 + (j + 1) % 6))
    for k in range(2, R + 1):
        i0, o0 = ring_start[k - 1], ring_start[k]
        ni, no = 6 * (k - 1), 6 * k
        for s in range(6):
            for i in range(k):
                a = o0 + (s * k + i) % no
                b = o0 + (s * k + i + 1) % no
                c = i0 + (s * (k - 1) + i) % ni
                tris.append((a, b, c))
            for i in range(k - 1):
                a = i0 + (s * (k - 1) + i) % ni
                b = o0 + (s * k + i + 1) % no
                c = i0 + (s * (k - 1) + i + 1) % ni
                tris.append((a, b, c))
    vertices = np.asarray(verts)
    tris = _orient_ccw(vertices, np.asarray(tris, dtype=np.int64))
    mesh = SimplicialMesh(2, vertices, tris,
                          meta={"shape": "disk", "radius": radius,
                                "resolution": resolution,
                                "analytic_volume": math.pi * radius ** 2})
    mesh.meta["delaunay"] = mesh.is_delaunay()
    return mesh


def _annulus(resolution: int, r_in: float = 0.5, r_out: float = 1.0) -> SimplicialMesh:
    if r_in <= 0 or r_out <= r_in:
        raise InvalidParams("need 0 < r_in < r_out")
    h = r_out / resolution
    n_r = max(2, int(math.ceil((r_out - r_in) / h)))
    n_t = max(8, int(math.ceil(2.0 * math.pi * 0.5 * (r_in + r_out) / h)))
    n_t += n_t % 2
    verts = []
    for i in range(n_r + 1):
        r = r_in + (r_out - r_in) * i / n_r
        for j in range(n_t):
            ang = 2.0 * math.pi * j / n_t
            verts.append((r * math.cos(ang), r * math.sin(ang)))
    def vid(i, j):
        return i * n_t + (j % n_t)
    tris = []
    for i in range(n_r):
        for j in range(n_t):
            a, b = vid(i, j), vid(i, j + 1)
            c, d = vid(i + 1, j), vid(i + 1, j + 1)
            if (i + j) % 2 == 0:
                tris.append((a, b, d))
                tris.append((a, d, c))
            else:
                tris.append((a, b, c))
                tris.append((b, d, c))
    vertices = np.asarray(verts)
    tris = _orient_ccw(vertices, np.asarray(tris, dtype=np.int64))
    mesh = SimplicialMesh(2, vertices, tris,
                          meta={"shape": "annulus", "r_in": r_in,
                                "r_out": r_out, "resolution": resolution,
                                "analytic_volume": math.pi * (r_out ** 2 - r_in ** 2)})
    mesh.meta["delaunay"] = mesh.is_delaunay()
    return mesh


def _box3d(resolution: int, side: float = 1.0) -> SimplicialMesh:
    if side <= 0:
        raise InvalidParams("side must be positive")
    N = resolution
    axis = np.linspace(0.0, side, N + 1)
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    vertices = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def vid(i, j, k):
        return (i * (N + 1) + j) * (N + 1) + k

    from itertools import permutations

    perms = list(permutations(range(3)))
    tets = []
    for i in range(N):
        for j in range(N):
            for k in range(N):
                base = np.array([i, j, k])
                for perm in perms:
                    path = [base.copy()]
                    cur = base.copy()
                    for ax in perm:
                        cur = cur.copy()
                        cur[ax] += 1
                        path.append(cur)
                    ids = [vid(*pt) for pt in path]
                    # even permutations give det>0 paths
                    sgn = _perm_sign(perm)
                    if sgn < 0:
                        ids[1], ids[2] = ids[2], ids[1]
                    tets.append(tuple(ids))
    tets = np.asarray(tets, dtype=np.int64)
    return SimplicialMesh(3, vertices, tets,
                          meta={"shape": "box3d", "side": side,
                                "resolution": resolution,
                                "analytic_volume": side ** 3})


def _perm_sign(perm) -> int:
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm))
              if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def _torus2d(resolution: int, side: float = 1.0) -> SimplicialMesh:
    if side <= 0:
        raise InvalidParams("side must be positive")
    N = resolution
    if N < 3:
        raise InvalidParams("torus2d needs resolution >= 3")
    h = side / N
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    vertices = np.stack([ii.ravel() * h, jj.ravel() * h], axis=1)

    def vid(i, j):
        return (i % N) * N + (j % N)

    tris = []
    local = []
    for i in range(N):
        for j in range(N):
            p00 = (i * h, j * h)
            p10 = ((i + 1) * h, j * h)
            p01 = (i * h, (j + 1) * h)
            p11 = ((i + 1) * h, (j + 1) * h)
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            local.append((p00, p10, p11))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
            local.append((p00, p11, p01))
    return SimplicialMesh(2, vertices, np.asarray(tris, dtype=np.int64),
                          local_coords=np.asarray(local),
                          meta={"shape": "torus2d", "side": side,
                                "resolution": resolution,
                                "analytic_volume": side ** 2})


def _orient_ccw(vertices: np.ndarray, tris: np.ndarray) -> np.ndarray:
    u = vertices[tris[:, 1]] - vertices[tris[:, 0]]
    v = vertices[tris[:, 2]] - vertices[tris[:, 0]]
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    flip = cross < 0
    out = tris.copy()
    out[flip, 1], out[flip, 2] = tris[flip, 2], tris[flip, 1]
    return out


# ----------------------------------------------------------------------
# text I/O
# ----------------------------------------------------------------------

_MAGIC = "greendec-mesh 1"


def save_mesh(mesh: SimplicialMesh, path) -> None:
    """Write the plain-text mesh format (header, vertices, signed tops)."""
    d = mesh.dim
    tops = mesh.simplices[d]
    has_local = mesh.meta.get("shape") == "torus2d"
    lines = [_MAGIC,
             f"dim {d}",
             f"embedding {mesh.vertices.shape[1]}",
             f"vertices {mesh.vertices.shape[0]}",
             f"simplices {tops.shape[0]}",
             f"localcoords {1 if has_local else 0}"]
    for v in mesh.vertices:
        lines.append("v " + " ".join(f"{x:.17g}" for x in v))
    for row, s in zip(tops, mesh.top_orientations):
        lines.append(f"s {int(s):+d} " + " ".join(str(int(i)) for i in row))
    if has_local:
        for block in mesh.local_coords:
            lines.append("lc " + " ".join(f"{x:.17g}" for x in block.ravel()))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path) -> SimplicialMesh:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != _MAGIC:
        raise InvalidParams("not a greendec mesh file")
    header = {}
    idx = 1
    while idx < len(lines) and not lines[idx].startswith(("v ", "s ", "lc ")):
        key, val = lines[idx].split()
        header[key] = int(val)
        idx += 1
    d = header["dim"]
    nv, ns = header["vertices"], header["simplices"]
    has_local = bool(header.get("localcoords", 0))
    verts = np.array([[float(x) for x in lines[idx + i].split()[1:]]
                      for i in range(nv)])
    idx += nv
    signs = np.empty(ns)
    tops = np.empty((ns, d + 1), dtype=np.int64)
    for i in range(ns):
        parts = lines[idx + i].split()
        signs[i] = float(parts[1])
        tops[i] = [int(x) for x in parts[2:]]
    idx += ns
    local = None
    if has_local:
        m = header["embedding"]
        local = np.array([[float(x) for x in lines[idx + i].split()[1:]]
                          for i in range(ns)]).reshape(ns, d + 1, m)
    # apply stored signs: negative sign means swap two vertices
    neg = signs < 0
    tops_oriented = tops.copy()
    tops_oriented[neg, 0], tops_oriented[neg, 1] = tops[neg, 1], tops[neg, 0]
    if local is not None:
        local_oriented = local.copy()
        local_oriented[neg, 0], local_oriented[neg, 1] = (
            local[neg, 1], local[neg, 0])
    else:
        local_oriented = None
    return SimplicialMesh(d, verts, tops_oriented,
                          local_coords=local_oriented,
                          meta={"shape": "loaded"})
