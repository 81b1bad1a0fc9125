"""Oriented triangle meshes with intrinsic per-edge metrics.

The mesh is the discrete stand-in for a compact bordered orientable
surface.  Geometry is carried by positive edge lengths (vertex positions
are optional and only used to derive lengths for embedded generators),
so metrics without a supplied isometric embedding -- conformally scaled
discs, the pulled-back branched metric -- are first-class citizens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class MeshError(ValueError):
    """A mesh violates a structural invariant (manifoldness, orientation,
    triangle inequality, connectivity)."""


@dataclass(frozen=True)
class Topology:
    """Topological invariants of a bordered surface: genus, number of
    boundary contours, and Euler characteristic (chi = 2 - 2p - r)."""

    genus_p: int
    contours_r: int
    euler_characteristic: int


@dataclass(frozen=True)
class MapSample:
    """Per-vertex samples of a proper map to the closed unit disc.

    Attributes
    ----------
    values : np.ndarray
        Complex array of shape (V,); |values| <= 1 up to rounding, with
        boundary vertices on the unit circle.
    degree : int
        Covering degree of the map (1 for injective maps).
    """

    values: np.ndarray
    degree: int

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=complex))
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree}")

    def rotated(self, theta: float) -> "MapSample":
        return MapSample(np.exp(1j * theta) * self.values, self.degree)

    def check_proper(self, mesh: "SurfaceMesh", tol: float = 1e-6) -> None:
        """Raise if boundary vertices do not sit on the unit circle."""
        r = np.abs(self.values[mesh.boundary_vertex_mask()])
        worst = float(np.max(np.abs(1.0 - r))) if r.size else 0.0
        if worst > tol:
            raise ValueError(
                f"map is not proper: boundary modulus deviates from 1 by {worst:.3g}"
            )


def _heron_areas(lengths: np.ndarray, context: str = "triangle") -> np.ndarray:
    """Areas from the three side lengths (rows of `lengths`), rejecting
    any triangle that violates the strict triangle inequality."""
    a, b, c = lengths[:, 0], lengths[:, 1], lengths[:, 2]
    f1 = a + b + c
    f2 = -a + b + c
    f3 = a - b + c
    f4 = a + b - c
    bad = np.flatnonzero((f2 <= 0) | (f3 <= 0) | (f4 <= 0))
    if bad.size:
        t = int(bad[0])
        raise MeshError(
            f"{context} {t} violates the strict triangle inequality: "
            f"sides {lengths[t].tolist()}"
        )
    return 0.25 * np.sqrt(f1 * f2 * f3 * f4)


class SurfaceMesh:
    """Oriented triangle mesh with an intrinsic metric.

    Parameters
    ----------
    triangles : array_like, shape (F, 3)
        Vertex-index triples with globally consistent orientation.
    positions : array_like, shape (V, 3), optional
        Embedded vertex coordinates.  When given and `edge_lengths` is
        not, edge lengths are derived from them.
    edge_lengths : dict, optional
        Map from unordered vertex pair (i, j) to positive length.
        Exactly one of `positions` / `edge_lengths` must define the
        metric.
    validate : bool
        Skip invariant checks when False (test fixtures only).
    """

    def __init__(self, triangles, positions=None, edge_lengths=None, validate=True):
        tri = np.ascontiguousarray(np.asarray(triangles, dtype=np.int64))
        if tri.ndim != 2 or tri.shape[1] != 3 or tri.shape[0] < 1:
            raise MeshError("triangles must be a non-empty (F, 3) index array")
        if tri.min() < 0:
            raise MeshError("negative vertex index")
        self.triangles = tri

        if positions is not None:
            pos = np.ascontiguousarray(np.asarray(positions, dtype=float))
            if pos.ndim != 2 or pos.shape[1] != 3:
                raise MeshError("positions must have shape (V, 3)")
            self.positions = pos
            self.vertex_count = pos.shape[0]
        else:
            self.positions = None
            self.vertex_count = int(tri.max()) + 1
        if tri.max() >= self.vertex_count:
            raise MeshError("triangle index exceeds vertex count")
        if self.vertex_count < 3:
            raise MeshError("a surface mesh needs at least 3 vertices")

        # Unique undirected edges; corner_edges[f, c] is the edge opposite
        # corner c of triangle f.
        opp = tri[:, [1, 2, 2, 0, 0, 1]].reshape(-1, 2)
        und = np.sort(opp, axis=1)
        self.edges, corner_edges = np.unique(und, axis=0, return_inverse=True)
        self.corner_edges = corner_edges.reshape(-1, 3)
        self.edge_count = self.edges.shape[0]

        if edge_lengths is not None:
            lens = np.empty(self.edge_count)
            for e, (i, j) in enumerate(self.edges):
                key = (int(i), int(j))
                if key not in edge_lengths:
                    key = (int(j), int(i))
                try:
                    lens[e] = edge_lengths[key]
                except KeyError:
                    raise MeshError(f"missing edge length for edge {key}") from None
        elif self.positions is not None:
            d = self.positions[self.edges[:, 0]] - self.positions[self.edges[:, 1]]
            lens = np.linalg.norm(d, axis=1)
        else:
            raise MeshError("one of positions / edge_lengths is required")
        if not np.all(np.isfinite(lens)) or np.any(lens <= 0):
            raise MeshError("edge lengths must be positive finite reals")
        self.lengths = lens

        self._boundary_data = None
        if validate:
            self._validate()
        # areas double as the triangle-inequality check
        self.triangle_areas = _heron_areas(self.tri_lengths())
        for arr in (self.triangles, self.edges, self.corner_edges, self.lengths,
                    self.triangle_areas):
            arr.flags.writeable = False
        if self.positions is not None:
            self.positions.flags.writeable = False

    # -- structure ---------------------------------------------------------

    def _validate(self):
        tri = self.triangles
        if np.any((tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2])
                  | (tri[:, 0] == tri[:, 2])):
            raise MeshError("triangle with repeated vertex")
        used = np.zeros(self.vertex_count, dtype=bool)
        used[tri.ravel()] = True
        if not used.all():
            raise MeshError(f"unreferenced vertices: {np.flatnonzero(~used)[:5]}")

        counts = np.bincount(self.corner_edges.ravel(), minlength=self.edge_count)
        if counts.max() > 2:
            raise MeshError("non-manifold edge shared by more than two triangles")

        # consistent orientation: every directed half-edge occurs once
        he = tri[:, [1, 2, 2, 0, 0, 1]].reshape(-1, 2)
        keys = he[:, 0] * self.vertex_count + he[:, 1]
        if np.unique(keys).size != keys.size:
            raise MeshError("inconsistent orientation: repeated directed half-edge")

        # triangle adjacency graph connected
        interior = np.flatnonzero(counts == 2)
        if interior.size:
            order = np.argsort(self.corner_edges.ravel(), kind="stable")
            faces = order // 3
            ptr = np.searchsorted(self.corner_edges.ravel()[order], interior)
            fa, fb = faces[ptr], faces[ptr + 1]
        else:
            fa = fb = np.empty(0, dtype=np.int64)
        nf = tri.shape[0]
        adj = coo_matrix((np.ones(fa.size), (fa, fb)), shape=(nf, nf))
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            raise MeshError(f"triangle adjacency graph has {ncomp} components")

    def tri_lengths(self) -> np.ndarray:
        """(F, 3) side lengths; column c is the edge opposite corner c."""
        return self.lengths[self.corner_edges]

    def edge_length_map(self) -> dict:
        return {(int(i), int(j)): float(l)
                for (i, j), l in zip(self.edges, self.lengths)}

    def _boundary(self):
        if self._boundary_data is None:
            counts = np.bincount(self.corner_edges.ravel(),
                                 minlength=self.edge_count)
            bedge = counts == 1
            mask = np.zeros(self.vertex_count, dtype=bool)
            mask[self.edges[bedge].ravel()] = True
            self._boundary_data = (bedge, mask)
        return self._boundary_data

    def boundary_vertex_mask(self) -> np.ndarray:
        return self._boundary()[1]

    def interior_vertex_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_vertex_mask())

    def boundary_loops(self) -> list[list[int]]:
        """Boundary components as oriented vertex cycles.

        The cycles follow the direction induced by the triangle
        orientation (surface on the left).  Raises on closed meshes.
        """
        bedge_mask, _ = self._boundary()
        boundary_edges = {(int(a), int(b)) for a, b in self.edges[bedge_mask]}
        if not boundary_edges:
            raise MeshError("mesh is closed: no boundary contours")
        # recover the directed version of each boundary edge from its triangle
        nxt = {}
        for f, tri in enumerate(self.triangles):
            for c in range(3):
                u, v = int(tri[(c + 1) % 3]), int(tri[(c + 2) % 3])
                if (min(u, v), max(u, v)) in boundary_edges:
                    if u in nxt:
                        raise MeshError(f"non-manifold boundary at vertex {u}")
                    nxt[u] = v
        loops = []
        remaining = set(nxt)
        while remaining:
            start = min(remaining)
            loop = [start]
            remaining.discard(start)
            v = nxt[start]
            while v != start:
                loop.append(v)
                remaining.discard(v)
                v = nxt[v]
            loops.append(loop)
        return loops

    def total_area(self) -> float:
        """Surface area: sum of Heron-formula triangle areas."""
        return float(self.triangle_areas.sum())

    def topology(self) -> Topology:
        V = self.vertex_count
        E = self.edge_count
        F = self.triangles.shape[0]
        chi = V - E + F
        r = len(self.boundary_loops())
        two_p = 2 - chi - r
        if two_p < 0 or two_p % 2 != 0:
            raise MeshError(
                f"non-integral genus from chi={chi}, contours={r}: "
                "mesh is non-orientable or corrupt"
            )
        return Topology(genus_p=two_p // 2, contours_r=r, euler_characteristic=chi)

    def scaled(self, c: float) -> "SurfaceMesh":
        """Copy with every edge length multiplied by c > 0."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        lens = {(int(i), int(j)): float(l * c)
                for (i, j), l in zip(self.edges, self.lengths)}
        pos = self.positions * c if self.positions is not None else None
        return SurfaceMesh(self.triangles, positions=pos, edge_lengths=lens,
                           validate=False)

    def descriptor(self) -> str:
        return f"V{self.vertex_count}F{self.triangles.shape[0]}"


# -- generators -------------------------------------------------------------

def _disc_structure(rings: int):
    """Concentric-ring triangulation of the unit disc.

    Ring k (1 <= k <= rings) sits at radius k/rings and carries 6k
    vertices; adjacent rings are stitched by an angular zipper.  Returns
    vertex coordinates as complex numbers plus the triangle array, all
    triangles counterclockwise.
    """
    z = [0.0 + 0.0j]
    ring_start = [0, 1]
    for k in range(1, rings + 1):
        n = 6 * k
        ang = 2.0 * np.pi * np.arange(n) / n
        z.extend((k / rings) * np.exp(1j * ang))
        ring_start.append(len(z))
    z = np.array(z)

    tris = [(0, 1 + m, 1 + (m + 1) % 6) for m in range(6)]
    for k in range(2, rings + 1):
        n_in, n_out = 6 * (k - 1), 6 * k
        si, so = ring_start[k - 1], ring_start[k]
        i = j = 0
        while i < n_in or j < n_out:
            # advance whichever ring has the smaller next angle
            # (j+1)/n_out <= (i+1)/n_in, cross-multiplied to stay exact
            if j < n_out and (i == n_in or (j + 1) * n_in <= (i + 1) * n_out):
                tris.append((si + i % n_in, so + j % n_out, so + (j + 1) % n_out))
                j += 1
            else:
                tris.append((si + i % n_in, so + j % n_out, si + (i + 1) % n_in))
                i += 1
    return z, np.array(tris, dtype=np.int64)


def generate_disc(rings: int) -> SurfaceMesh:
    """Flat triangulation of the closed unit disc."""
    if rings < 1:
        raise ValueError(f"rings must be >= 1, got {rings}")
    z, tris = _disc_structure(rings)
    pos = np.column_stack([z.real, z.imag, np.zeros(z.size)])
    return SurfaceMesh(tris, positions=pos)


def generate_spherical_cap(colatitude: float, resolution: int) -> SurfaceMesh:
    """Geodesic cap {polar angle <= colatitude} of the unit sphere.

    colatitude = pi/2 gives the northern hemisphere.
    """
    if not 0.0 < colatitude < np.pi:
        raise ValueError(f"colatitude must lie in (0, pi), got {colatitude}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    z, tris = _disc_structure(resolution)
    theta = np.abs(z) * colatitude
    phi = np.angle(z)
    pos = np.column_stack([np.sin(theta) * np.cos(phi),
                           np.sin(theta) * np.sin(phi),
                           np.cos(theta)])
    return SurfaceMesh(tris, positions=pos)


def generate_annulus(inner_radius: float, resolution: int) -> SurfaceMesh:
    """Flat annulus {inner_radius <= |z| <= 1} (two boundary contours)."""
    if not 0.0 < inner_radius < 1.0:
        raise ValueError(f"inner_radius must lie in (0, 1), got {inner_radius}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    h = (1.0 - inner_radius) / resolution
    n = max(8, int(np.ceil(2.0 * np.pi / h)))
    ang = 2.0 * np.pi * np.arange(n) / n
    pts = []
    for k in range(resolution + 1):
        r = inner_radius + (1.0 - inner_radius) * k / resolution
        pts.append(np.column_stack([r * np.cos(ang), r * np.sin(ang),
                                    np.zeros(n)]))
    pos = np.vstack(pts)
    tris = []
    for k in range(resolution):
        a, b = k * n, (k + 1) * n
        for m in range(n):
            m1 = (m + 1) % n
            tris.append((a + m, b + m, b + m1))
            tris.append((a + m, b + m1, a + m1))
    return SurfaceMesh(np.array(tris, dtype=np.int64), positions=pos)


def generate_branched_double_disc(rings: int) -> tuple[SurfaceMesh, MapSample]:
    """Unit disc carrying the metric pulled back through w = z**2.

    Edge lengths are the straight-chord lengths |u**2 - v**2| of the
    image segments, so each mesh triangle is isometric to its image in
    the doubly-covered target disc; the origin is a cone point of total
    angle 4*pi.  Returned with the map f(z) = z**2 of degree 2.
    """
    if rings < 2:
        raise ValueError(f"rings must be >= 2, got {rings}")
    z, tris = _disc_structure(rings)
    w = z * z
    lens = {}
    mesh_tmp_edges = np.unique(np.sort(tris[:, [1, 2, 2, 0, 0, 1]].reshape(-1, 2),
                                       axis=1), axis=0)
    for i, j in mesh_tmp_edges:
        lens[(int(i), int(j))] = abs(w[i] - w[j])
    mesh = SurfaceMesh(tris, edge_lengths=lens)
    return mesh, MapSample(w, 2)


def generate_conformal_disc(rings: int, log_factor) -> tuple[SurfaceMesh, MapSample]:
    """Disc with the conformally scaled metric e^{2 phi} |dz|^2.

    `log_factor` is either a callable evaluated at the vertex complex
    coordinates or an array of per-vertex samples of phi.  Edge lengths
    get the endpoint-averaged factor e^{(phi(u) + phi(v)) / 2}.  The map
    sample is the identity, degree 1.
    """
    if rings < 1:
        raise ValueError(f"rings must be >= 1, got {rings}")
    z, tris = _disc_structure(rings)
    phi = np.asarray(log_factor(z) if callable(log_factor) else log_factor,
                     dtype=float)
    if phi.shape != z.shape:
        raise ValueError(f"expected {z.size} log-factor samples, got {phi.shape}")
    if not np.all(np.isfinite(phi)):
        raise ValueError("log-factor samples must be finite")
    lens = {}
    edges = np.unique(np.sort(tris[:, [1, 2, 2, 0, 0, 1]].reshape(-1, 2), axis=1),
                      axis=0)
    for i, j in edges:
        lens[(int(i), int(j))] = abs(z[i] - z[j]) * np.exp(0.5 * (phi[i] + phi[j]))
    mesh = SurfaceMesh(tris, edge_lengths=lens)
    return mesh, MapSample(z, 1)


# module-level aliases matching the operation names
def boundary_loops(mesh: SurfaceMesh) -> list[list[int]]:
    return mesh.boundary_loops()


def total_area(mesh: SurfaceMesh) -> float:
    return mesh.total_area()


def topology(mesh: SurfaceMesh) -> Topology:
    return mesh.topology()


# -- JSON interchange --------------------------------------------------------

def mesh_to_json_dict(mesh: SurfaceMesh, map_sample: MapSample | None = None) -> dict:
    doc: dict = {"triangles": mesh.triangles.tolist()}
    if mesh.positions is not None:
        doc["vertices"] = mesh.positions.tolist()
    else:
        doc["edge_lengths"] = [[int(i), int(j), float(l)]
                               for (i, j), l in zip(mesh.edges, mesh.lengths)]
    if map_sample is not None:
        doc["map"] = [[float(v.real), float(v.imag)] for v in map_sample.values]
        doc["degree"] = int(map_sample.degree)
    return doc


def mesh_from_json_dict(doc: dict) -> tuple[SurfaceMesh, MapSample | None]:
    if "triangles" not in doc:
        raise MeshError("mesh JSON lacks 'triangles'")
    has_v, has_l = "vertices" in doc, "edge_lengths" in doc
    if has_v == has_l:
        raise MeshError("mesh JSON needs exactly one of 'vertices'/'edge_lengths'")
    if has_v:
        mesh = SurfaceMesh(doc["triangles"], positions=doc["vertices"])
    else:
        lens = {(int(i), int(j)): float(l) for i, j, l in doc["edge_lengths"]}
        mesh = SurfaceMesh(doc["triangles"], edge_lengths=lens)
    ms = None
    if "map" in doc:
        vals = np.array([complex(re, im) for re, im in doc["map"]])
        ms = MapSample(vals, int(doc.get("degree", 1)))
    return mesh, ms


def save_mesh(path, mesh: SurfaceMesh, map_sample: MapSample | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(mesh_to_json_dict(mesh, map_sample), fh, sort_keys=True)
        fh.write("\n")


def load_mesh(path) -> tuple[SurfaceMesh, MapSample | None]:
    with open(path) as fh:
        return mesh_from_json_dict(json.load(fh))
