import json

import numpy as np
import pytest

import membrane_spectra as ms
from membrane_spectra.mesh import MeshError

from conftest import square_mesh


def polygon_area(n):
    # area of the regular n-gon inscribed in the unit circle
    return 0.5 * n * np.sin(2 * np.pi / n)


def cap_area(colatitude):
    return 2 * np.pi * (1 - np.cos(colatitude))


class TestGenerateDisc:
    def test_single_ring_polygon_deficit(self):
        m = ms.generate_disc(1)
        assert m.vertex_count == 7
        assert m.total_area() < np.pi
        assert m.total_area() == pytest.approx(polygon_area(6), rel=1e-12)

    def test_fine_disc_area(self):
        m = ms.generate_disc(64)
        assert m.total_area() == pytest.approx(np.pi, rel=1e-3)
        # inscribed polygons stay below pi
        assert m.total_area() < np.pi

    @pytest.mark.parametrize("rings", [1, 3, 8])
    def test_topology(self, rings):
        t = ms.topology(ms.generate_disc(rings))
        assert t == ms.Topology(genus_p=0, contours_r=1, euler_characteristic=1)

    def test_rejects_bad_rings(self):
        with pytest.raises(ValueError):
            ms.generate_disc(0)


class TestGenerateSphericalCap:
    def test_hemisphere_area(self):
        m = ms.generate_spherical_cap(np.pi / 2, 48)
        assert m.total_area() == pytest.approx(2 * np.pi, rel=1e-3)

    def test_cap_area_formula(self):
        m = ms.generate_spherical_cap(np.pi / 3, 48)
        assert m.total_area() == pytest.approx(cap_area(np.pi / 3), rel=1e-3)
        assert cap_area(np.pi / 3) == pytest.approx(np.pi)

    def test_topology(self, hemisphere16):
        assert ms.topology(hemisphere16) == ms.Topology(0, 1, 1)

    @pytest.mark.parametrize("bad", [0.0, np.pi, -1.0, 4.0])
    def test_rejects_colatitude(self, bad):
        with pytest.raises(ValueError):
            ms.generate_spherical_cap(bad, 8)


class TestGenerateAnnulus:
    def test_area(self):
        m = ms.generate_annulus(0.5, 16)
        assert m.total_area() == pytest.approx(np.pi * 0.75, rel=1e-3)

    def test_topology_two_contours(self):
        m = ms.generate_annulus(0.5, 4)
        assert ms.topology(m) == ms.Topology(0, 2, 0)
        assert len(ms.boundary_loops(m)) == 2

    def test_second_order_area_convergence(self):
        exact = np.pi * 0.75
        e1 = abs(ms.generate_annulus(0.5, 8).total_area() - exact)
        e2 = abs(ms.generate_annulus(0.5, 16).total_area() - exact)
        assert e1 / e2 >= 2.0  # empirically ~4x

    def test_rejects_inner_radius(self):
        for bad in (0.0, 1.0, -0.2, 2.0):
            with pytest.raises(ValueError):
                ms.generate_annulus(bad, 8)


class TestBranchedDoubleDisc:
    def test_pulled_back_area(self):
        # oracle: integral over the disc of |2z|^2 in polar coordinates,
        # int_0^{2pi} int_0^1 4 r^2 * r dr dtheta = 2 pi
        mesh, _ = ms.generate_branched_double_disc(32)
        assert mesh.total_area() == pytest.approx(2 * np.pi, rel=2e-3)

    def test_degree(self, branched12):
        mesh, f = branched12
        assert f.degree == 2
        assert ms.compute_degree(mesh, f.values) == 2

    def test_topology_still_a_disc(self, branched12):
        assert ms.topology(branched12[0]) == ms.Topology(0, 1, 1)

    def test_cone_angle_at_origin(self):
        # angles of triangles incident to the center vertex sum to ~4 pi
        mesh, _ = ms.generate_branched_double_disc(16)
        total = 0.0
        L = mesh.tri_lengths()
        for t, tri in enumerate(mesh.triangles):
            for c in range(3):
                if tri[c] == 0:
                    a, b, cc = L[t, c], L[t, (c + 1) % 3], L[t, (c + 2) % 3]
                    total += np.arccos((b * b + cc * cc - a * a) / (2 * b * cc))
        assert total == pytest.approx(4 * np.pi, rel=1e-6)

    def test_rejects_rings(self):
        with pytest.raises(ValueError):
            ms.generate_branched_double_disc(1)


class TestConformalDisc:
    def test_zero_factor_matches_flat_disc(self):
        flat = ms.generate_disc(6)
        conf, f = ms.generate_conformal_disc(6, lambda z: np.zeros(z.shape))
        assert f.degree == 1
        np.testing.assert_allclose(conf.lengths, flat.lengths, rtol=1e-14)

    def test_constant_factor_scales_area(self):
        flat = ms.generate_disc(6)
        conf, _ = ms.generate_conformal_disc(6, lambda z: 0.3 * np.ones(z.shape))
        assert conf.total_area() == pytest.approx(
            np.exp(0.6) * flat.total_area(), rel=1e-12)

    def test_hemisphere_metric_area(self):
        # curvature +1 metric 4 / (1 + r^2)^2 |dz|^2; its area is
        # int_0^{2pi} int_0^1 4 r / (1 + r^2)^2 dr dtheta = 2 pi
        conf, _ = ms.generate_conformal_disc(
            32, lambda z: np.log(2.0) - np.log1p(np.abs(z) ** 2))
        assert conf.total_area() == pytest.approx(2 * np.pi, rel=2e-3)

    def test_rejects_nonfinite_samples(self):
        with pytest.raises(ValueError):
            ms.generate_conformal_disc(4, lambda z: np.where(
                np.abs(z) > 0.5, np.nan, 0.0))


class TestBoundaryLoops:
    def test_disc_one_loop(self):
        loops = ms.boundary_loops(ms.generate_disc(4))
        assert len(loops) == 1
        assert len(loops[0]) == 24

    def test_two_triangle_square(self):
        pos = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
        m = ms.SurfaceMesh([[0, 1, 2], [0, 2, 3]], positions=pos)
        (loop,) = ms.boundary_loops(m)
        assert sorted(loop) == [0, 1, 2, 3]

    def test_boundary_edges_partitioned(self, disc8):
        loops = ms.boundary_loops(disc8)
        loop_edges = set()
        for loop in loops:
            for u, v in zip(loop, loop[1:] + loop[:1]):
                loop_edges.add((min(u, v), max(u, v)))
        counts = np.bincount(disc8.corner_edges.ravel(),
                             minlength=disc8.edge_count)
        single = {(int(i), int(j)) for i, j in disc8.edges[counts == 1]}
        assert loop_edges == single

    def test_closed_mesh_rejected(self):
        # regular tetrahedron boundary: closed, no contours
        pos = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
        tris = [[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]
        m = ms.SurfaceMesh(tris, positions=pos)
        with pytest.raises(MeshError, match="closed"):
            ms.boundary_loops(m)


class TestTotalArea:
    def test_unit_right_triangle(self):
        m = ms.SurfaceMesh([[0, 1, 2]],
                           edge_lengths={(0, 1): 1.0, (0, 2): 1.0,
                                         (1, 2): np.sqrt(2.0)})
        assert m.total_area() == pytest.approx(0.5, rel=1e-14)

    def test_reindexing_invariance(self, disc8):
        rng = np.random.default_rng(7)
        tris = disc8.triangles[rng.permutation(disc8.triangles.shape[0])]
        perm = rng.permutation(disc8.vertex_count)
        m2 = ms.SurfaceMesh(perm[tris], positions=None,
                            edge_lengths={(int(perm[i]), int(perm[j])): float(l)
                                          for (i, j), l in zip(disc8.edges,
                                                               disc8.lengths)})
        assert m2.total_area() == pytest.approx(disc8.total_area(), rel=1e-13)

    def test_refinement_halves_area_error(self):
        e = [abs(ms.generate_disc(r).total_area() - np.pi) for r in (8, 16)]
        assert e[0] / e[1] >= 2.0


class TestTopologyOp:
    def test_euler_identity_all_generators(self, disc8, hemisphere16):
        annulus = ms.generate_annulus(0.4, 6)
        branched, _ = ms.generate_branched_double_disc(6)
        for m in (disc8, hemisphere16, annulus, branched):
            t = ms.topology(m)
            V, E, F = m.vertex_count, m.edge_count, m.triangles.shape[0]
            assert t.euler_characteristic == V - E + F
            assert t.euler_characteristic == 2 - 2 * t.genus_p - t.contours_r

    def test_genus_one_fixture(self):
        # 4x4 flat torus grid with one triangle removed: V=16, E=48, F=31,
        # chi = -1, so (p, r) = (1, 1)
        n = 4
        tris = []
        for i in range(n):
            for j in range(n):
                v00 = i * n + j
                v10 = ((i + 1) % n) * n + j
                v01 = i * n + (j + 1) % n
                v11 = ((i + 1) % n) * n + (j + 1) % n
                tris.append((v00, v10, v11))
                tris.append((v00, v11, v01))
        tris = tris[:-1]
        lens = {}
        for tri in tris:
            for c in range(3):
                u, v = tri[(c + 1) % 3], tri[(c + 2) % 3]
                lens[(min(u, v), max(u, v))] = 1.0
        # the diagonal edge of each cell is longer
        for i in range(n):
            for j in range(n):
                u = i * n + j
                v = ((i + 1) % n) * n + (j + 1) % n
                lens[(min(u, v), max(u, v))] = np.sqrt(2.0)
        m = ms.SurfaceMesh(np.array(tris), edge_lengths=lens)
        t = ms.topology(m)
        assert t == ms.Topology(genus_p=1, contours_r=1,
                                euler_characteristic=-1)


class TestValidation:
    def test_triangle_inequality_violation(self):
        with pytest.raises(MeshError, match="triangle inequality"):
            ms.SurfaceMesh([[0, 1, 2]],
                           edge_lengths={(0, 1): 1.0, (0, 2): 1.0, (1, 2): 2.5})

    def test_inconsistent_orientation(self):
        pos = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
        with pytest.raises(MeshError, match="orientation"):
            ms.SurfaceMesh([[0, 1, 2], [0, 3, 2]], positions=pos)

    def test_nonmanifold_edge(self):
        pos = [[0, 0, 0], [1, 0, 0], [0.5, 1, 0], [0.5, -1, 0]]
        with pytest.raises(MeshError, match="non-manifold"):
            ms.SurfaceMesh([[0, 1, 2], [1, 0, 3], [3, 0, 1]], positions=pos)

    def test_disconnected(self):
        pos = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0],
                        [5, 5, 0], [6, 5, 0], [5, 6, 0]], dtype=float)
        with pytest.raises(MeshError, match="components"):
            ms.SurfaceMesh([[0, 1, 2], [3, 4, 5]], positions=pos)

    def test_scaled(self, disc8):
        m = disc8.scaled(3.0)
        assert m.total_area() == pytest.approx(9.0 * disc8.total_area(),
                                               rel=1e-13)


class TestJsonInterchange:
    def test_roundtrip_embedded(self, tmp_path, disc8):
        path = tmp_path / "disc.json"
        ms.save_mesh(path, disc8)
        m2, f = ms.load_mesh(path)
        assert f is None
        assert m2.total_area() == pytest.approx(disc8.total_area(), rel=1e-15)
        assert ms.topology(m2) == ms.topology(disc8)

    def test_roundtrip_intrinsic_with_map(self, tmp_path, branched12):
        mesh, f = branched12
        path = tmp_path / "branched.json"
        ms.save_mesh(path, mesh, f)
        m2, f2 = ms.load_mesh(path)
        assert m2.positions is None
        assert f2.degree == 2
        np.testing.assert_allclose(f2.values, f.values, rtol=0, atol=1e-15)
        assert m2.total_area() == pytest.approx(mesh.total_area(), rel=1e-15)

    def test_exactly_one_metric_source(self, tmp_path, disc8):
        doc = ms.mesh.mesh_to_json_dict(disc8)
        doc["edge_lengths"] = [[0, 1, 1.0]]
        with pytest.raises(MeshError, match="exactly one"):
            ms.mesh.mesh_from_json_dict(doc)

    def test_deterministic_serialization(self, disc8):
        a = json.dumps(ms.mesh.mesh_to_json_dict(disc8), sort_keys=True)
        b = json.dumps(ms.mesh.mesh_to_json_dict(ms.generate_disc(8)),
                       sort_keys=True)
        assert a == b


def test_square_fixture_valid():
    m = square_mesh(4)
    assert m.total_area() == pytest.approx(1.0, rel=1e-14)
    assert ms.topology(m) == ms.Topology(0, 1, 1)
