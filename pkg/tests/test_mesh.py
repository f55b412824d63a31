"""Mesh generator tests.

Structural invariants are checked through validate(); geometric quality is
checked against closed-form areas (shoelace for polygons, pi for the unit
disk after refinement).  The eight-fold symmetry test matches rotated node
coordinates with a KD-tree and then demands exact equality of the permuted
triangle set, since the band zipper makes its choices in integer arithmetic.
"""

import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from wittenlab import mesh as msh
from wittenlab.mesh import (
    DomainSpec,
    Mesh,
    MeshFormatError,
    MeshInvariantError,
    generate,
    load,
    refine,
    save,
    validate,
)


def tri_set(m):
    return {tuple(sorted(t)) for t in m.triangles}


class TestDisk:
    def test_valid_and_edge_band(self):
        m = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.1))
        validate(m)
        el = m.edge_lengths()
        assert el.min() >= 0.05 and el.max() <= 0.2

    def test_area_converges_quadratically(self):
        m = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.1))
        e0 = math.pi - m.area()
        e1 = math.pi - refine(m).area()
        assert e0 > e1 > 0
        assert abs(e0 / e1 - 4.0) < 0.1

    def test_eightfold_equivariance(self):
        m = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.15))
        ang = math.pi / 4.0
        rot = np.array(
            [[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]]
        )
        dist, perm = cKDTree(m.nodes).query(m.nodes @ rot.T)
        assert dist.max() < 1e-12
        assert {tuple(sorted(perm[t])) for t in m.triangles} == tri_set(m)

    def test_boundary_nodes_on_circle(self):
        m = generate(DomainSpec(shape="disk", radius=2.5, target_edge_length=0.2))
        r = np.hypot(*m.nodes[m.boundary_nodes].T)
        assert np.allclose(r, 2.5, atol=1e-12)

    def test_off_center_disk_rejected(self):
        with pytest.raises(ValueError, match="translated-disk"):
            DomainSpec(shape="disk", radius=1.0, center=(0.5, 0.0))


class TestTranslatedDisk:
    def test_is_exact_translate(self):
        a = generate(DomainSpec(shape="disk", radius=0.7, target_edge_length=0.1))
        b = generate(
            DomainSpec(
                shape="translated-disk",
                radius=0.7,
                center=(3.0, -2.0),
                target_edge_length=0.1,
            )
        )
        assert np.array_equal(a.triangles, b.triangles)
        assert np.allclose(b.nodes - np.array([3.0, -2.0]), a.nodes, atol=1e-12)


class TestEllipse:
    def test_aspect_parameterisation_keeps_area(self):
        # aspect a with semi-axes (a, 1/a) always encloses area pi
        m = generate(DomainSpec(shape="ellipse", aspect=1.4, target_edge_length=0.05))
        assert abs(m.area() - math.pi) < 5e-3

    def test_boundary_on_curve(self):
        m = generate(
            DomainSpec(
                shape="ellipse", semi_axis_x=1.5, semi_axis_y=0.8, target_edge_length=0.1
            )
        )
        x, y = m.nodes[m.boundary_nodes].T
        assert np.allclose((x / 1.5) ** 2 + (y / 0.8) ** 2, 1.0, atol=1e-12)

    def test_parameter_conflicts(self):
        with pytest.raises(ValueError):
            DomainSpec(shape="ellipse", aspect=1.2, semi_axis_x=1.0, semi_axis_y=1.0)
        with pytest.raises(ValueError):
            DomainSpec(shape="ellipse")
        with pytest.raises(ValueError):
            DomainSpec(shape="ellipse", aspect=-2.0)


class TestAnnulus:
    def test_topology_and_boundaries(self):
        m = generate(
            DomainSpec(
                shape="annulus", inner_radius=0.5, outer_radius=1.5, target_edge_length=0.1
            )
        )
        validate(m)
        counts = msh._edge_counts(m.triangles)
        V, E, F = len(m.nodes), len(counts), len(m.triangles)
        assert V - E + F == 0  # one hole
        r = np.hypot(*m.nodes[m.boundary_nodes].T)
        near_in = np.isclose(r, 0.5, atol=1e-12)
        near_out = np.isclose(r, 1.5, atol=1e-12)
        assert np.all(near_in | near_out)
        assert near_in.any() and near_out.any()

    def test_area(self):
        m = generate(
            DomainSpec(
                shape="annulus", inner_radius=0.5, outer_radius=1.5, target_edge_length=0.05
            )
        )
        assert abs(m.area() - math.pi * (1.5**2 - 0.5**2)) < 4e-3

    def test_bad_radii(self):
        with pytest.raises(ValueError):
            DomainSpec(shape="annulus", inner_radius=1.0, outer_radius=0.5)
        with pytest.raises(ValueError):
            DomainSpec(shape="annulus", inner_radius=0.0, outer_radius=1.0)


class TestPerturbedDisk:
    def test_boundary_matches_polar_graph(self):
        spec = DomainSpec(
            shape="perturbed-disk",
            radius=1.0,
            perturbation=((2, 0.1), (5, 0.03)),
            target_edge_length=0.1,
        )
        m = generate(spec)
        pts = m.nodes[m.boundary_nodes]
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        rho = np.hypot(pts[:, 0], pts[:, 1])
        assert np.allclose(rho, spec.boundary_radius(theta), atol=1e-12)

    def test_pinched_boundary_rejected(self):
        with pytest.raises(ValueError, match="pinch"):
            DomainSpec(shape="perturbed-disk", radius=1.0, perturbation=((1, 0.97),))

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            DomainSpec(shape="perturbed-disk", radius=1.0, perturbation=((0, 0.1),))


class TestPolygon:
    def test_unit_square_exact_area(self):
        m = generate(
            DomainSpec(
                shape="polygon",
                vertices=((0, 0), (1, 0), (1, 1), (0, 1)),
                target_edge_length=0.1,
            )
        )
        validate(m)
        assert abs(m.area() - 1.0) < 1e-12
        assert m.edge_lengths().max() <= 1.9 * 0.1

    def test_nonconvex(self):
        verts = ((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2))
        m = generate(DomainSpec(shape="polygon", vertices=verts, target_edge_length=0.2))
        assert abs(m.area() - 3.0) < 1e-12

    def test_clockwise_input_reoriented(self):
        cw = ((0, 0), (0, 1), (1, 1), (1, 0))
        m = generate(DomainSpec(shape="polygon", vertices=cw, target_edge_length=0.3))
        assert np.all(m.signed_areas() > 0)

    def test_self_intersection_rejected(self):
        with pytest.raises(ValueError, match="self-intersecting"):
            generate(
                DomainSpec(
                    shape="polygon",
                    vertices=((0, 0), (1, 1), (1, 0), (0, 1)),
                    target_edge_length=0.5,
                )
            )

    def test_repeated_vertex_rejected(self):
        with pytest.raises(ValueError, match="repeated"):
            generate(
                DomainSpec(
                    shape="polygon",
                    vertices=((0, 0), (1, 0), (1, 0), (0, 1)),
                    target_edge_length=0.5,
                )
            )

    def test_too_few_vertices(self):
        with pytest.raises(ValueError):
            DomainSpec(shape="polygon", vertices=((0, 0), (1, 0)))

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.floats(min_value=-1.0, max_value=1.0),
                st.floats(min_value=-1.0, max_value=1.0),
            ),
            min_size=4,
            max_size=9,
        )
    )
    def test_random_star_polygons(self, pts):
        # order points by angle about the centroid: star-shaped, hence simple
        arr = np.asarray(pts, dtype=float)
        arr = arr - arr.mean(axis=0)
        order = np.argsort(np.arctan2(arr[:, 1], arr[:, 0]))
        arr = arr[order]
        angles = np.arctan2(arr[:, 1], arr[:, 0])
        if len(np.unique(np.round(angles, 9))) != len(arr):
            return  # angular ties break star-shapedness
        if np.min(np.abs(np.diff(arr, axis=0, append=arr[:1]))) < 1e-3:
            return
        shoelace = 0.5 * np.sum(
            arr[:, 0] * np.roll(arr[:, 1], -1) - np.roll(arr[:, 0], -1) * arr[:, 1]
        )
        if abs(shoelace) < 1e-2:
            return
        try:
            spec = DomainSpec(shape="polygon", vertices=tuple(map(tuple, arr)),
                              target_edge_length=0.5)
        except ValueError:
            return
        m = generate(spec)
        validate(m)
        assert abs(m.area() - abs(shoelace)) < 1e-10


class TestRefine:
    def test_counts_and_conformity(self):
        m = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.2))
        E = len(msh._edge_counts(m.triangles))
        r = refine(m)
        assert len(r.nodes) == len(m.nodes) + E
        assert len(r.triangles) == 4 * len(m.triangles)
        validate(r)

    def test_projection_for_analytic_boundary(self):
        m = refine(generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.2)))
        r = np.hypot(*m.nodes[m.boundary_nodes].T)
        assert np.abs(r - 1.0).max() < 1e-14

    def test_annulus_projection_picks_nearer_circle(self):
        m = refine(
            generate(
                DomainSpec(
                    shape="annulus",
                    inner_radius=0.5,
                    outer_radius=1.5,
                    target_edge_length=0.2,
                )
            )
        )
        r = np.hypot(*m.nodes[m.boundary_nodes].T)
        assert np.all(np.isclose(r, 0.5, atol=1e-12) | np.isclose(r, 1.5, atol=1e-12))

    def test_polygon_not_projected(self):
        m = generate(
            DomainSpec(
                shape="polygon",
                vertices=((0, 0), (1, 0), (1, 1), (0, 1)),
                target_edge_length=0.4,
            )
        )
        r = refine(m)
        pts = r.nodes[r.boundary_nodes]
        on_outline = (
            np.isclose(pts[:, 0], 0) | np.isclose(pts[:, 0], 1)
            | np.isclose(pts[:, 1], 0) | np.isclose(pts[:, 1], 1)
        )
        assert np.all(on_outline)


class TestFileFormat:
    def test_roundtrip_bit_exact(self, tmp_path):
        m = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.15))
        p = tmp_path / "disk.wslmesh"
        save(m, p)
        back = load(p)
        assert np.array_equal(m.nodes, back.nodes)
        assert np.array_equal(m.triangles, back.triangles)
        assert np.array_equal(np.sort(m.boundary_nodes), back.boundary_nodes)
        assert back.domain_tag == "external"
        assert back.spec is None
        # a second save of the loaded mesh reproduces the file byte for byte
        p2 = tmp_path / "disk2.wslmesh"
        save(back, p2)
        assert p.read_bytes() == p2.read_bytes()

    def test_loaded_mesh_refines_without_projection(self, tmp_path):
        m = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.2))
        p = tmp_path / "m.wslmesh"
        save(m, p)
        r = refine(load(p))
        radii = np.hypot(*r.nodes[r.boundary_nodes].T)
        assert radii.min() < 1.0 - 1e-6  # chord midpoints stay put

    def test_header_rejected(self, tmp_path):
        p = tmp_path / "bad.wslmesh"
        p.write_text("WSLMESH 9\n0 0 0\n")
        with pytest.raises(MeshFormatError, match="header"):
            load(p)

    def test_count_mismatch(self, tmp_path):
        p = tmp_path / "bad.wslmesh"
        p.write_text("WSLMESH 1\n3 1 3\n0.0 0.0\n1.0 0.0\n")
        with pytest.raises(MeshFormatError):
            load(p)

    def test_malformed_float(self, tmp_path):
        p = tmp_path / "bad.wslmesh"
        p.write_text(
            "WSLMESH 1\n3 1 3\n0.0 zero\n1.0 0.0\n0.0 1.0\n0 1 2\n0\n1\n2\n"
        )
        with pytest.raises(MeshFormatError, match="malformed"):
            load(p)


class TestValidate:
    def unit_triangle(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        tris = np.array([[0, 1, 2]])
        return Mesh(nodes=nodes, triangles=tris,
                    boundary_nodes=np.array([0, 1, 2]), domain_tag="t")

    def test_accepts_single_triangle(self):
        validate(self.unit_triangle())

    def test_rejects_clockwise(self):
        m = self.unit_triangle()
        m.triangles = m.triangles[:, [0, 2, 1]]
        with pytest.raises(MeshInvariantError, match="area"):
            validate(m)

    def test_rejects_wrong_boundary_list(self):
        m = self.unit_triangle()
        m.boundary_nodes = np.array([0, 1])
        with pytest.raises(MeshInvariantError, match="boundary"):
            validate(m)

    def test_rejects_overshared_edge(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.4, 0.4], [1.0, 1.0]])
        tris = np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]])
        m = Mesh(nodes=nodes, triangles=tris,
                 boundary_nodes=np.arange(5), domain_tag="t")
        with pytest.raises(MeshInvariantError, match="more than two"):
            validate(m)

    def test_rejects_out_of_range_index(self):
        m = self.unit_triangle()
        m.triangles = np.array([[0, 1, 7]])
        with pytest.raises(MeshInvariantError):
            validate(m)
