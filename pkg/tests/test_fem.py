"""Finite element tests.

The single-triangle stiffness and mass matrices are checked against matrices
multiplied out by hand.  Spectra are checked against the separable square,
the frozen disk constant from the radial suite, and the radial shooting
solver in the hyperbolic case, which exercises the conformal-factor handling
end to end.
"""

import math

import numpy as np
import pytest

from wittenlab import fem
from wittenlab.fem import AssemblyError, EigsolveError, assemble, lowest_nonzero, solve_lowest
from wittenlab.mesh import DomainSpec, Mesh, generate, refine
from wittenlab.radial import shoot_first_mode
from wittenlab.spaceform import BallSpec, SpaceForm, poincare_radius
from wittenlab.weights import make_weight, property_I_certify

MU1_DISK = 3.389957716671889  # frozen in test_radial.py

FLAT = SpaceForm(curvature=0)
HYP = SpaceForm(curvature=-1)


def certified(family, params, cap=50.0):
    w = make_weight(family, params, domain_cap=cap)
    property_I_certify(w)
    return w


@pytest.fixture(scope="module")
def phi_zero():
    return certified("constant", (0.0,))


@pytest.fixture(scope="module")
def unit_triangle():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    tris = np.array([[0, 1, 2]])
    return Mesh(nodes=nodes, triangles=tris,
                boundary_nodes=np.array([0, 1, 2]), domain_tag="unit-triangle")


class TestAssembly:
    def test_reference_triangle_matrices(self, unit_triangle, phi_zero):
        forms = assemble(unit_triangle, FLAT, phi_zero)
        k_ref = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
        m_ref = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 24.0
        assert np.allclose(forms.stiffness.toarray(), k_ref, atol=1e-14)
        assert np.allclose(forms.mass.toarray(), m_ref, atol=1e-15)

    def test_quadrature_rule_normalised(self):
        assert abs(fem.QUAD_WEIGHTS.sum() - 1.0) < 1e-15
        assert np.allclose(fem.QUAD_BARY.sum(axis=1), 1.0, atol=1e-15)
        # degree-4 exactness on the reference triangle: x^2 y^2 and x^4
        x, y = fem.QUAD_BARY[:, 1], fem.QUAD_BARY[:, 2]
        assert abs(np.dot(fem.QUAD_WEIGHTS, x**2 * y**2) - 2 * 1.0 / 180.0) < 1e-15
        assert abs(np.dot(fem.QUAD_WEIGHTS, x**4) - 2 * 1.0 / 30.0) < 1e-15

    def test_constants_in_stiffness_kernel(self, phi_zero):
        mesh = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.15))
        w = certified("exponential-decay", (0.0, 1.0, 0.7))
        for weight in (phi_zero, w):
            forms = assemble(mesh, FLAT, weight)
            ones = np.ones(forms.dimension)
            assert np.max(np.abs(forms.stiffness @ ones)) < 1e-12

    def test_mass_total_is_weighted_area_flat(self):
        mesh = refine(generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.1)))
        forms = assemble(mesh, FLAT, certified("constant", (0.0,)))
        # polygon inscribed in the circle: slightly below pi, O(h^2) off
        assert abs(forms.weighted_volume() - math.pi) < 1e-3

    def test_mass_total_is_weighted_area_hyperbolic(self, phi_zero):
        rd = poincare_radius(1.0)
        mesh = refine(generate(DomainSpec(shape="disk", radius=rd, target_edge_length=0.02)))
        area = assemble(mesh, HYP, phi_zero).weighted_volume()
        assert abs(area - 2.0 * math.pi * (math.cosh(1.0) - 1.0)) < 1e-3

    def test_uncertified_weight_rejected(self, unit_triangle):
        raw = make_weight("constant", (0.0,), domain_cap=50.0)
        with pytest.raises(AssemblyError, match="certification"):
            assemble(unit_triangle, FLAT, raw)

    def test_undersized_weight_domain_rejected(self, unit_triangle):
        small = certified("constant", (0.0,), cap=0.5)
        with pytest.raises(AssemblyError, match="defined up to"):
            assemble(unit_triangle, FLAT, small)

    def test_mesh_outside_poincare_disk_rejected(self, phi_zero):
        mesh = generate(DomainSpec(shape="disk", radius=1.2, target_edge_length=0.3))
        with pytest.raises(AssemblyError, match="Poincare"):
            assemble(mesh, HYP, phi_zero)


class TestSpectra:
    def test_square_separable_spectrum(self, phi_zero):
        # the mode-four pairs need the finer pitch: P1 error grows with mu h^2
        mesh = generate(
            DomainSpec(
                shape="polygon",
                vertices=((0, 0), (1, 0), (1, 1), (0, 1)),
                target_edge_length=0.04,
            )
        )
        res = lowest_nonzero(mesh, FLAT, phi_zero, count=5)
        expected = math.pi**2 * np.array([1.0, 1.0, 2.0, 4.0, 4.0])
        assert np.max(np.abs(res.eigenvalues / expected - 1.0)) < 0.01

    def test_disk_value_and_double_multiplicity(self, phi_zero):
        mesh = refine(generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.1)))
        res = lowest_nonzero(mesh, FLAT, phi_zero, count=2)
        assert abs(res.eigenvalues[0] / MU1_DISK - 1.0) < 5e-3
        # exact mesh symmetry keeps the discrete doublet degenerate
        assert abs(res.eigenvalues[1] / res.eigenvalues[0] - 1.0) < 1e-3

    def test_hyperbolic_ball_matches_shooting(self, phi_zero):
        geodesic_radius = 1.0
        reference = shoot_first_mode(BallSpec(geodesic_radius, 2, HYP), phi_zero).mu
        mesh = refine(
            generate(
                DomainSpec(
                    shape="disk",
                    radius=poincare_radius(geodesic_radius),
                    target_edge_length=0.02,
                )
            )
        )
        res = lowest_nonzero(mesh, HYP, phi_zero, count=1)
        assert abs(res.eigenvalues[0] / reference - 1.0) < 5e-3

    def test_weighted_hyperbolic_ball_matches_shooting(self):
        w = certified("linear-decreasing", (0.3, 0.5))
        reference = shoot_first_mode(BallSpec(1.0, 2, HYP), w).mu
        mesh = refine(
            generate(
                DomainSpec(shape="disk", radius=poincare_radius(1.0), target_edge_length=0.02)
            )
        )
        res = lowest_nonzero(mesh, HYP, w, count=1)
        assert abs(res.eigenvalues[0] / reference - 1.0) < 5e-3

    def test_quadratic_convergence(self, phi_zero):
        mesh = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.1))
        errors = []
        for _ in range(3):
            res = lowest_nonzero(mesh, FLAT, phi_zero, count=1)
            errors.append(abs(res.eigenvalues[0] - MU1_DISK))
            mesh = refine(mesh)
        assert errors[0] > errors[1] > errors[2]
        for coarse, fine in zip(errors, errors[1:]):
            assert abs(coarse / fine - 4.0) < 0.5

    def test_solver_diagnostics(self, phi_zero):
        mesh = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.1))
        res = solve_lowest(assemble(mesh, FLAT, phi_zero), count=3)
        assert abs(res.zero_mode_value) < 1e-9
        assert res.zero_mode_spread < 1e-10
        assert np.max(res.residuals) <= fem.RESIDUAL_TOL
        assert res.dimension == len(mesh.nodes)
        assert res.modes.shape == (res.dimension, 3)
        # modes are mass-orthogonal to constants
        m_total = assemble(mesh, FLAT, phi_zero).mass @ np.ones(res.dimension)
        assert np.max(np.abs(res.modes.T @ m_total)) < 1e-8

    def test_count_validation(self, unit_triangle, phi_zero):
        forms = assemble(unit_triangle, FLAT, phi_zero)
        with pytest.raises(ValueError):
            solve_lowest(forms, count=0)
        with pytest.raises(EigsolveError, match="refine"):
            solve_lowest(forms, count=2)

    def test_translated_disk_same_spectrum_without_weight(self, phi_zero):
        # with phi constant the problem is translation invariant
        a = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.08))
        b = generate(
            DomainSpec(
                shape="translated-disk", radius=1.0, center=(5.0, 3.0), target_edge_length=0.08
            )
        )
        mu_a = lowest_nonzero(a, FLAT, phi_zero, count=1).eigenvalues[0]
        mu_b = lowest_nonzero(b, FLAT, phi_zero, count=1).eigenvalues[0]
        assert abs(mu_a - mu_b) < 1e-12 * mu_a

    def test_translated_disk_weight_breaks_translation(self):
        # a genuinely decreasing weight sees the displacement
        w = certified("exponential-decay", (0.0, 1.0, 0.5), cap=60.0)
        a = generate(DomainSpec(shape="disk", radius=1.0, target_edge_length=0.08))
        b = generate(
            DomainSpec(
                shape="translated-disk", radius=1.0, center=(2.0, 0.0), target_edge_length=0.08
            )
        )
        mu_a = lowest_nonzero(a, FLAT, w, count=1).eigenvalues[0]
        mu_b = lowest_nonzero(b, FLAT, w, count=1).eigenvalues[0]
        assert abs(mu_a - mu_b) > 1e-3 * mu_a
