"""Linear finite elements for the weighted Neumann eigenproblem in 2D.

The bilinear forms are assembled in the coordinates the mesh lives in.  For
the hyperbolic plane the mesh is a region of the Poincare unit disk; the
Dirichlet integral of the disk model is conformally invariant in two
dimensions, so the stiffness integrand carries only the radial weight factor
``exp(-phi(t))`` with ``t`` the geodesic distance of the quadrature point
from the model origin.  The mass integrand additionally picks up the squared
conformal factor ``(2 / (1 - |x|^2))^2``.  In the flat case both reduce to
the familiar weighted forms with ``t = |x|``.

No boundary terms appear anywhere: leaving the boundary alone *is* the
natural condition for these forms, and the kernel of the stiffness matrix is
exactly the constants (checked after every solve).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .mesh import Mesh
from .spaceform import SpaceForm
from .weights import WeightFunction


class AssemblyError(RuntimeError):
    """Mesh, geometry, and weight are mutually inconsistent."""


class EigsolveError(RuntimeError):
    """The sparse eigensolve did not produce a trustworthy spectrum."""


# Six-point rule, exact through polynomial degree four, weights sum to one.
_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322
QUAD_BARY = np.array(
    [
        [1.0 - 2.0 * _A1, _A1, _A1],
        [_A1, 1.0 - 2.0 * _A1, _A1],
        [_A1, _A1, 1.0 - 2.0 * _A1],
        [1.0 - 2.0 * _A2, _A2, _A2],
        [_A2, 1.0 - 2.0 * _A2, _A2],
        [_A2, _A2, 1.0 - 2.0 * _A2],
    ]
)
QUAD_WEIGHTS = np.array([_W1, _W1, _W1, _W2, _W2, _W2])

RESIDUAL_TOL = 1e-8
ZERO_MODE_REL_TOL = 1e-6
POINCARE_MARGIN = 1e-12


@dataclass
class AssembledForms:
    """Stiffness and mass matrices of one discretised problem."""

    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    mesh: Mesh = field(repr=False)
    space: SpaceForm = field(repr=False)
    weight: WeightFunction = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.stiffness.shape[0]

    def weighted_volume(self) -> float:
        """Weighted volume of the meshed region: the total mass ``sum(M)``.

        For the discrete problem this is exact, not an approximation: the
        quadrature integrates the weight over the union of the triangles, and
        that union is the domain the discrete operator lives on.
        """
        return float(self.mass.sum())


def _geodesic_radii(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    r = np.hypot(points[..., 0], points[..., 1])
    if not space.is_hyperbolic:
        return r
    if np.max(r) >= 1.0 - POINCARE_MARGIN:
        raise AssemblyError(
            "hyperbolic meshes must stay strictly inside the Poincare unit "
            f"disk; found |x| = {np.max(r):.12g}"
        )
    return 2.0 * np.arctanh(r)


def assemble(mesh: Mesh, space: SpaceForm, weight: WeightFunction) -> AssembledForms:
    """Build the weighted stiffness and mass matrices on a mesh.

    The weight must be certified and its domain must cover the farthest mesh
    node (measured geodesically for the hyperbolic case).
    """
    if not weight.certified:
        raise AssemblyError(
            "weight must pass certification before it reaches the assembler"
        )
    node_t = _geodesic_radii(space, mesh.nodes)
    if np.max(node_t) > weight.domain_cap:
        raise AssemblyError(
            f"weight is only defined up to t = {weight.domain_cap:g} but the "
            f"mesh reaches geodesic radius {np.max(node_t):.6g}"
        )

    p = mesh.nodes[mesh.triangles]  # (M, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    two_area = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.min(two_area) <= 0:
        raise AssemblyError("mesh contains a non-positive triangle")
    area = 0.5 * two_area

    # constant P1 gradients, b[:, i] = grad of the hat at vertex i
    b = np.empty_like(p)
    b[:, 0, 0] = p[:, 1, 1] - p[:, 2, 1]
    b[:, 0, 1] = p[:, 2, 0] - p[:, 1, 0]
    b[:, 1, 0] = p[:, 2, 1] - p[:, 0, 1]
    b[:, 1, 1] = p[:, 0, 0] - p[:, 2, 0]
    b[:, 2, 0] = p[:, 0, 1] - p[:, 1, 1]
    b[:, 2, 1] = p[:, 1, 0] - p[:, 0, 0]
    b /= two_area[:, None, None]

    quad_xy = np.einsum("qi,mid->qmd", QUAD_BARY, p)  # (6, M, 2)
    t = _geodesic_radii(space, quad_xy)
    density = np.exp(-weight.value(t))  # (6, M)
    mass_density = density
    if space.is_hyperbolic:
        rr = np.hypot(quad_xy[..., 0], quad_xy[..., 1])
        lam = 2.0 / (1.0 - rr * rr)
        mass_density = density * lam * lam

    stiff_coeff = area * np.einsum("q,qm->m", QUAD_WEIGHTS, density)
    k_local = np.einsum("mid,mjd,m->mij", b, b, stiff_coeff)

    # Mloc[i, j] = area * sum_q w_q bary_q[i] bary_q[j] rho(x_q)
    m_local = np.einsum(
        "q,qi,qj,qm,m->mij", QUAD_WEIGHTS, QUAD_BARY, QUAD_BARY, mass_density, area
    )

    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = len(mesh.nodes)
    stiffness = sparse.coo_matrix(
        (k_local.ravel(), (rows, cols)), shape=(n, n)
    ).tocsr()
    mass = sparse.coo_matrix((m_local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return AssembledForms(
        stiffness=stiffness, mass=mass, mesh=mesh, space=space, weight=weight
    )


@dataclass
class SpectrumResult:
    """Lowest nonzero modes of one assembled problem.

    ``eigenvalues`` excludes the constant mode, whose computed value and
    spatial spread are recorded separately as solver diagnostics.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray = field(repr=False)
    zero_mode_value: float = 0.0
    zero_mode_spread: float = 0.0
    residuals: np.ndarray = field(default=None, repr=False)
    dimension: int = 0


def solve_lowest(forms: AssembledForms, count: int = 1) -> SpectrumResult:
    """Lowest ``count`` nonzero eigenvalues via shift-inverted Lanczos.

    The shift sits just below zero (scaled by the mean diagonal of the
    stiffness matrix) so the factorised operator is definite and the constant
    mode comes out first.  The constant mode is then verified: its eigenvalue
    must vanish relative to the spectral gap and its vector must be flat.
    Every returned pair is residual-checked against the original matrices.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    K, M = forms.stiffness, forms.mass
    dim = K.shape[0]
    if count + 1 >= dim:
        raise EigsolveError(
            f"requested {count} modes on a {dim}-node mesh; refine the mesh"
        )
    sigma = -1e-8 * K.diagonal().sum() / dim
    try:
        vals, vecs = eigsh(K, k=count + 1, M=M, sigma=sigma, which="LM")
    except Exception as exc:  # arpack failures come in several flavours
        raise EigsolveError(f"sparse eigensolve failed: {exc}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    gap = vals[1]
    if gap <= 0:
        raise EigsolveError(
            f"first nonzero eigenvalue came out nonpositive ({gap:.3g})"
        )
    if abs(vals[0]) > ZERO_MODE_REL_TOL * gap:
        raise EigsolveError(
            f"constant-mode eigenvalue {vals[0]:.3g} is not small against the "
            f"spectral gap {gap:.3g}; the mesh may be disconnected"
        )
    flat = vecs[:, 0]
    spread = float(np.ptp(flat) / np.max(np.abs(flat)))
    if spread > 1e-5:
        raise EigsolveError(
            f"constant mode varies by {spread:.3g} across the mesh"
        )

    kept_vals = vals[1:]
    kept_vecs = vecs[:, 1:]
    residuals = np.empty(count)
    for i in range(count):
        x = kept_vecs[:, i]
        kx = K @ x
        residuals[i] = np.linalg.norm(kx - kept_vals[i] * (M @ x)) / np.linalg.norm(kx)
    if np.max(residuals) > RESIDUAL_TOL:
        raise EigsolveError(
            f"eigenpair residual {np.max(residuals):.3g} exceeds {RESIDUAL_TOL:g}"
        )
    return SpectrumResult(
        eigenvalues=kept_vals,
        modes=kept_vecs,
        zero_mode_value=float(vals[0]),
        zero_mode_spread=spread,
        residuals=residuals,
        dimension=dim,
    )


def lowest_nonzero(
    mesh: Mesh, space: SpaceForm, weight: WeightFunction, count: int = 1
) -> SpectrumResult:
    """Assemble and solve in one call."""
    return solve_lowest(assemble(mesh, space, weight), count=count)
