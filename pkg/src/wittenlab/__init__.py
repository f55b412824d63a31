"""Numerical laboratory for Neumann spectra of weighted (drift) Laplacians.

The package computes low Neumann eigenvalues of the operator
``Delta u - <grad(phi), grad(u)>`` on bounded domains of flat space and of
hyperbolic space, and checks a family of spectral isoperimetric inequalities
that compare a domain against the centred geodesic ball of equal weighted
volume.  All public entry points are pure functions over immutable inputs;
parallel callers never share mutable state.
"""

from .spaceform import (
    EUCLIDEAN,
    HYPERBOLIC,
    BallSpec,
    QuadratureError,
    SpaceForm,
    c_kappa,
    geodesic_distance_poincare,
    poincare_radius,
    s_kappa,
    unit_sphere_area,
    weighted_annulus_volume,
    weighted_ball_volume,
)
from .weights import (
    CertificationReport,
    UncertifiedWeightError,
    WeightFunction,
    make_weight,
    property_I_certify,
)

__version__ = "0.1.0"

__all__ = [
    "EUCLIDEAN",
    "HYPERBOLIC",
    "BallSpec",
    "CertificationReport",
    "QuadratureError",
    "SpaceForm",
    "UncertifiedWeightError",
    "WeightFunction",
    "c_kappa",
    "geodesic_distance_poincare",
    "make_weight",
    "poincare_radius",
    "property_I_certify",
    "s_kappa",
    "unit_sphere_area",
    "weighted_annulus_volume",
    "weighted_ball_volume",
]
