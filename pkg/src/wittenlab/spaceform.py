"""Geometry kernel for the two ambient space forms: flat space and hyperbolic space.

Curvature is restricted to 0 and -1.  The metric coefficient ``S(t)`` (``t``
for flat space, ``sinh t`` for hyperbolic space) and its derivative ``C(t)``
drive everything downstream: radial ODEs, weighted volumes, and the conformal
mass factor of the Poincare disk model.  The spherical-cap case ``+1`` is
rejected up front rather than half-supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .weights import UncertifiedWeightError, WeightFunction

EUCLIDEAN = 0
HYPERBOLIC = -1


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge to the requested tolerance."""


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected space form of curvature ``0`` (flat) or ``-1``."""

    curvature: int

    def __post_init__(self):
        if self.curvature not in (EUCLIDEAN, HYPERBOLIC):
            raise ValueError(
                f"curvature must be 0 or -1, got {self.curvature!r}; "
                "the positively curved case is out of scope"
            )

    @property
    def is_hyperbolic(self) -> bool:
        return self.curvature == HYPERBOLIC

    def s(self, t):
        return s_kappa(t, self)

    def c(self, t):
        return c_kappa(t, self)


FLAT = SpaceForm(EUCLIDEAN)
HYPERBOLIC_SPACE = SpaceForm(HYPERBOLIC)


@dataclass(frozen=True)
class BallSpec:
    """Geodesic ball centred at the origin of the ambient space form."""

    radius: float
    dimension: int
    space: SpaceForm

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be positive and finite")
        if not isinstance(self.dimension, (int, np.integer)) or self.dimension < 2:
            raise ValueError("dimension must be an integer >= 2")


def _check_nonnegative(t: np.ndarray) -> None:
    if np.min(t) < -1e-12:
        raise ValueError("geodesic distance t must be >= 0")


def s_kappa(t, space: SpaceForm):
    """Metric coefficient: ``t`` in flat space, ``sinh t`` in hyperbolic space."""
    arr = np.asarray(t, dtype=float)
    _check_nonnegative(arr)
    if space.is_hyperbolic:
        out = np.sinh(arr)
    else:
        out = arr.copy()
    return out if out.ndim else float(out)


def c_kappa(t, space: SpaceForm):
    """Derivative of :func:`s_kappa`: ``1`` in flat space, ``cosh t`` otherwise."""
    arr = np.asarray(t, dtype=float)
    _check_nonnegative(arr)
    if space.is_hyperbolic:
        out = np.cosh(arr)
    else:
        out = np.ones_like(arr)
    return out if out.ndim else float(out)


def geodesic_distance_poincare(x) -> float:
    """Geodesic distance from the origin of a point of the Poincare unit disk.

    ``x`` is a point in disk coordinates with ``|x| < 1``; the distance is
    ``2 artanh |x|``.
    """
    v = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(v))
    if r >= 1.0:
        raise ValueError(f"point with |x| = {r:.6g} lies outside the Poincare unit disk")
    return 2.0 * math.atanh(r)


def poincare_radius(geodesic_radius: float) -> float:
    """Disk-model radius corresponding to a geodesic radius: ``tanh(R/2)``."""
    if geodesic_radius <= 0:
        raise ValueError("geodesic radius must be positive")
    return math.tanh(0.5 * geodesic_radius)


def unit_sphere_area(dimension: int) -> float:
    """Surface measure of the unit sphere bounding the unit ball of ``R^n``.

    Equals ``2 pi^{n/2} / Gamma(n/2)``; the standard library Gamma carries
    more than the required 1e-12 relative accuracy here.
    """
    if dimension < 2:
        raise ValueError("dimension must be >= 2")
    n = float(dimension)
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _adaptive_integral(fn, lo: float, hi: float, rel_tol: float, points=None) -> float:
    value, abserr = integrate.quad(
        fn, lo, hi, epsabs=1e-300, epsrel=rel_tol, limit=200, points=points
    )
    scale = max(abs(value), 1e-300)
    if abserr > 10.0 * rel_tol * scale:
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3g} exceeds budget "
            f"{rel_tol:.3g} * {scale:.3g}; the weight may be badly sampled"
        )
    return value


def weighted_annulus_volume(
    space: SpaceForm,
    dimension: int,
    phi: WeightFunction,
    inner_radius: float,
    outer_radius: float,
    rel_tol: float = 1e-10,
) -> float:
    """Weighted volume of the centred annulus ``inner <= t <= outer``.

    Computed as ``sigma_{n-1} * int S(t)^{n-1} exp(-phi(t)) dt`` by adaptive
    quadrature with relative tolerance ``rel_tol``.  Requires a certified
    weight whose cap covers ``outer_radius``.
    """
    if not phi.certified:
        raise UncertifiedWeightError(
            "weighted volume requires a certified weight; run property_I_certify first"
        )
    if inner_radius < 0 or outer_radius < inner_radius:
        raise ValueError("need 0 <= inner_radius <= outer_radius")
    if outer_radius > phi.domain_cap * (1.0 + 1e-12):
        raise ValueError(
            f"outer radius {outer_radius:.6g} exceeds the weight's certified "
            f"cap {phi.domain_cap:.6g}"
        )
    if outer_radius == inner_radius:
        return 0.0
    n = dimension
    sigma = unit_sphere_area(n)

    def integrand(t: float) -> float:
        s = s_kappa(t, space)
        return s ** (n - 1) * math.exp(-float(phi.value(t)))

    return sigma * _adaptive_integral(integrand, inner_radius, outer_radius, rel_tol)


def weighted_ball_volume(ball: BallSpec, phi: WeightFunction, rel_tol: float = 1e-10) -> float:
    """Weighted volume of a centred geodesic ball; see :func:`weighted_annulus_volume`."""
    return weighted_annulus_volume(ball.space, ball.dimension, phi, 0.0, ball.radius, rel_tol)
