"""Inequality verification: volume matching, reciprocal-sum bounds, sharper
gap terms, open-question sweeps, and the pointwise vector-field facts behind
them.

The central object compares a domain against the centred geodesic ball of
equal weighted volume.  With ``mu_1 <= ... <= mu_{n-1}`` the first nonzero
Neumann eigenvalues of the domain and ``mu_1(ball)`` that of the matched
ball, the verified statement is

    sum_{i<n} 1/mu_i(domain)  >=  (n-1) / mu_1(ball),

with equality exactly at the ball.  Two discretisation paths feed this:
plane domains go through the mesh/FEM pipeline (either curvature), and
radially symmetric domains in any dimension go through the shooting solver
with the mode-degree decomposition.  On the FEM path the triangulated
polygon is taken to *be* the domain, so its weighted volume is the exact
mass-matrix total and the only error source is the eigenvalue itself,
estimated by two-level Richardson comparison.

Numerical pass/fail needs a convention.  Ours: a report passes when

    gap >= -3 * (relative eigenvalue error estimate) * max(LHS, RHS),

and the same budget governs the equality checks at the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import ConvexHull

from . import fem
from .mesh import DomainSpec, Mesh, generate, refine
from .radial import (
    DEFAULT_OPTIONS,
    ExtendedProfile,
    RadialSolution,
    ShellSpec,
    ShootingOptions,
    ball_rayleigh_integrals,
    expand_spectrum,
    extend_profile,
    shoot_first_mode,
    symmetric_spectrum,
)
from .spaceform import BallSpec, SpaceForm, weighted_annulus_volume
from .weights import WeightFunction

RADIAL_ERROR_FLOOR = 1e-8
VOLUME_MATCH_TOL = 1e-8
CENTER_RESIDUAL_TOL = 1e-8


class CheckerError(RuntimeError):
    """A verification pipeline could not produce a trustworthy report."""


@dataclass
class InequalityReport:
    """Everything one comparison produced, JSON-friendly via :meth:`as_dict`."""

    domain: str
    dimension: int
    curvature: int
    weight: str
    method: str  # "fem" or "radial"
    volume: float
    matched_radius: float
    volume_match_rel_err: float
    eigenvalues: list[float]
    mu1_ball: float
    lhs: float
    rhs: float
    gap: float
    est_rel_error: float
    tol_budget: float
    passed: bool
    mu1_domain_below_ball: bool
    sharper: dict | None = None
    conjecture: dict | None = None
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "domain": self.domain,
            "dimension": self.dimension,
            "curvature": self.curvature,
            "weight": self.weight,
            "method": self.method,
            "volume": self.volume,
            "matched_radius": self.matched_radius,
            "volume_match_rel_err": self.volume_match_rel_err,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "mu1_ball": self.mu1_ball,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "est_rel_error": self.est_rel_error,
            "tol_budget": self.tol_budget,
            "passed": self.passed,
            "mu1_domain_below_ball": self.mu1_domain_below_ball,
            "sharper": self.sharper,
            "conjecture": self.conjecture,
            "notes": list(self.notes),
        }


def match_ball_radius(
    space: SpaceForm,
    dimension: int,
    phi: WeightFunction,
    target_volume: float,
) -> float:
    """Radius of the centred ball whose weighted volume equals the target.

    The weighted volume is strictly increasing in the radius, so Brent's
    method on ``[0, domain_cap]`` either finds the radius or proves the
    certified range of the weight is too small.
    """
    if not (target_volume > 0 and math.isfinite(target_volume)):
        raise ValueError("target_volume must be positive and finite")
    cap = phi.domain_cap

    def volume_gap(r: float) -> float:
        if r <= 0:
            return -target_volume
        return weighted_annulus_volume(space, dimension, phi, 0.0, r) - target_volume

    top = volume_gap(cap)
    if top < 0:
        raise CheckerError(
            f"target volume {target_volume:.6g} exceeds the ball volume "
            f"{top + target_volume:.6g} at the weight's certified range {cap:g}"
        )
    radius = brentq(volume_gap, 0.0, cap, xtol=1e-15, rtol=8.9e-16)
    rel = abs(volume_gap(radius)) / target_volume
    if rel > VOLUME_MATCH_TOL:
        raise CheckerError(f"volume matching stalled at relative error {rel:.3g}")
    return float(radius)


def _mesh_for(domain) -> Mesh:
    if isinstance(domain, Mesh):
        return domain
    if isinstance(domain, DomainSpec):
        return generate(domain)
    raise TypeError(f"expected DomainSpec or Mesh, got {type(domain).__name__}")


def _fem_eigenvalues(
    domain,
    space: SpaceForm,
    phi: WeightFunction,
    count: int,
    refinements: int,
):
    """Two-level solve: eigenvalues at the finest mesh plus a Richardson
    relative-error estimate from the comparison with one level coarser."""
    mesh = _mesh_for(domain)
    for _ in range(max(0, refinements - 1)):
        mesh = refine(mesh)
    coarse = fem.solve_lowest(fem.assemble(mesh, space, phi), count=count)
    mesh = refine(mesh)
    forms = fem.assemble(mesh, space, phi)
    fine = fem.solve_lowest(forms, count=count)
    est = float(
        np.max(
            np.abs(coarse.eigenvalues - fine.eigenvalues) / (3.0 * fine.eigenvalues)
        )
    )
    return fine.eigenvalues.copy(), est, forms.weighted_volume(), mesh


def _radial_eigenvalues(
    shell: ShellSpec,
    space: SpaceForm,
    phi: WeightFunction,
    dimension: int,
    count: int,
    options: ShootingOptions,
):
    modes = symmetric_spectrum(shell, dimension, space, phi, count, options=options)
    eigs = np.array(expand_spectrum(modes, count))
    volume = weighted_annulus_volume(
        space, dimension, phi, shell.inner_radius, shell.outer_radius
    )
    # shooting residuals understate the eigenvalue error; keep a floor
    est = RADIAL_ERROR_FLOOR
    return eigs, est, volume


def _solve_domain(domain, space, phi, dimension, count, refinements, options):
    if isinstance(domain, ShellSpec):
        if dimension is None:
            raise ValueError("radially symmetric domains need an explicit dimension")
        eigs, est, volume = _radial_eigenvalues(
            domain, space, phi, dimension, count, options
        )
        describe = (
            f"ball(radius={domain.outer_radius:g})"
            if domain.inner_radius == 0.0
            else f"shell({domain.inner_radius:g}, {domain.outer_radius:g})"
        )
        return eigs, est, volume, describe, "radial", None
    if dimension not in (None, 2):
        raise ValueError("meshed domains are two-dimensional")
    eigs, est, volume, mesh = _fem_eigenvalues(domain, space, phi, count, refinements)
    return eigs, est, volume, mesh.domain_tag, "fem", mesh


def _matched_ball_mode(
    space: SpaceForm,
    dimension: int,
    phi: WeightFunction,
    volume: float,
    options: ShootingOptions,
) -> tuple[float, RadialSolution, float]:
    radius = match_ball_radius(space, dimension, phi, volume)
    ball_vol = weighted_annulus_volume(space, dimension, phi, 0.0, radius)
    rel = abs(ball_vol - volume) / volume
    solution = shoot_first_mode(BallSpec(radius, dimension, space), phi, options)
    return radius, solution, rel


def check_theorem_main(
    domain,
    space: SpaceForm,
    phi: WeightFunction,
    dimension: int | None = None,
    *,
    refinements: int = 2,
    options: ShootingOptions = DEFAULT_OPTIONS,
) -> InequalityReport:
    """Reciprocal-sum comparison against the volume-matched centred ball.

    ``domain`` is a :class:`DomainSpec`, a :class:`Mesh` (both meshed, plane
    domains), or a :class:`ShellSpec` (radially symmetric, any dimension,
    with ``dimension`` given explicitly).
    """
    if isinstance(domain, ShellSpec) and dimension is None:
        raise ValueError("radially symmetric domains need an explicit dimension")
    n = 2 if not isinstance(domain, ShellSpec) else int(dimension)
    eigs, est, volume, describe, method, _mesh = _solve_domain(
        domain, space, phi, dimension, n - 1, refinements, options
    )
    radius, ball_mode, vol_rel = _matched_ball_mode(space, n, phi, volume, options)

    lhs = float(np.sum(1.0 / eigs[: n - 1]))
    rhs = (n - 1) / ball_mode.mu
    gap = lhs - rhs
    budget = 3.0 * est * max(abs(lhs), abs(rhs))
    return InequalityReport(
        domain=describe,
        dimension=n,
        curvature=space.curvature,
        weight=phi.describe(),
        method=method,
        volume=volume,
        matched_radius=radius,
        volume_match_rel_err=vol_rel,
        eigenvalues=[float(v) for v in eigs],
        mu1_ball=ball_mode.mu,
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        est_rel_error=est,
        tol_budget=budget,
        passed=bool(gap >= -budget),
        mu1_domain_below_ball=bool(
            eigs[0] <= ball_mode.mu * (1.0 + 3.0 * est)
        ),
        notes=[],
    )


# ---------------------------------------------------------------------------
# sharper bound (flat space only)


def _segment_circle_params(p: np.ndarray, q: np.ndarray, radius: float) -> list[float]:
    d = q - p
    a = float(d @ d)
    if a == 0.0:
        return []
    b = 2.0 * float(p @ d)
    c = float(p @ p) - radius * radius
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return []
    root = math.sqrt(disc)
    return sorted(s for s in ((-b - root) / (2 * a), (-b + root) / (2 * a)) if 0.0 < s < 1.0)


def _clip_triangle_to_disk(pts: np.ndarray, radius: float) -> np.ndarray:
    """Triangle cut against the origin-centred disk, arcs replaced by chords."""
    out: list[np.ndarray] = []
    inside = [float(v @ v) <= radius * radius for v in pts]
    if all(inside):
        return pts
    for i in range(3):
        p, q = pts[i], pts[(i + 1) % 3]
        if inside[i]:
            out.append(p)
        crossings = _segment_circle_params(p, q, radius)
        for s in crossings:
            out.append(p + s * (q - p))
    return np.asarray(out) if len(out) >= 3 else np.empty((0, 2))


def _polygon_weighted_integral(poly: np.ndarray, phi: WeightFunction) -> float:
    """Integral of exp(-phi(|x|)) over a convex polygon, fanned from vertex 0."""
    total = 0.0
    for i in range(1, len(poly) - 1):
        tri = np.stack([poly[0], poly[i], poly[i + 1]])
        d1, d2 = tri[1] - tri[0], tri[2] - tri[0]
        area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
        if abs(area) < 1e-300:
            continue
        xq = fem.QUAD_BARY @ tri
        vals = np.exp(-phi.value(np.hypot(xq[:, 0], xq[:, 1])))
        total += area * float(fem.QUAD_WEIGHTS @ vals)
    return total


def weighted_disk_intersection(mesh: Mesh, phi: WeightFunction, radius: float):
    """Weighted areas of ``mesh ∩ B_radius`` and of the whole mesh (flat 2D).

    Triangles straddling the circle are clipped with straight chords, an
    O(h^3) replacement of the arc per cut element.  Triangles must be small
    against the disk, which every generated mesh satisfies by construction.
    """
    if np.max(mesh.edge_lengths()) >= 2.0 * radius:
        raise CheckerError(
            "triangle edges comparable to the matching radius; the chord "
            "clipping assumes a fine mesh"
        )
    inter = 0.0
    total = 0.0
    for tri in mesh.triangles:
        pts = mesh.nodes[tri]
        total += _polygon_weighted_integral(pts, phi)
        clipped = _clip_triangle_to_disk(pts, radius)
        if len(clipped) >= 3:
            inter += _polygon_weighted_integral(clipped, phi)
    return inter, total


def check_theorem_sharper(
    domain,
    space: SpaceForm,
    phi: WeightFunction,
    dimension: int | None = None,
    *,
    refinements: int = 2,
    options: ShootingOptions = DEFAULT_OPTIONS,
) -> InequalityReport:
    """Main comparison plus the annulus correction that strengthens it.

    Flat space only.  Two more radii are matched: ``r1`` captures the
    weighted volume of the part of the domain inside the matched ball, and
    ``r2`` the part outside, through ``|B_{r2} \\ B_R|``.  The correction

        [A(r1, R) - A(R, r2)] / B(0, R)

    is formed from the Rayleigh integrals of the extended first-mode profile
    of the matched ball; it is nonnegative and bounded above by the slack of
    the main inequality, both of which get verified.
    """
    if space.is_hyperbolic:
        raise CheckerError("the sharper comparison is only formulated in flat space")
    report = check_theorem_main(
        domain, space, phi, dimension, refinements=refinements, options=options
    )
    n = report.dimension
    radius = report.matched_radius

    if isinstance(domain, ShellSpec):
        if radius <= domain.inner_radius:
            inner_vol = 0.0  # matched ball sits entirely inside the cavity
        else:
            inner_vol = weighted_annulus_volume(
                space, n, phi, domain.inner_radius, min(radius, domain.outer_radius)
            )
        outer_vol = report.volume - inner_vol
    else:
        mesh = _mesh_for(domain)
        for _ in range(refinements):
            mesh = refine(mesh)
        inner_vol, total = weighted_disk_intersection(mesh, phi, radius)
        outer_vol = total - inner_vol
        if abs(total - report.volume) > 1e-6 * report.volume:
            raise CheckerError(
                "clip quadrature disagrees with the mass-matrix volume"
            )

    r1 = match_ball_radius(space, n, phi, inner_vol) if inner_vol > 0 else 0.0

    def outer_gap(r: float) -> float:
        return weighted_annulus_volume(space, n, phi, radius, r) - outer_vol

    if outer_vol <= 0:
        r2 = radius
    else:
        cap = phi.domain_cap
        if outer_gap(cap) < 0:
            raise CheckerError(
                "outside-volume matching exhausts the certified weight range"
            )
        r2 = float(brentq(outer_gap, radius, cap, xtol=1e-15, rtol=8.9e-16))

    ball_mode = shoot_first_mode(BallSpec(radius, n, space), phi, options)
    ext = extend_profile(ball_mode, domain_cap=max(r2, radius) * (1.0 + 1e-12))
    a_in, _ = ball_rayleigh_integrals(ext, r1, radius)
    a_out, _ = ball_rayleigh_integrals(ext, radius, r2)
    _, b_core = ball_rayleigh_integrals(ext, 0.0, radius)
    sharper_rhs = (a_in - a_out) / b_core

    # rearranged strengthening: mu1(ball) - (n-1)/LHS >= correction >= 0
    sharper_gap = (ball_mode.mu - (n - 1) / report.lhs) - sharper_rhs
    budget = report.tol_budget * max(ball_mode.mu, 1.0)
    nonneg_ok = bool(sharper_rhs >= -budget)
    gap_ok = bool(sharper_gap >= -budget)
    report.sharper = {
        "r1": r1,
        "r2": r2,
        "inner_volume": inner_vol,
        "outer_volume": outer_vol,
        "rhs": float(sharper_rhs),
        "gap": float(sharper_gap),
        "nonnegative_ok": nonneg_ok,
        "passed": bool(nonneg_ok and gap_ok),
    }
    return report


# ---------------------------------------------------------------------------
# open-question exploration


def check_conjectures(
    domain,
    space: SpaceForm,
    phi: WeightFunction,
    dimension: int | None = None,
    *,
    refinements: int = 2,
    options: ShootingOptions = DEFAULT_OPTIONS,
) -> InequalityReport:
    """Extend the reciprocal sum to ``n`` terms and compare with ``n/mu_1(ball)``.

    This inequality is open, so a negative margin is never called a
    refutation: the case is re-run on a twice-refined mesh (or with the
    shooting tolerances tightened tenfold) and only a persistent negative
    margin is labelled a counterexample candidate.
    """
    if isinstance(domain, ShellSpec) and dimension is None:
        raise ValueError("radially symmetric domains need an explicit dimension")
    n = 2 if not isinstance(domain, ShellSpec) else int(dimension)

    def evaluate(refs: int, opts: ShootingOptions):
        eigs, est, volume, describe, method, _ = _solve_domain(
            domain, space, phi, dimension, n, refs, opts
        )
        radius, ball_mode, vol_rel = _matched_ball_mode(space, n, phi, volume, opts)
        return eigs, est, volume, describe, method, radius, ball_mode, vol_rel

    state = evaluate(refinements, options)
    escalated = False

    def conjecture_numbers(state):
        eigs, est = state[0], state[1]
        ball_mode = state[6]
        lhs = float(np.sum(1.0 / eigs[:n]))
        rhs = n / ball_mode.mu
        budget = 3.0 * est * max(abs(lhs), abs(rhs))
        return lhs, rhs, lhs - rhs, budget

    c_lhs, c_rhs, c_gap, c_budget = conjecture_numbers(state)
    if c_gap < -c_budget:
        escalated = True
        if isinstance(domain, ShellSpec):
            state = evaluate(refinements, options.tightened(10.0))
        else:
            state = evaluate(refinements + 2, options)
        c_lhs, c_rhs, c_gap, c_budget = conjecture_numbers(state)
    verdict = (
        "conjecture-consistent" if c_gap >= -c_budget else "counterexample-candidate"
    )

    eigs, est, volume, describe, method, radius, ball_mode, vol_rel = state
    lhs = float(np.sum(1.0 / eigs[: n - 1]))
    rhs = (n - 1) / ball_mode.mu
    gap = lhs - rhs
    budget = 3.0 * est * max(abs(lhs), abs(rhs))
    report = InequalityReport(
        domain=describe,
        dimension=n,
        curvature=space.curvature,
        weight=phi.describe(),
        method=method,
        volume=volume,
        matched_radius=radius,
        volume_match_rel_err=vol_rel,
        eigenvalues=[float(v) for v in eigs],
        mu1_ball=ball_mode.mu,
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        est_rel_error=est,
        tol_budget=budget,
        passed=bool(gap >= -budget),
        mu1_domain_below_ball=bool(eigs[0] <= ball_mode.mu * (1.0 + 3.0 * est)),
        conjecture={
            "eigenvalues": [float(v) for v in eigs],
            "lhs": c_lhs,
            "rhs": c_rhs,
            "gap": c_gap,
            "tol_budget": c_budget,
            "verdict": verdict,
            "escalated": escalated,
        },
        notes=[],
    )
    if escalated:
        report.notes.append(
            "negative open-question margin re-examined at higher resolution; "
            f"final verdict {verdict}"
        )
    return report


def check_pointwise_bound(mu, xi) -> tuple[bool, float]:
    """Weighted-reciprocal comparison behind the trial-function argument.

    For ascending positive ``mu`` and a unit vector ``xi``, with weights
    ``a_i = 1 - xi_i^2`` (which sum to n-1), checks

        sum_i a_i / mu_i  <=  sum_{i<n} 1 / mu_i

    and returns ``(holds, slack)`` with slack the right side minus the left.
    """
    mu = np.asarray(mu, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if mu.ndim != 1 or xi.shape != mu.shape:
        raise ValueError("mu and xi must be vectors of equal length")
    if np.any(mu <= 0):
        raise ValueError("eigenvalues must be positive")
    if np.any(np.diff(mu) < 0):
        raise ValueError("eigenvalues must be ascending")
    if abs(float(xi @ xi) - 1.0) > 1e-9:
        raise ValueError("xi must be a unit vector")
    a = 1.0 - xi * xi
    lhs = float(np.sum(a / mu))
    rhs = float(np.sum(1.0 / mu[:-1]))
    slack = rhs - lhs
    return bool(slack >= -1e-12 * max(1.0, abs(rhs))), slack


@dataclass
class TrialCenterResult:
    center: tuple[float, float]
    residual: float
    scale: float
    iterations: int
    converged: bool
    escaped_hull: bool
    note: str


def find_trial_center(
    domain,
    phi: WeightFunction,
    ext: ExtendedProfile,
    start: tuple[float, float] | None = None,
    max_iterations: int = 100,
) -> TrialCenterResult:
    """Zero of the profile-weighted direction field over a plane domain.

    Searches for a point ``o`` inside the convex hull of the domain where

        V(o) = integral over the domain of f(|x-o|) (x-o)/|x-o| dm(x)

    vanishes, ``dm`` the weighted area element.  The weight stays radial
    about the ambient origin throughout; only the trial center moves.  A
    damped Newton iteration with finite-difference Jacobian runs until
    ``|V|`` drops below 1e-8 of the field's natural scale.  Wandering
    outside the hull is clamped and reported, not fatal.
    """
    mesh = _mesh_for(domain)
    p = mesh.nodes[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    xq = np.einsum("qi,mid->qmd", fem.QUAD_BARY, p).reshape(-1, 2)
    wq = (fem.QUAD_WEIGHTS[:, None] * area[None, :]).reshape(-1)
    density = wq * np.exp(-phi.value(np.hypot(xq[:, 0], xq[:, 1])))

    hull = ConvexHull(mesh.nodes)
    eqs = hull.equations

    def inside_hull(o: np.ndarray) -> bool:
        return bool(np.all(eqs[:, :2] @ o + eqs[:, 2] <= 1e-10))

    def clamp_to_hull(frm: np.ndarray, to: np.ndarray) -> np.ndarray:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if inside_hull(frm + mid * (to - frm)):
                lo = mid
            else:
                hi = mid
        return frm + lo * (to - frm)

    def field(o: np.ndarray) -> tuple[np.ndarray, float]:
        rel = xq - o
        r = np.hypot(rel[:, 0], rel[:, 1])
        r = np.maximum(r, 1e-300)
        fr = ext.f(np.minimum(r, ext.domain_cap))
        coeff = density * fr / r
        v = np.array([coeff @ rel[:, 0], coeff @ rel[:, 1]])
        scale = float(np.abs(density) @ np.abs(fr))
        return v, scale

    o = np.asarray(start if start is not None else mesh.nodes.mean(axis=0), dtype=float)
    if not inside_hull(o):
        o = mesh.nodes.mean(axis=0)
    escaped = False
    diam = float(np.max(mesh.nodes.max(axis=0) - mesh.nodes.min(axis=0)))
    step_h = 1e-6 * diam

    v, scale = field(o)
    for iteration in range(1, max_iterations + 1):
        if np.linalg.norm(v) <= CENTER_RESIDUAL_TOL * scale:
            return TrialCenterResult(
                center=(float(o[0]), float(o[1])),
                residual=float(np.linalg.norm(v) / scale),
                scale=scale,
                iterations=iteration - 1,
                converged=True,
                escaped_hull=escaped,
                note="weight held radial about the ambient origin",
            )
        jac = np.empty((2, 2))
        for k in range(2):
            dv = np.zeros(2)
            dv[k] = step_h
            vp, _ = field(o + dv)
            vm, _ = field(o - dv)
            jac[:, k] = (vp - vm) / (2.0 * step_h)
        try:
            full_step = np.linalg.solve(jac, -v)
        except np.linalg.LinAlgError:
            full_step = -v * diam / max(scale, 1e-300)
        damping = 1.0
        for _ in range(30):
            cand = o + damping * full_step
            if not inside_hull(cand):
                escaped = True
                cand = clamp_to_hull(o, cand)
            v_new, scale_new = field(cand)
            if np.linalg.norm(v_new) < np.linalg.norm(v):
                o, v, scale = cand, v_new, scale_new
                break
            damping *= 0.5
        else:
            break
    return TrialCenterResult(
        center=(float(o[0]), float(o[1])),
        residual=float(np.linalg.norm(v) / scale),
        scale=scale,
        iterations=max_iterations,
        converged=False,
        escaped_hull=escaped,
        note="weight held radial about the ambient origin",
    )
