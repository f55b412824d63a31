"""Shooting solver for the radial Neumann modes of the weighted Laplacian.

Separation of variables on a centred ball or shell reduces the eigenproblem
to a one-dimensional equation per spherical-harmonic degree ``l``:

    T'' + ((n-1) C(t)/S(t) - phi'(t)) T' + (mu - l(l+n-2)/S(t)^2) T = 0,

with a regular singular point at ``t = 0`` (indicial roots ``l`` and
``-(l+n-2)``) and Neumann data ``T'=0`` at the outer radius, plus ``T'=0`` at
the inner radius for shells.  The solver starts on the regular branch with a
three-term series, integrates outward with a high-order adaptive
Runge-Kutta scheme, brackets eigenvalues by sign changes of ``T'(R)`` in
``mu``, and polishes each root with Brent's method.  The wiggle count of the
converged profile is cross-checked against oscillation theory so a missed
bracket cannot silently shift ``which``.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .spaceform import BallSpec, SpaceForm, s_kappa, unit_sphere_area
from .weights import UncertifiedWeightError, WeightFunction


class BracketError(RuntimeError):
    """The eigenvalue scan window contained too few sign changes."""


class ShootingError(RuntimeError):
    """The shooting iteration failed to meet its residual contract."""


@dataclass(frozen=True)
class ShootingOptions:
    """Integrator and root-finder knobs; the defaults meet the stated contracts."""

    rtol: float = 1e-10
    atol: float = 1e-12
    origin_fraction: float = 1e-6  # series handoff point, as a fraction of R
    method: str = "DOP853"
    profile_samples: int = 2048
    residual_tol: float = 1e-10
    mu_cap: float | None = None
    scan_rtol: float = 1e-6  # loose tolerance for the bracketing sweep
    scan_atol: float = 1e-9

    def tightened(self, factor: float = 10.0) -> "ShootingOptions":
        """Stricter copy used by the counterexample protocol."""
        return replace(
            self,
            rtol=self.rtol / factor,
            atol=self.atol / factor,
            residual_tol=self.residual_tol / factor,
            origin_fraction=self.origin_fraction / 2.0,
        )


DEFAULT_OPTIONS = ShootingOptions()


@dataclass(frozen=True)
class ShellSpec:
    """Centred radial domain: a ball when ``inner_radius == 0``, else a shell."""

    inner_radius: float
    outer_radius: float

    def __post_init__(self):
        if not (0.0 <= self.inner_radius < self.outer_radius):
            raise ValueError("need 0 <= inner_radius < outer_radius")
        if not np.isfinite(self.outer_radius):
            raise ValueError("outer_radius must be finite")


@dataclass
class RadialSolution:
    """Converged radial eigenfunction sample with C1 interpolants.

    ``ts`` holds Chebyshev-Lobatto abscissae from the series handoff point to
    the outer radius; ``values`` and ``derivs`` are the profile and its
    derivative there, normalized to ``max |T| = 1``.
    """

    mu: float
    mode_degree: int
    mode_index: int
    inner_radius: float
    ball: BallSpec
    phi: WeightFunction
    ts: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    residual: float
    interior_zeros: int
    first_mode_monotone: bool
    notes: list[str] = field(default_factory=list)
    _spline: CubicHermiteSpline | None = field(default=None, repr=False)
    _spline_d: CubicHermiteSpline | None = field(default=None, repr=False)

    def __post_init__(self):
        self._spline = CubicHermiteSpline(self.ts, self.values, self.derivs)
        # second derivatives from the ODE give a C1 interpolant for T' too
        second = _ode_second_derivative(
            self.ts, self.values, self.derivs, self.mu, self.mode_degree,
            self.ball.dimension, self.ball.space, self.phi,
        )
        self._spline_d = CubicHermiteSpline(self.ts, self.derivs, second)

    def T(self, t):
        return self._spline(t)

    def Tprime(self, t):
        return self._spline_d(t)


@dataclass
class ExtendedProfile:
    """First-mode profile extended past the ball radius by its boundary value.

    ``f(t) = T(t)`` for ``t <= R`` and ``f(t) = T(R)`` beyond; ``fprime``
    follows suit with 0 beyond the radius.  ``f`` and ``fprime`` accept
    scalars or arrays on ``[0, domain_cap]``.
    """

    radius: float
    space: SpaceForm
    domain_cap: float
    plateau: float
    f: Callable
    fprime: Callable
    base: RadialSolution | None = None


@dataclass(frozen=True)
class ModeEigenvalue:
    """One radial eigenvalue with its spherical-harmonic bookkeeping."""

    mu: float
    degree: int
    index: int
    multiplicity: int


@dataclass
class MonotonicityReport:
    """Outcome of the extended-profile monotonicity check."""

    passed: bool
    tol: float
    grid_points: int
    worst_increase: float
    worst_interval: tuple[float, float]
    min_fprime: float
    min_fprime_t: float


def _curvature_series_constants(space: SpaceForm) -> tuple[float, float]:
    # C/S = 1/t + e2*t + O(t^3); 1/S^2 = 1/t^2 + s0 + O(t^2)
    if space.is_hyperbolic:
        return 1.0 / 3.0, -1.0 / 3.0
    return 0.0, 0.0


def _series_coefficients(
    l: int, n: int, space: SpaceForm, phi: WeightFunction, mu: float
) -> tuple[float, float]:
    """Coefficients of T(t) = t^l (1 + b1 t + b2 t^2 + ...) near the origin."""
    e2, s0 = _curvature_series_constants(space)
    p0 = float(phi.slope(0.0))
    p1 = float(phi.convexity(0.0))
    nu = l * (l + n - 2)
    b1 = p0 * l / (n - 1 + 2 * l)
    b2 = (
        p0 * p0 * l * (l + 1) / (n - 1 + 2 * l)
        + l * (p1 - (n - 1) * e2)
        - mu
        + nu * s0
    ) / (4 * l + 2 * n)
    return b1, b2


def _ode_second_derivative(t, T, Tp, mu, l, n, space, phi):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s_kappa(t, space), dtype=float)
    c = np.cosh(t) if space.is_hyperbolic else np.ones_like(t)
    nu = l * (l + n - 2)
    drift = (n - 1) * c / s - np.asarray(phi.slope(t), dtype=float)
    return -(drift * Tp + (mu - nu / s ** 2) * T)


def _integrate_mode(
    mu: float,
    l: int,
    n: int,
    space: SpaceForm,
    phi: WeightFunction,
    start: float,
    stop: float,
    y0: tuple[float, float],
    rtol: float,
    atol: float,
    method: str,
    t_eval=None,
):
    nu = l * (l + n - 2)
    hyper = space.is_hyperbolic
    slope = phi._slope  # range-checked once by the caller, hot path skips it

    def rhs(t, y):
        if hyper:
            s = math.sinh(t)
            c = math.cosh(t)
        else:
            s = t
            c = 1.0
        drift = (n - 1) * c / s - float(slope(np.float64(t)))
        return (y[1], -(drift * y[1] + (mu - nu / (s * s)) * y[0]))

    sol = solve_ivp(
        rhs,
        (start, stop),
        y0,
        method=method,
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise ShootingError(f"radial integration failed at mu={mu:.6g}: {sol.message}")
    return sol


def _start_state(
    l: int, n: int, space: SpaceForm, phi: WeightFunction,
    mu: float, inner_radius: float, outer_radius: float, origin_fraction: float,
) -> tuple[float, tuple[float, float]]:
    """Initial abscissa and state; series-based at the origin, Neumann at a shell."""
    if inner_radius > 0.0:
        return inner_radius, (1.0, 0.0)
    a = origin_fraction * outer_radius
    b1, b2 = _series_coefficients(l, n, space, phi, mu)
    u = 1.0 + b1 * a + b2 * a * a
    du = b1 + 2.0 * b2 * a
    # profile scaled by a^{-l}: value u(a), derivative l*u/a + u'
    return a, (u, l * u / a + du)


def _default_mu_cap(
    l: int, which: int, n: int, space: SpaceForm, phi: WeightFunction,
    inner_radius: float, outer_radius: float,
) -> float:
    """Safe scan ceiling: 4x a first-eigenvalue estimate, drift-corrected."""
    length = outer_radius - inner_radius
    v = n / 2.0 - 1.0 + l
    root_est = v + 2.0 * (1.0 + v) ** (1.0 / 3.0) + which * math.pi
    est = (root_est / length) ** 2
    if inner_radius > 0.0:
        nu = l * (l + n - 2)
        est += nu / float(s_kappa(inner_radius, space)) ** 2
    drift = phi.max_abs_slope(upto=outer_radius)
    return 4.0 * est * (1.0 + drift * outer_radius)


def _count_interior_zeros(values: np.ndarray) -> int:
    scale = np.max(np.abs(values))
    live = values[np.abs(values) > 1e-9 * scale]
    if live.size < 2:
        return 0
    return int(np.sum(np.signbit(live[:-1]) != np.signbit(live[1:])))


def shoot_general_mode(
    l: int,
    inner_radius: float,
    outer_radius: float,
    dimension: int,
    space: SpaceForm,
    phi: WeightFunction,
    which: int = 1,
    options: ShootingOptions = DEFAULT_OPTIONS,
) -> RadialSolution:
    """Solve for the ``which``-th positive eigenvalue of the degree-``l`` mode.

    ``which`` counts sign changes of the endpoint derivative in ``mu``; for
    ``l = 0`` the constant zero mode is excluded by construction.  Raises
    :class:`BracketError` when the scan window (``options.mu_cap`` or its
    default) holds fewer than ``which`` eigenvalues, and
    :class:`ShootingError` when the endpoint residual cannot be met.
    """
    if l < 0 or which < 1:
        raise ValueError("need mode degree l >= 0 and which >= 1")
    if dimension < 2:
        raise ValueError("dimension must be >= 2")
    if not (0.0 <= inner_radius < outer_radius):
        raise ValueError("need 0 <= inner_radius < outer_radius")
    if not phi.certified:
        raise UncertifiedWeightError("shooting requires a certified weight")
    if outer_radius > phi.domain_cap * (1.0 + 1e-12):
        raise ValueError(
            f"outer radius {outer_radius:.6g} exceeds the weight cap "
            f"{phi.domain_cap:.6g}"
        )

    n = dimension
    cap = options.mu_cap
    if cap is None:
        cap = _default_mu_cap(l, which, n, space, phi, inner_radius, outer_radius)
    length = outer_radius - inner_radius
    step = min(0.45 * (math.pi / length) ** 2, cap / 64.0)

    def endpoint_slope(mu: float, rtol: float, atol: float) -> float:
        start, y0 = _start_state(
            l, n, space, phi, mu, inner_radius, outer_radius, options.origin_fraction
        )
        sol = _integrate_mode(
            mu, l, n, space, phi, start, outer_radius, y0,
            rtol, atol, options.method,
        )
        return float(sol.y[1, -1])

    def g_loose(mu: float) -> float:
        return endpoint_slope(mu, options.scan_rtol, options.scan_atol)

    def g_tight(mu: float) -> float:
        return endpoint_slope(mu, options.rtol, options.atol)

    def scan_for_bracket(scan_step: float) -> tuple[float, float]:
        mu_lo = scan_step * 1e-6
        seen = 0
        prev_mu, prev_g = mu_lo, g_loose(mu_lo)
        mu = mu_lo
        while mu < cap:
            mu = min(mu + scan_step, cap)
            g = g_loose(mu)
            if prev_g == 0.0 or prev_g * g < 0.0:
                seen += 1
                if seen == which:
                    return prev_mu, mu
            prev_mu, prev_g = mu, g
        raise BracketError(
            f"found {seen} sign changes below mu_cap={cap:.6g} for mode l={l}, "
            f"needed {which}; widen mu_cap explicitly if the window is mis-set"
        )

    def converge(scan_step: float) -> tuple[float, float]:
        lo, hi = scan_for_bracket(scan_step)
        glo, ghi = g_tight(lo), g_tight(hi)
        # the loose sweep may misplace a bracket end by a hair; nudge locally
        tries = 0
        while glo * ghi > 0.0 and tries < 3:
            lo = max(lo - 0.25 * scan_step, scan_step * 1e-7)
            hi = hi + 0.25 * scan_step
            glo, ghi = g_tight(lo), g_tight(hi)
            tries += 1
        if glo * ghi > 0.0:
            raise BracketError(
                f"bracket [{lo:.6g}, {hi:.6g}] lost its sign change at tight "
                f"tolerance for mode l={l}, which={which}"
            )
        mu_hat = brentq(g_tight, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
        return float(mu_hat), scan_step

    mu_hat, used_step = converge(step)

    # final profile on Chebyshev-Lobatto nodes, tight tolerances
    def final_profile(mu: float, rtol: float, atol: float):
        start, y0 = _start_state(
            l, n, space, phi, mu, inner_radius, outer_radius, options.origin_fraction
        )
        m = options.profile_samples
        j = np.arange(m)
        nodes = 0.5 * (start + outer_radius) - 0.5 * (outer_radius - start) * np.cos(
            math.pi * j / (m - 1)
        )[::-1]
        nodes = np.sort(nodes)
        nodes[0], nodes[-1] = start, outer_radius
        sol = _integrate_mode(
            mu, l, n, space, phi, start, outer_radius, y0,
            rtol, atol, options.method, t_eval=nodes,
        )
        return nodes, sol.y[0], sol.y[1]

    rtol, atol = options.rtol, options.atol
    notes: list[str] = []
    for attempt in range(3):
        ts, vals, ders = final_profile(mu_hat, rtol, atol)
        scale = float(np.max(np.abs(vals)))
        residual = abs(ders[-1]) / max(float(np.max(np.abs(ders))), 1e-300)
        if residual <= options.residual_tol:
            break
        # residual dominated by integration noise: tighten and re-polish
        rtol, atol = rtol / 100.0, atol / 100.0
        lo = mu_hat - 1e3 * max(abs(mu_hat), 1.0) * 1e-14
        hi = mu_hat + 1e3 * max(abs(mu_hat), 1.0) * 1e-14
        ga = endpoint_slope(lo, rtol, atol)
        gb = endpoint_slope(hi, rtol, atol)
        if ga * gb < 0.0:
            mu_hat = float(
                brentq(
                    lambda m_: endpoint_slope(m_, rtol, atol),
                    lo, hi, xtol=1e-15, rtol=8.9e-16,
                )
            )
        notes.append(f"residual retry {attempt + 1} at rtol={rtol:.1e}")
    else:
        raise ShootingError(
            f"endpoint residual {residual:.3g} above {options.residual_tol:.3g} "
            f"after retries (l={l}, which={which})"
        )

    vals = vals / scale
    ders = ders / scale

    zeros = _count_interior_zeros(vals[:-1])
    expected = which - 1 + (1 if l == 0 else 0)
    if zeros != expected:
        # a sign change was likely skipped by the sweep; one finer retry
        mu_hat, _ = converge(used_step / 4.0)
        ts, vals, ders = final_profile(mu_hat, rtol, atol)
        scale = float(np.max(np.abs(vals)))
        vals, ders = vals / scale, ders / scale
        residual = abs(ders[-1]) / max(float(np.max(np.abs(ders))), 1e-300)
        zeros = _count_interior_zeros(vals[:-1])
        if zeros != expected:
            raise ShootingError(
                f"profile has {zeros} interior zeros, oscillation theory "
                f"demands {expected} (l={l}, which={which}); scan step too coarse"
            )
        notes.append("bracket sweep retried at quarter step")

    monotone = True
    if l == 1 and which == 1 and inner_radius == 0.0:
        sign = 1.0 if vals[-1] > 0 else -1.0
        vals, ders = vals * sign, ders * sign
        interior = ders[:-1]
        monotone = bool(np.all(interior > 0.0))
        if not monotone:
            warnings.warn(
                "first-mode radial derivative changes sign inside the ball; "
                "result downgraded, treat downstream comparisons with care",
                RuntimeWarning,
                stacklevel=2,
            )
            notes.append("first-mode derivative not strictly positive")

    return RadialSolution(
        mu=mu_hat,
        mode_degree=l,
        mode_index=which,
        inner_radius=inner_radius,
        ball=BallSpec(outer_radius, dimension, space),
        phi=phi,
        ts=ts,
        values=vals,
        derivs=ders,
        residual=residual,
        interior_zeros=zeros,
        first_mode_monotone=monotone,
        notes=notes,
    )


def shoot_first_mode(
    ball: BallSpec, phi: WeightFunction, options: ShootingOptions = DEFAULT_OPTIONS
) -> RadialSolution:
    """Lowest nonzero Neumann eigenvalue of the centred ball.

    This is the degree-1 mode with one radial sign structure: ``T(0) = 0``,
    ``T' > 0`` inside and ``T'(R) = 0``.  Its eigenvalue carries multiplicity
    ``n`` in the full spectrum of the ball.
    """
    return shoot_general_mode(
        1, 0.0, ball.radius, ball.dimension, ball.space, phi, which=1, options=options
    )


def extend_profile(solution: RadialSolution, domain_cap: float) -> ExtendedProfile:
    """Extend a radial profile past its ball by the constant boundary value."""
    R = solution.ball.radius
    if domain_cap < R:
        raise ValueError("domain_cap must be at least the ball radius")
    plateau = float(solution.T(R))

    def f(t):
        arr = np.asarray(t, dtype=float)
        out = np.where(arr <= R, solution.T(np.minimum(arr, R)), plateau)
        return out if out.ndim else float(out)

    def fprime(t):
        arr = np.asarray(t, dtype=float)
        out = np.where(arr <= R, solution.Tprime(np.minimum(arr, R)), 0.0)
        return out if out.ndim else float(out)

    return ExtendedProfile(
        radius=R,
        space=solution.ball.space,
        domain_cap=float(domain_cap),
        plateau=plateau,
        f=f,
        fprime=fprime,
        base=solution,
    )


def check_lemma_monotone(ext: ExtendedProfile, grid_points: int = 2000) -> MonotonicityReport:
    """Verify the two structural facts the comparison argument rests on.

    The ratio ``f(t)/S(t)`` must be non-increasing on ``(0, domain_cap]`` and
    ``fprime`` must be nonnegative on ``[0, R]``, both within
    ``tol = 1e-8 * max |f|`` on a grid of ``grid_points`` samples.  Failures
    report the worst violating interval.
    """
    if grid_points < 100:
        raise ValueError("grid_points must be >= 100")
    ts = np.linspace(ext.domain_cap / grid_points, ext.domain_cap, grid_points)
    fvals = np.asarray(ext.f(ts), dtype=float)
    tol = 1e-8 * float(np.max(np.abs(fvals)))

    ratio = fvals / np.asarray(s_kappa(ts, ext.space), dtype=float)
    increments = np.diff(ratio)
    worst_idx = int(np.argmax(increments))
    worst = float(increments[worst_idx])

    inside = np.linspace(0.0, ext.radius, grid_points)
    fp = np.asarray(ext.fprime(inside), dtype=float)
    fp_idx = int(np.argmin(fp))

    passed = bool(worst <= tol and fp[fp_idx] >= -tol)
    return MonotonicityReport(
        passed=passed,
        tol=tol,
        grid_points=grid_points,
        worst_increase=worst,
        worst_interval=(float(ts[worst_idx]), float(ts[worst_idx + 1])),
        min_fprime=float(fp[fp_idx]),
        min_fprime_t=float(inside[fp_idx]),
    )


def ball_rayleigh_integrals(
    ext: ExtendedProfile,
    lower: float,
    upper: float,
    rel_tol: float = 1e-10,
) -> tuple[float, float]:
    """Directional energy and mass integrals of the extended profile.

    Returns the pair

        A = sigma_{n-1}/n * int_lower^upper (f'^2 + (n-1) f^2/S^2) S^{n-1} e^{-phi} dt
        B = sigma_{n-1}/n * int_lower^upper f^2 S^{n-1} e^{-phi} dt,

    the weighted Dirichlet energy and mass of one Cartesian component
    ``f(t) x_i / t`` summed over a sphere's worth of directions.  On
    ``[0, R]`` the quotient ``A/B`` reproduces the ball eigenvalue.
    """
    if ext.base is None:
        raise ValueError("integrals need a solver-backed profile (ext.base is None)")
    if not (0.0 <= lower <= upper):
        raise ValueError("need 0 <= lower <= upper")
    if upper > ext.domain_cap * (1.0 + 1e-12):
        raise ValueError("upper limit exceeds the profile's domain_cap")
    ball = ext.base.ball
    n = ball.dimension
    space = ball.space
    phi = ext.base.phi
    sigma = unit_sphere_area(n)

    if upper == lower:
        return 0.0, 0.0

    def energy_density(t: float) -> float:
        s = float(s_kappa(t, space))
        fp = float(ext.fprime(t))
        fv = float(ext.f(t))
        w = math.exp(-float(phi.value(t)))
        return (fp * fp + (n - 1) * fv * fv / (s * s)) * s ** (n - 1) * w

    def mass_density(t: float) -> float:
        s = float(s_kappa(t, space))
        fv = float(ext.f(t))
        w = math.exp(-float(phi.value(t)))
        return fv * fv * s ** (n - 1) * w

    interior = [ext.radius] if lower < ext.radius < upper else None

    def integrate(fn) -> float:
        val, err = quad(
            fn, lower, upper, epsabs=1e-300, epsrel=rel_tol, limit=300, points=interior
        )
        if err > 1e4 * rel_tol * max(abs(val), 1e-300):
            raise ShootingError(
                f"profile quadrature failed to converge on [{lower:.4g}, {upper:.4g}]"
            )
        return val

    factor = sigma / n
    return factor * integrate(energy_density), factor * integrate(mass_density)


def spherical_harmonic_multiplicity(l: int, dimension: int) -> int:
    """Number of independent degree-``l`` spherical harmonics on S^{n-1}."""
    if l < 0 or dimension < 2:
        raise ValueError("need l >= 0 and dimension >= 2")
    if l == 0:
        return 1
    n = dimension
    return (2 * l + n - 2) * math.comb(l + n - 2, l) // (l + n - 2)


def symmetric_spectrum(
    shell: ShellSpec,
    dimension: int,
    space: SpaceForm,
    phi: WeightFunction,
    count: int,
    options: ShootingOptions = DEFAULT_OPTIONS,
) -> list[ModeEigenvalue]:
    """First ``count`` nonzero eigenvalues of a centred ball or shell, ascending.

    Aggregates the per-degree radial problems with spherical-harmonic
    multiplicities.  Degrees are exhausted upward until the lowest eigenvalue
    of the next degree clears the provisional cutoff, which is safe because
    the angular barrier grows monotonically with the degree.
    """
    if count < 1:
        raise ValueError("count must be >= 1")

    def solve(l: int, k: int) -> float:
        return shoot_general_mode(
            l, shell.inner_radius, shell.outer_radius, dimension, space, phi,
            which=k, options=options,
        ).mu

    # Lazy frontier over (degree, index).  The heap always holds the next
    # index of every explored degree plus the first eigenvalue of the first
    # unexplored degree; since the lowest eigenvalue grows with the degree,
    # the heap minimum bounds everything not yet computed, so pops arrive in
    # global ascending order.
    heap: list[tuple[float, int, int]] = []
    heapq.heappush(heap, (solve(0, 1), 0, 1))
    heapq.heappush(heap, (solve(1, 1), 1, 1))
    deepest = 1

    kept: list[ModeEigenvalue] = []
    total = 0
    while total < count:
        mu, l, k = heapq.heappop(heap)
        kept.append(ModeEigenvalue(mu, l, k, spherical_harmonic_multiplicity(l, dimension)))
        total += kept[-1].multiplicity
        heapq.heappush(heap, (solve(l, k + 1), l, k + 1))
        if l == deepest:
            deepest += 1
            heapq.heappush(heap, (solve(deepest, 1), deepest, 1))
    return kept


def expand_spectrum(modes: list[ModeEigenvalue], count: int) -> np.ndarray:
    """Flatten mode records into an ascending eigenvalue list with repeats."""
    values = sorted(m.mu for m in modes for _ in range(m.multiplicity))
    if len(values) < count:
        raise ValueError(f"only {len(values)} eigenvalues available, wanted {count}")
    return np.asarray(values[:count], dtype=float)
