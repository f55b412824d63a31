"""Shooting solver checks against series and finite-volume oracles.

Frozen reference values below were produced by the oracles in
``tests/oracles.py`` (power-series bisection for flat-ball modes, dense
finite-volume eigensolver for everything else); the oracle calls are kept in
the assertions so the pinned constants stay justified.
"""

import math
import warnings

import numpy as np
import pytest

import oracles
from wittenlab import BallSpec, SpaceForm, make_weight, property_I_certify
from wittenlab.radial import (
    BracketError,
    ExtendedProfile,
    ModeEigenvalue,
    ShellSpec,
    ShootingOptions,
    ball_rayleigh_integrals,
    check_lemma_monotone,
    expand_spectrum,
    extend_profile,
    shoot_first_mode,
    shoot_general_mode,
    spherical_harmonic_multiplicity,
    symmetric_spectrum,
)

FLAT = SpaceForm(0)
HYP = SpaceForm(-1)

# oracle-pinned constants (flat unit ball, first mode): squares of the first
# positive Neumann abscissae
MU1_DISK = 3.389957716671889          # n=2: 1.8411837813406593**2
MU1_BALL3 = 4.33295855142938          # n=3: 2.0815759778181**2
MU1_BALL4 = 5.289587527091361         # n=4
MU_DISK_L0 = 14.681970642123892       # n=2, l=0: 3.831705970207512**2
MU_DISK_L2 = 9.32836321374636         # n=2, l=2


def certified(family, params, cap):
    phi = make_weight(family, params, cap)
    assert property_I_certify(phi).passed
    return phi


@pytest.fixture(scope="module")
def phi_zero():
    return certified("constant", [0.0], 12.0)


@pytest.fixture(scope="module")
def disk_solution(phi_zero):
    return shoot_first_mode(BallSpec(1.0, 2, FLAT), phi_zero)


def test_first_mode_matches_series_oracle(phi_zero, disk_solution):
    assert oracles.flat_ball_mode_eigenvalue(2, 1) == pytest.approx(MU1_DISK, rel=1e-13)
    assert disk_solution.mu == pytest.approx(MU1_DISK, rel=1e-6)
    # far tighter in practice; the contract line is the 1e-6 above
    assert disk_solution.mu == pytest.approx(MU1_DISK, rel=1e-9)
    assert disk_solution.residual <= 1e-10
    assert disk_solution.first_mode_monotone


def test_first_mode_dimension_three(phi_zero):
    assert oracles.flat_ball_mode_eigenvalue(3, 1) == pytest.approx(MU1_BALL3, rel=1e-13)
    sol = shoot_first_mode(BallSpec(1.0, 3, FLAT), phi_zero)
    assert sol.mu == pytest.approx(MU1_BALL3, rel=1e-9)


def test_degree_zero_and_two_modes(phi_zero):
    assert oracles.flat_ball_mode_eigenvalue(2, 0) == pytest.approx(MU_DISK_L0, rel=1e-13)
    sol0 = shoot_general_mode(0, 0.0, 1.0, 2, FLAT, phi_zero, which=1)
    assert sol0.mu == pytest.approx(MU_DISK_L0, rel=1e-9)
    sol2 = shoot_general_mode(2, 0.0, 1.0, 2, FLAT, phi_zero, which=1)
    assert sol2.mu == pytest.approx(MU_DISK_L2, rel=1e-9)


def test_higher_indices_strictly_increasing_and_match_oracle(phi_zero):
    mus = [
        shoot_general_mode(1, 0.0, 1.0, 2, FLAT, phi_zero, which=k).mu for k in (1, 2, 3)
    ]
    assert mus[0] < mus[1] < mus[2]
    fd = oracles.fd_mode_eigenvalues(
        2, 0, lambda t: np.zeros_like(np.asarray(t, float)), 1, 0.0, 1.0, 3
    )
    np.testing.assert_allclose(mus, fd, rtol=1e-5)


def test_weighted_flat_disk_against_fd_oracle():
    phi = certified("linear-decreasing", [0.0, 0.5], 10.0)
    sol = shoot_first_mode(BallSpec(1.0, 2, FLAT), phi)
    fd = oracles.fd_mode_eigenvalues(
        2, 0, lambda t: -0.5 * np.asarray(t, float), 1, 0.0, 1.0, 1
    )
    assert sol.mu == pytest.approx(fd[0], rel=1e-5)


def test_hyperbolic_disk_against_fd_oracle(phi_zero):
    sol = shoot_first_mode(BallSpec(1.0, 2, HYP), phi_zero)
    fd = oracles.fd_mode_eigenvalues(
        2, -1, lambda t: np.zeros_like(np.asarray(t, float)), 1, 0.0, 1.0, 1
    )
    assert sol.mu == pytest.approx(fd[0], rel=1e-5)
    # drift of the metric lowers the disk eigenvalue below its flat sibling
    assert sol.mu < MU1_DISK


def test_hyperbolic_weighted_ball_against_fd_oracle():
    phi = certified("exponential-decay", [0.0, 1.0, 1.0], 10.0)
    sol = shoot_first_mode(BallSpec(1.4, 2, HYP), phi)
    fd = oracles.fd_mode_eigenvalues(
        2, -1, lambda t: np.exp(-np.asarray(t, float)), 1, 0.0, 1.4, 1
    )
    assert sol.mu == pytest.approx(fd[0], rel=1e-5)


def test_shell_neumann_mode_against_fd_oracle(phi_zero):
    sol = shoot_general_mode(0, 0.5, 1.0, 3, FLAT, phi_zero, which=1)
    fd = oracles.fd_mode_eigenvalues(
        3, 0, lambda t: np.zeros_like(np.asarray(t, float)), 0, 0.5, 1.0, 1
    )
    assert sol.mu == pytest.approx(fd[0], rel=1e-5)


def test_scaling_law(phi_zero):
    mu1 = shoot_first_mode(BallSpec(1.0, 2, FLAT), phi_zero).mu
    mu2 = shoot_first_mode(BallSpec(2.0, 2, FLAT), phi_zero).mu
    muh = shoot_first_mode(BallSpec(0.5, 2, FLAT), phi_zero).mu
    assert mu2 == pytest.approx(mu1 / 4.0, rel=1e-8)
    assert muh == pytest.approx(4.0 * mu1, rel=1e-8)


def test_weight_shift_leaves_eigenvalue_unchanged():
    lo = certified("linear-decreasing", [0.0, 0.8], 10.0)
    hi = certified("linear-decreasing", [5.0, 0.8], 10.0)
    a = shoot_first_mode(BallSpec(1.0, 2, FLAT), lo)
    b = shoot_first_mode(BallSpec(1.0, 2, FLAT), hi)
    assert b.mu == pytest.approx(a.mu, rel=1e-10)


def test_origin_handoff_halving_stability():
    phi = certified("linear-decreasing", [0.0, 0.8], 10.0)
    base = shoot_first_mode(BallSpec(1.0, 2, FLAT), phi)
    half = shoot_first_mode(
        BallSpec(1.0, 2, FLAT), phi, ShootingOptions(origin_fraction=5e-7)
    )
    assert abs(base.mu - half.mu) / base.mu < 1e-9


def test_bracket_window_failure_is_surfaced(phi_zero):
    with pytest.raises(BracketError):
        shoot_first_mode(
            BallSpec(1.0, 2, FLAT), phi_zero, ShootingOptions(mu_cap=1.0)
        )


def test_uncertified_weight_rejected():
    from wittenlab import UncertifiedWeightError

    phi = make_weight("constant", [0.0], 10.0)
    with pytest.raises(UncertifiedWeightError):
        shoot_first_mode(BallSpec(1.0, 2, FLAT), phi)


def test_radius_beyond_weight_cap_rejected():
    phi = certified("constant", [0.0], 1.0)
    with pytest.raises(ValueError):
        shoot_first_mode(BallSpec(2.0, 2, FLAT), phi)


def test_extension_values(phi_zero, disk_solution):
    ext = extend_profile(disk_solution, 3.0)
    assert float(ext.f(0.5)) == pytest.approx(float(disk_solution.T(0.5)), rel=1e-12)
    assert float(ext.f(1.2)) == pytest.approx(float(disk_solution.T(1.0)), rel=1e-12)
    assert float(ext.fprime(1.2)) == 0.0
    assert float(ext.fprime(0.7)) == pytest.approx(
        float(disk_solution.Tprime(0.7)), rel=1e-10
    )
    with pytest.raises(ValueError):
        extend_profile(disk_solution, 0.5)


def test_rayleigh_quotient_identity(phi_zero, disk_solution):
    ext = extend_profile(disk_solution, 3.0)
    A, B = ball_rayleigh_integrals(ext, 0.0, 1.0)
    assert A / B == pytest.approx(disk_solution.mu, rel=1e-8)


def test_rayleigh_outside_closed_form(phi_zero, disk_solution):
    # beyond the ball f is constant, so for n=2 and no weight
    # A([R, 2R]) = pi f(R)^2 ln 2 and B = (pi/2) f(R)^2 * (4R^2 - R^2)/... via t dt
    ext = extend_profile(disk_solution, 3.0)
    A, B = ball_rayleigh_integrals(ext, 1.0, 2.0)
    assert A == pytest.approx(math.pi * ext.plateau ** 2 * math.log(2.0), rel=1e-10)
    assert B == pytest.approx(math.pi * ext.plateau ** 2 * 1.5, rel=1e-10)


def test_rayleigh_degenerate_interval(phi_zero, disk_solution):
    ext = extend_profile(disk_solution, 3.0)
    assert ball_rayleigh_integrals(ext, 0.7, 0.7) == (0.0, 0.0)


def test_rayleigh_identity_weighted_hyperbolic():
    phi = certified("exponential-decay", [0.1, 0.8, 1.2], 8.0)
    sol = shoot_first_mode(BallSpec(1.2, 3, HYP), phi)
    ext = extend_profile(sol, 4.0)
    A, B = ball_rayleigh_integrals(ext, 0.0, 1.2)
    assert A / B == pytest.approx(sol.mu, rel=1e-8)


def test_monotonicity_check_passes_on_real_profiles():
    cases = [
        (FLAT, 2, certified("constant", [0.0], 12.0)),
        (FLAT, 3, certified("linear-decreasing", [0.0, 0.6], 12.0)),
        (HYP, 2, certified("exponential-decay", [0.0, 1.0, 1.0], 12.0)),
    ]
    for space, n, phi in cases:
        sol = shoot_first_mode(BallSpec(1.0, n, space), phi)
        ext = extend_profile(sol, 6.0)
        report = check_lemma_monotone(ext)
        assert report.passed, (space, n, report.worst_increase, report.min_fprime)


def test_monotonicity_check_flags_synthetic_bump():
    # profile with a localized bump past the plateau: ratio f/S must rise there
    R, cap = 1.0, 4.0

    def f(t):
        arr = np.asarray(t, dtype=float)
        base = np.minimum(arr, R)
        bump = 0.2 * np.exp(-((arr - 2.0) ** 2) / 0.01)
        out = base + bump
        return out if out.ndim else float(out)

    def fprime(t):
        arr = np.asarray(t, dtype=float)
        out = np.where(arr <= R, 1.0, 0.0)
        return out if out.ndim else float(out)

    ext = ExtendedProfile(
        radius=R, space=FLAT, domain_cap=cap, plateau=1.0, f=f, fprime=fprime, base=None
    )
    report = check_lemma_monotone(ext)
    assert not report.passed
    lo, hi = report.worst_interval
    assert 1.5 < lo < hi < 2.1  # the injected bump's rising flank


def test_multiplicities():
    assert [spherical_harmonic_multiplicity(l, 2) for l in range(4)] == [1, 2, 2, 2]
    assert [spherical_harmonic_multiplicity(l, 3) for l in range(4)] == [1, 3, 5, 7]
    assert [spherical_harmonic_multiplicity(l, 4) for l in range(4)] == [1, 4, 9, 16]


def test_disk_spectrum_with_multiplicities(phi_zero):
    modes = symmetric_spectrum(ShellSpec(0.0, 1.0), 2, FLAT, phi_zero, 5)
    vals = expand_spectrum(modes, 5)
    expected = [MU1_DISK, MU1_DISK, MU_DISK_L2, MU_DISK_L2, MU_DISK_L0]
    np.testing.assert_allclose(vals, expected, rtol=1e-8)


def test_ball4_low_spectrum_is_first_mode(phi_zero):
    modes = symmetric_spectrum(ShellSpec(0.0, 1.0), 4, FLAT, phi_zero, 4)
    vals = expand_spectrum(modes, 4)
    np.testing.assert_allclose(vals, [MU1_BALL4] * 4, rtol=1e-8)


def test_shell_spectrum_against_fd_oracle():
    phi = certified("linear-decreasing", [0.0, 0.5], 10.0)
    modes = symmetric_spectrum(ShellSpec(0.4, 1.0), 3, FLAT, phi, 4)
    vals = expand_spectrum(modes, 4)
    fd_by_l = {
        l: oracles.fd_mode_eigenvalues(
            3, 0, lambda t: -0.5 * np.asarray(t, float), l, 0.4, 1.0, 2
        )
        for l in range(4)
    }
    expected = sorted(
        [v for l, fd in fd_by_l.items() for v in fd for _ in range(
            spherical_harmonic_multiplicity(l, 3))]
    )[:4]
    np.testing.assert_allclose(vals, expected, rtol=1e-5)


def test_shell_spec_validation():
    with pytest.raises(ValueError):
        ShellSpec(1.0, 0.5)
    with pytest.raises(ValueError):
        ShellSpec(-0.1, 1.0)
