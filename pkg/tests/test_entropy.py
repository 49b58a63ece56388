import numpy as np
import pytest

from ibsh import entropy as ent
from ibsh.grid import make_grid
from ibsh.hyperbolic import riemann_datum, solve_reference
from ibsh.regularized import RegParams, TimeControls, integrate


@pytest.fixture(scope="module")
def suite():
    return ent.standard_suite()


def test_quadratic_flux_closed_form():
    us = np.linspace(-2, 2, 81)
    err = max(abs(ent.entropy_flux(lambda s: 2 * s, u) + u**6) for u in us)
    assert err <= 1e-10


def test_zero_entropy_gives_zero_flux():
    assert ent.entropy_flux(lambda s: 0.0, 1.3) == 0.0
    assert ent.entropy_flux(lambda s: 1.0, 0.0) == 0.0


def test_non_finite_integrand_rejected():
    with pytest.raises(FloatingPointError):
        ent.entropy_flux(lambda s: np.inf, 1.0)


def test_kruzkov_limit():
    pair = ent.kruzkov_pair(0.0, 1e-3, truncate=False)
    assert pair.q_quad(1.0) == pytest.approx(-0.6, abs=1e-3)
    assert float(pair.q(1.0)) == pytest.approx(-0.6, abs=1e-3)


def test_suite_shape(suite):
    assert len(suite) == 9
    assert suite[0].name == "quadratic"


def test_flux_table_against_quadrature(suite):
    rng = np.random.default_rng(5)
    for pair in suite:
        assert float(pair.q(0.0)) == 0.0
        for u in rng.uniform(-2.5, 2.5, 6):
            assert float(pair.q(u)) == pytest.approx(pair.q_quad(u), rel=1e-11, abs=1e-10)


def test_flux_derivative_by_finite_differences(suite):
    rng = np.random.default_rng(11)
    u = rng.uniform(-2, 2, 100)
    h = 1e-5
    for pair in suite:
        fd = (pair.q(u + h) - pair.q(u - h)) / (2 * h)
        assert np.max(np.abs(fd - pair.q_prime(u))) < 1e-6


def test_convexity_inside_cutoff(suite):
    u = np.linspace(-2, 2, 20001)
    for pair in suite:
        if pair.convex:
            assert np.all(pair.eta_second(u) >= 0.0)


def test_cutoff_support():
    c, c1, c2 = ent.cutoff(np.array([0.0, 1.99, 2.5, 3.0, -3.5]))
    assert c[0] == c[1] == 1.0 and c[3] == c[4] == 0.0
    assert 0.0 < c[2] < 1.0


def test_bump_derivatives():
    s = np.linspace(-0.95, 0.95, 401)
    h = 1e-6
    b, b1, b2 = ent.bump(s)
    assert np.allclose(b1, (ent.bump(s + h)[0] - ent.bump(s - h)[0]) / (2 * h), atol=1e-7)
    assert np.allclose(b2, (ent.bump(s + h)[1] - ent.bump(s - h)[1]) / (2 * h), atol=1e-5)


def _constant_run(c=0.4, n=200, nt=101):
    g = make_grid(-2, 2, n)
    times = np.linspace(0, 1, nt)
    return times, [g.field(np.full(n, c))] * nt


def test_constant_state_has_no_production(suite):
    run = _constant_run()
    phi = ent.TestFunction(0.5, 0.4, 0.0, 1.0)
    for pair in suite:
        assert abs(ent.entropy_production(run, pair, phi)) <= 1e-10
    assert abs(ent.weak_residual(run, phi)) <= 1e-12


def test_support_errors():
    run = _constant_run(nt=30)
    with pytest.raises(ent.SupportError):
        ent.entropy_production(run, ent.quadratic_pair(), ent.TestFunction(0.5, 0.4, 0.0, 1.0))
    run = _constant_run()
    with pytest.raises(ent.SupportError):
        ent.weak_residual(run, ent.TestFunction(0.5, 0.4, 1.5, 1.0))
    with pytest.raises(ent.SupportError):
        ent.weak_residual(run, ent.TestFunction(0.9, 0.4, 0.0, 1.0))


@pytest.fixture(scope="module")
def shock_run():
    g = make_grid(-2, 1, 600)
    times = np.linspace(0, 1, 101)
    return solve_reference(riemann_datum(g, 0, 1), 1.0, periodic=False, output_times=times)


def test_linearity(shock_run):
    q, k = ent.quadratic_pair(), ent.kruzkov_pair(0.25, 1e-2)
    f1, f2 = ent.TestFunction(0.5, 0.4, -0.5, 0.5), ent.TestFunction(0.5, 0.45, -0.3, 0.8)
    P = lambda pair, phi: ent.entropy_production(shock_run, pair, phi)  # noqa: E731
    combo_phi = ent.CombinedTestFunction((f1, f2), (0.7, -1.9))
    assert P(q, combo_phi) == pytest.approx(0.7 * P(q, f1) - 1.9 * P(q, f2), rel=1e-10, abs=1e-14)
    combo_pair = ent.combine_pairs((q, k), (2.0, -0.5))
    assert P(combo_pair, f1) == pytest.approx(2.0 * P(q, f1) - 0.5 * P(k, f1), rel=1e-10, abs=1e-14)


def test_godunov_shock_dissipates_entropy(shock_run):
    # the shock travels from 0 to -0.6; this bump covers its path
    phi = ent.TestFunction(0.5, 0.45, -0.35, 0.5)
    for pair in (ent.quadratic_pair(), ent.kruzkov_pair(0.5, 1e-2)):
        P = ent.entropy_production(shock_run, pair, phi)
        assert P <= 1e-3
    assert ent.entropy_production(shock_run, ent.quadratic_pair(), phi) < -1e-3


def test_reference_weak_residual_consistency():
    g = make_grid(0, 1, 400)
    u0 = g.sample(lambda x: 0.5 + 0.3 * np.sin(2 * np.pi * x))
    times = np.linspace(0, 0.2, 201)
    run = solve_reference(u0, 0.2, output_times=times)
    phi = ent.TestFunction(0.1, 0.09, 0.5, 0.3)
    dt = np.max(np.diff(times))
    assert abs(ent.weak_residual(run, phi, u0)) <= 10 * (g.dx + dt) * phi.sup_c1()


def _quadratic_production(eps):
    g = make_grid(-4, 4, 1024)
    u0 = g.sample(lambda x: np.exp(-4 * x * x))
    p = RegParams.scaled(eps, "eps_power", alpha=0.5)
    traj = integrate(u0, p, TimeControls.uniform(0.5, 100, scheme="imex"))
    return max(ent.entropy_production(traj, ent.quadratic_pair(), phi) for phi in ent.standard_phi_suite((-2.0, 2.0), 0.5))


def test_quadratic_production_vanishes_in_regime():
    # positive part comes from eps (u^2)_xx against phi_xx, so it is O(eps)
    a, b = _quadratic_production(0.05), _quadratic_production(0.025)
    assert a <= 1e-3
    assert b < a
