import numpy as np
import pytest

from ibsh import monitors as mon
from ibsh.grid import make_grid
from ibsh.regularized import RegParams, TimeControls, Trajectory, integrate


def _const_traj(c=0.3, n=64, nt=11):
    g = make_grid(-1, 1, n)
    p = RegParams(0.1, 0.01)
    return Trajectory(np.linspace(0, 1, nt), [g.field(np.full(n, c))] * nt, p)


def _gauss(n, t=0.2, eps=0.1, beta=0.01, scheme="rk4", n_out=40):
    g = make_grid(-20, 20, n)
    p = RegParams(eps, beta)
    return integrate(g.sample(lambda x: np.exp(-x * x)), p, TimeControls.uniform(t, n_out, scheme=scheme))


def test_constant_trajectory_residuals_vanish():
    tr = _const_traj()
    assert mon.lemma21_identity_residual(tr, tr.params).max_abs == 0.0
    assert mon.lemma22_identity_residual(tr, tr.params).max_abs == 0.0


def test_too_few_samples():
    tr = _const_traj(nt=2)
    with pytest.raises(ValueError):
        mon.lemma21_identity_residual(tr, tr.params)


def test_report_entries_nonnegative_and_translation_invariant():
    tr = _gauss(256, t=0.1, n_out=5)
    rep = mon.energy_report(tr)
    for name, col in rep.as_dict().items():
        assert np.all(col >= 0), name
    for s in tr.states:
        a = mon.functionals(s.values, tr.grid.dx)
        b = mon.functionals(s.shifted(37).values, tr.grid.dx)
        for k in a:
            assert b[k] == pytest.approx(a[k], rel=1e-12, abs=1e-300)


def test_merge_orders_by_time():
    rep = mon.energy_report(_gauss(128, t=0.1, n_out=4))
    half = len(rep) // 2
    first = mon.EnergyReport(**{k: v[:half] for k, v in rep.as_dict().items()})
    second = mon.EnergyReport(**{k: v[half - 1 :] for k, v in rep.as_dict().items()})
    merged = second.merge(first)
    assert np.array_equal(merged.times, rep.times)
    assert np.array_equal(merged.l10, rep.l10)


def test_agmon_examples():
    g = make_grid(0, 2 * np.pi, 256)
    assert mon.agmon_bound_check(g.field(np.zeros(256))) == (0.0, 0.0)
    lhs, rhs = mon.agmon_bound_check(g.sample(np.sin))
    assert lhs == pytest.approx(1.0, abs=1e-3)
    assert rhs == pytest.approx(2 * np.pi, rel=1e-3)
    assert lhs <= rhs


def test_agmon_random_fields():
    rng = np.random.default_rng(4)
    g = make_grid(-1, 1, 200)
    for _ in range(200):
        v = rng.standard_normal(200) * rng.uniform(0.01, 10)
        lhs, rhs = mon.agmon_bound_check(g.field(v - v.mean()))
        assert lhs <= rhs + 1e-8


@pytest.fixture(scope="module")
def gauss_pair():
    return _gauss(512), _gauss(1024)


def test_l2_identity_converges(gauss_pair):
    a, b = (mon.lemma21_identity_residual(t, t.params) for t in gauss_pair)
    assert a.max_abs / b.max_abs > 3.5
    alt = [mon.lemma21_identity_residual(t, t.params, mon.L2_BETA_COEFF_ALT) for t in gauss_pair]
    assert alt[0].max_abs / alt[1].max_abs < 1.2


def test_higher_order_balance_converges(gauss_pair):
    a, b = (mon.lemma22_identity_residual(t, t.params) for t in gauss_pair)
    assert np.log2(a.max_abs / b.max_abs) >= 1.9
    alt = [mon.lemma22_identity_residual(t, t.params, mon.H1_BETA_COEFF_ALT) for t in gauss_pair]
    assert alt[1].relative > 10 * b.relative


def test_lemma23_single_and_mixed():
    tr = _gauss(128, t=0.1, n_out=4)
    rep = mon.energy_report(tr)
    table = mon.lemma23_trend([(tr.params, rep)])
    assert len(table.rows) == 1 and all(table.bounded.values())
    other = RegParams.scaled(0.1, "eps_squared")
    with pytest.raises(ValueError):
        mon.lemma23_trend([(tr.params, rep), (other, rep)])


def test_lemma23_flags_fixed_beta():
    runs = []
    for k in range(3, 11):
        tr = _gauss(512, t=0.5, eps=2.0**-k, beta=0.01, scheme="imex", n_out=50)
        runs.append((tr.params, mon.energy_report(tr)))
    table = mon.lemma23_trend(runs)
    assert not table.bounded["q3"]
    assert table.growth["q3"] > 100


def test_linf_scaling():
    runs = [(RegParams(0.1, b), _report_with_sup(1.0)) for b in (1e-2, 1e-3, 1e-4)]
    assert mon.linf_scaling(runs) == pytest.approx(0.0, abs=1e-12)
    scaled = [(RegParams(0.1, b), _report_with_sup(b**-0.25)) for b in (1e-2, 1e-3, 1e-4)]
    assert mon.linf_scaling(scaled) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        mon.linf_scaling(runs[:2])


def _report_with_sup(s):
    cols = {k: np.ones(3) for k in mon.EnergyReport.columns()}
    cols["times"] = np.array([0.0, 0.5, 1.0])
    cols["sup_abs"] = np.array([s, s, s])
    return mon.EnergyReport(**cols)
