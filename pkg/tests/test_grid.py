import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ibsh.grid import (
    Field,
    GridMismatchError,
    NonFiniteFieldError,
    boundary_ratio,
    d1,
    d2,
    d3,
    diff1,
    diff2,
    diff3,
    make_grid,
    symbols,
)


def test_make_grid_spacing():
    assert make_grid(0, 1, 16).dx == 0.0625
    assert make_grid(-2, 1, 3000).dx == pytest.approx(0.001, rel=1e-14)


@pytest.mark.parametrize("args", [(0, 1, 4), (0, 1, 15), (1, 0, 32), (0, np.inf, 32), (np.nan, 1, 32)])
def test_make_grid_rejects(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_cell_centres():
    g = make_grid(-1.0, 1.0, 20)
    assert g.x[0] == pytest.approx(-1.0 + 0.5 * g.dx)
    assert np.allclose(np.diff(g.x), g.dx)


def test_field_is_immutable_and_finite():
    g = make_grid(0, 1, 16)
    f = g.field(np.ones(16))
    with pytest.raises(ValueError):
        f.values[0] = 2.0
    with pytest.raises(AttributeError):
        f.values = np.zeros(16)
    bad = np.ones(16)
    bad[3] = np.nan
    with pytest.raises(NonFiniteFieldError):
        g.field(bad)


def test_fields_combine_only_on_identical_grid():
    a = make_grid(0, 1, 16).field(np.ones(16))
    b = make_grid(0, 2, 16).field(np.ones(16))
    with pytest.raises(GridMismatchError):
        a + b
    assert np.all((a + a).values == 2.0)


def test_constants_annihilated():
    g = make_grid(0, 1, 64)
    f = g.field(np.full(64, 3.7))
    for op in (diff1, diff2, diff3):
        assert np.max(np.abs(op(f).values)) < 1e-9


def _errors(n, op, exact):
    g = make_grid(0, 1, n)
    f = g.sample(lambda x: np.sin(2 * np.pi * x))
    return np.max(np.abs(op(f).values - exact(g.x)))


@pytest.mark.parametrize(
    "op, exact",
    [
        (diff1, lambda x: 2 * np.pi * np.cos(2 * np.pi * x)),
        (diff2, lambda x: -((2 * np.pi) ** 2) * np.sin(2 * np.pi * x)),
        (diff3, lambda x: -((2 * np.pi) ** 3) * np.cos(2 * np.pi * x)),
    ],
)
def test_second_order_convergence(op, exact):
    ns = np.array([128, 256, 512])
    errs = np.array([_errors(n, op, exact) for n in ns])
    slope = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert 1.9 <= slope <= 2.1
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_d3_is_d1_of_d2():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(50)
    assert np.allclose(d3(v, 0.1), d1(d2(v, 0.1), 0.1), atol=1e-9)


def _smooth(rng, x, modes=4):
    a, b = rng.standard_normal((2, modes))
    k = np.arange(1, modes + 1)
    return a @ np.sin(np.outer(k, x)) + b @ np.cos(np.outer(k, x))


@settings(max_examples=30, deadline=None)
@given(st.integers(16, 400), st.integers(0, 2**32 - 1))
def test_adjointness(n, seed):
    rng = np.random.default_rng(seed)
    g = make_grid(0.0, 2 * np.pi, n)
    f, h = _smooth(rng, g.x), _smooth(rng, g.x)
    dx = g.dx
    nf, nh = np.sqrt(f @ f * dx), np.sqrt(h @ h * dx)
    ip = lambda a, b: float(a @ b) * dx  # noqa: E731
    assert abs(ip(d1(f, dx), h) + ip(f, d1(h, dx))) <= 1e-10 * nf * nh
    assert abs(ip(d2(f, dx), h) - ip(f, d2(h, dx))) <= 1e-10 * nf * nh
    assert abs(ip(d3(f, dx), h) + ip(f, d3(h, dx))) <= 1e-10 * nf * nh


def test_symbols_match_stencils():
    n, dx = 64, 0.3
    v = np.random.default_rng(2).standard_normal(n)
    s1, s2, s3 = symbols(n, dx)
    vh = np.fft.rfft(v)
    for s, op in ((s1, d1), (s2, d2), (s3, d3)):
        assert np.allclose(np.fft.irfft(s * vh, n=n), op(v, dx), atol=1e-10)


def test_norms_and_shift():
    g = make_grid(0, 2 * np.pi, 256)
    f = g.sample(np.sin)
    assert f.norm(2) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert f.integral() == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(f.shifted(3).values, np.roll(f.values, 3))


def test_boundary_ratio():
    v = np.zeros(100)
    v[50] = 1.0
    assert boundary_ratio(v) == 0.0
    v[0] = 1e-3
    assert boundary_ratio(v) == pytest.approx(1e-3)
