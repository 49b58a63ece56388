"""Entropy-entropy flux pairs, entropy production and weak-form residuals.

For an entropy ``eta`` the flux is ``q(u) = -int_0^u 3 s^4 eta'(s) ds``, so
that ``q' = eta' F'`` with ``F(u) = -(3/5) u^5``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

TRUNC_INNER = 2.0
TRUNC_OUTER = 3.0
MIN_TIME_SAMPLES = 64

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


class SupportError(ValueError):
    pass


def entropy_flux(eta_prime: Callable[[float], float], u: float, points=None) -> float:
    """Adaptive Gauss-Kronrod evaluation of ``-int_0^u 3 s^4 eta'(s) ds``."""
    u = float(u)
    if u == 0.0:
        return 0.0

    def integrand(s):
        val = 3.0 * s**4 * eta_prime(s)
        if not np.isfinite(val):
            raise FloatingPointError(f"non-finite integrand at s={s}")
        return val

    lo, hi = sorted((0.0, u))
    pts = None
    if points is not None:
        pts = [p for p in points if lo < p < hi] or None
    val, _ = quad(integrand, 0.0, u, epsabs=1e-12, epsrel=1e-13, limit=500, points=pts)
    return -val


# ---------------------------------------------------------------- cut-off


def _smoothstep(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, with two derivatives."""
    s = np.asarray(s, dtype=float)
    inside = (s > 0.0) & (s < 1.0)
    si = np.where(inside, s, 0.5)
    a, b = 1.0 / si, 1.0 / (1.0 - si)
    g, h = np.exp(-a), np.exp(-b)
    g1, h1 = g * a**2, -h * b**2
    g2, h2 = g * (a**4 - 2.0 * a**3), h * (b**4 - 2.0 * b**3)
    d = g + h
    d1 = g1 + h1
    num1 = g1 * h - g * h1
    val = np.where(inside, g / d, (s >= 1.0).astype(float))
    der1 = np.where(inside, num1 / d**2, 0.0)
    der2 = np.where(inside, ((g2 * h - g * h2) * d - 2.0 * num1 * d1) / d**3, 0.0)
    return val, der1, der2


def cutoff(u):
    """Window equal to 1 on ``|u| <= 2`` and 0 on ``|u| >= 3``."""
    u = np.asarray(u, dtype=float)
    s = (TRUNC_OUTER - np.abs(u)) / (TRUNC_OUTER - TRUNC_INNER)
    val, d1, d2 = _smoothstep(s)
    scale = 1.0 / (TRUNC_OUTER - TRUNC_INNER)
    return val, -np.sign(u) * d1 * scale, d2 * scale**2


# ---------------------------------------------------------------- pairs


def _logcosh(z):
    az = np.abs(z)
    return az + np.log1p(np.exp(-2.0 * az)) - np.log(2.0)


@dataclass
class EntropyPair:
    """A C^2 entropy with its flux, tabulated once on construction.

    ``eta_funcs`` returns ``(eta, eta', eta'')`` for an array argument.
    """

    name: str
    eta_funcs: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    descriptor: dict = field(default_factory=dict)
    convex: bool = True
    kinks: Sequence[float] = ()
    _spline: CubicHermiteSpline | None = field(default=None, init=False, repr=False)

    def eta(self, u):
        return self.eta_funcs(np.asarray(u, dtype=float))[0]

    def eta_prime(self, u):
        return self.eta_funcs(np.asarray(u, dtype=float))[1]

    def eta_second(self, u):
        return self.eta_funcs(np.asarray(u, dtype=float))[2]

    def q_prime(self, u):
        u = np.asarray(u, dtype=float)
        return -3.0 * u**4 * self.eta_prime(u)

    def _nodes(self) -> np.ndarray:
        parts = [np.linspace(-TRUNC_OUTER, TRUNC_OUTER, 6001), [0.0]]
        width = self.descriptor.get("delta")
        for k in self.kinks:
            if width:
                parts.append(np.linspace(k - 40 * width, k + 40 * width, 4001))
        return np.unique(np.concatenate(parts))

    def _build(self) -> CubicHermiteSpline:
        x = self._nodes()
        a, b = x[:-1], x[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        s = mid[:, None] + half[:, None] * _GL_X[None, :]
        panels = (self.q_prime(s) * _GL_W[None, :]).sum(axis=1) * half
        q = np.concatenate([[0.0], np.cumsum(panels)])
        q -= q[np.searchsorted(x, 0.0)]
        return CubicHermiteSpline(x, q, self.q_prime(x))

    def q(self, u):
        """Entropy flux; constant beyond the cut-off support."""
        if self._spline is None:
            self._spline = self._build()
        u = np.clip(np.asarray(u, dtype=float), -TRUNC_OUTER, TRUNC_OUTER)
        return self._spline(u)

    def q_quad(self, u: float) -> float:
        """Direct adaptive quadrature, independent of the table."""
        return entropy_flux(lambda s: float(self.eta_prime(s)), u, points=list(self.kinks) or None)

    @classmethod
    def from_functions(cls, name, eta, eta_prime, eta_second, convex=False, truncate=False):
        """Wrap user callables as a pair (descriptor ``user_table``)."""

        def funcs(u):
            e, e1, e2 = eta(u), eta_prime(u), eta_second(u)
            if truncate:
                return _truncated(u, e, e1, e2)
            return e, e1, e2

        return cls(name, funcs, {"kind": "user_table"}, convex)


def _truncated(u, e, e1, e2):
    c, c1, c2 = cutoff(u)
    return e * c, e1 * c + e * c1, e2 * c + 2.0 * e1 * c1 + e * c2


def quadratic_pair(truncate: bool = True) -> EntropyPair:
    def funcs(u):
        e, e1, e2 = u * u, 2.0 * u, np.full_like(u, 2.0)
        return _truncated(u, e, e1, e2) if truncate else (e, e1, e2)

    return EntropyPair("quadratic", funcs, {"kind": "quadratic"})


def kruzkov_pair(k: float, delta: float, truncate: bool = True) -> EntropyPair:
    """Smoothed ``|u - k|``: ``eta = delta log cosh((u - k) / delta)``."""

    def funcs(u):
        z = (u - k) / delta
        e = delta * _logcosh(z)
        e1 = np.tanh(z)
        e2 = (1.0 - e1 * e1) / delta
        return _truncated(u, e, e1, e2) if truncate else (e, e1, e2)

    return EntropyPair(
        f"kruzkov(k={k:g},delta={delta:g})",
        funcs,
        {"kind": "smoothed_kruzkov", "k": k, "delta": delta},
        kinks=(k,),
    )


KRUZKOV_LEVELS = (-0.5, 0.0, 0.25, 0.75)
KRUZKOV_DELTAS = (1e-2, 1e-3)


def standard_suite() -> list[EntropyPair]:
    pairs = [quadratic_pair()]
    for delta in KRUZKOV_DELTAS:
        for k in KRUZKOV_LEVELS:
            pairs.append(kruzkov_pair(k, delta))
    return pairs


def combine_pairs(pairs: Sequence[EntropyPair], coeffs: Sequence[float]) -> EntropyPair:
    """Linear combination; the flux is combined from the tabulated ones."""

    def funcs(u):
        parts = [p.eta_funcs(u) for p in pairs]
        return tuple(sum(c * part[i] for c, part in zip(coeffs, parts)) for i in range(3))

    combo = EntropyPair("combination", funcs, {"kind": "combination"}, convex=False)
    combo.q = lambda u: sum(c * p.q(u) for c, p in zip(coeffs, pairs))  # type: ignore[method-assign]
    return combo


# ---------------------------------------------------------------- test functions


def bump(s):
    """``exp(1/(s^2 - 1))`` on ``|s| < 1`` and its first two derivatives."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    si = np.where(inside, s, 0.0)
    w = si * si - 1.0
    b = np.where(inside, np.exp(1.0 / w), 0.0)
    b1 = np.where(inside, b * (-2.0 * si / w**2), 0.0)
    b2 = np.where(inside, b * ((6.0 * si * si + 2.0) / w**3 + 4.0 * si * si / w**4), 0.0)
    return b, b1, b2


@dataclass(frozen=True)
class TestFunction:
    """Tensor bump ``b((t - tc)/rt) * b((x - xc)/rx)`` scaled by ``amp``."""

    __test__ = False  # keep pytest from collecting this class

    tc: float
    rt: float
    xc: float
    rx: float
    amp: float = 1.0
    name: str = ""

    @property
    def support(self) -> tuple[float, float, float, float]:
        return self.tc - self.rt, self.tc + self.rt, self.xc - self.rx, self.xc + self.rx

    def components(self, t, x):
        """``(phi, phi_t, phi_x)`` on the outer product ``t x x``."""
        bt, bt1, _ = bump((np.asarray(t) - self.tc) / self.rt)
        bx, bx1, _ = bump((np.asarray(x) - self.xc) / self.rx)
        phi = self.amp * np.outer(bt, bx)
        phi_t = self.amp * np.outer(bt1 / self.rt, bx)
        phi_x = self.amp * np.outer(bt, bx1 / self.rx)
        return phi, phi_t, phi_x

    def sup_c1(self) -> float:
        """``max(|phi|, |phi_t|, |phi_x|)``, from the 1-D bump profile."""
        s = np.linspace(-1, 1, 20001)
        b, b1, _ = bump(s)
        return abs(self.amp) * max(b.max() ** 2, b.max() * np.abs(b1).max() / min(self.rt, self.rx))


@dataclass(frozen=True)
class CombinedTestFunction:
    parts: tuple[TestFunction, ...]
    coeffs: tuple[float, ...]
    name: str = "combination"

    @property
    def support(self):
        s = np.array([p.support for p in self.parts])
        return s[:, 0].min(), s[:, 1].max(), s[:, 2].min(), s[:, 3].max()

    def components(self, t, x):
        out = None
        for c, p in zip(self.coeffs, self.parts):
            comp = [c * a for a in p.components(t, x)]
            out = comp if out is None else [o + a for o, a in zip(out, comp)]
        return tuple(out)


def standard_phi_suite(window: tuple[float, float], t_end: float) -> list[TestFunction]:
    """Four overlapping bumps spanning ``window`` over ``(0.1 T, 0.9 T)``."""
    a, b = window
    width = (b - a) / 4.0
    tc, rt = 0.5 * t_end, 0.4 * t_end
    return [
        TestFunction(tc, rt, a + (j + 0.5) * width, width, name=f"phi{j}")
        for j in range(4)
    ]


# ---------------------------------------------------------------- functionals


def _history(run):
    """Normalise a trajectory or ``(times, states)`` pair to arrays."""
    if hasattr(run, "times") and hasattr(run, "states"):
        times, states = run.times, run.states
    else:
        times, states = run
    times = np.asarray(times, dtype=float)
    grid = states[0].grid
    u = np.stack([s.values for s in states])
    return times, u, grid


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    w = np.zeros_like(times)
    dt = np.diff(times)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def _check_support(phi, times, grid, need_samples: bool, allow_initial: bool = False):
    t0, t1, xa, xb = phi.support
    tol = 1e-12
    if (t0 < times[0] - tol and not allow_initial) or t1 > times[-1] + tol:
        raise SupportError(f"test function time support [{t0}, {t1}] outside run")
    if xa < grid.x_min + 2 * grid.dx or xb > grid.x_max - 2 * grid.dx:
        raise SupportError("test function reaches the periodic wrap")
    if need_samples:
        inside = np.count_nonzero((times >= t0) & (times <= t1))
        if inside < MIN_TIME_SAMPLES:
            raise SupportError(f"only {inside} output times inside the support; need {MIN_TIME_SAMPLES}")


def entropy_production(run, pair: EntropyPair, phi) -> float:
    """``-sum sum (eta(u) phi_t + q(u) phi_x) dx dt``; entropic runs give <= 0."""
    times, u, grid = _history(run)
    _check_support(phi, times, grid, need_samples=True)
    t0, t1, xa, xb = phi.support
    ti = np.nonzero((times >= t0) & (times <= t1))[0]
    # trapezoid weights of the full record, restricted to the support
    wt = _trapezoid_weights(times)[ti]
    xi = np.nonzero((grid.x > xa) & (grid.x < xb))[0]
    x = grid.x[xi]
    _, phi_t, phi_x = phi.components(times[ti], x)
    us = u[np.ix_(ti, xi)]
    integrand = pair.eta(us) * phi_t + pair.q(us) * phi_x
    return float(-(integrand.sum(axis=1) * wt).sum() * grid.dx)


def weak_residual(run, phi, u0=None) -> float:
    """``sum sum (u phi_t - (3/5) u^5 phi_x) dx dt + sum u0 phi(0, .) dx``.

    Zero for a distributional solution of the limit law. ``u0`` defaults to
    the first recorded state.
    """
    times, u, grid = _history(run)
    _check_support(phi, times, grid, need_samples=False, allow_initial=True)
    t0, t1, xa, xb = phi.support
    ti = np.nonzero((times >= max(t0, times[0])) & (times <= t1))[0]
    wt = _trapezoid_weights(times)[ti]
    xi = np.nonzero((grid.x > xa) & (grid.x < xb))[0]
    x = grid.x[xi]
    phi0, phi_t, phi_x = phi.components(times[ti], x)
    us = u[np.ix_(ti, xi)]
    body = float(((us * phi_t - 0.6 * us**5 * phi_x).sum(axis=1) * wt).sum() * grid.dx)
    init_phi = phi.components(np.array([0.0]), x)[0][0]
    v0 = u[0] if u0 is None else np.asarray(getattr(u0, "values", u0))
    return body + float(np.dot(v0[xi], init_phi) * grid.dx)
