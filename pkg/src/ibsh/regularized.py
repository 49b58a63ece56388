"""Method-of-lines solver for the diffusive-dispersive regularization

    u_t = (3/5)(u^5)_x - beta u_xxx + 3 beta u^2 u_xx - 9 beta u (u_x)^2 + eps u_xx

on a periodic grid, with a classical RK4 integrator and an IMEX splitting
that propagates the linear part ``-beta u_xxx + eps u_xx`` exactly.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import kernels
from .grid import Field, Grid1D, boundary_ratio, d1, symbols

log = logging.getLogger(__name__)

Regime = Literal["eps_squared", "eps_power", "free"]
Scheme = Literal["rk4", "imex"]

DELTA = 1e-30
KAPPA = 2.0
DT_MAX = 1e-2
BLOWUP_SUP = 1e6
BOUNDARY_TOL = 1e-8


class BlowUpError(FloatingPointError):
    def __init__(self, t: float, reason: str):
        super().__init__(f"blow-up at t={t:.6g}: {reason}")
        self.t = t
        self.reason = reason


@dataclass(frozen=True)
class RegParams:
    """Diffusion ``eps``, dispersion ``beta`` and the scaling that ties them.

    ``eps_squared`` means ``beta = c * eps**2``; ``eps_power`` means
    ``beta = c * eps**(2 + alpha)``; ``free`` imposes nothing.
    """

    eps: float
    beta: float
    regime: Regime = "free"
    alpha: float | None = None
    c_regime: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0 and 0.0 < self.beta < 1.0):
            raise ValueError(f"need 0 < eps, beta < 1, got eps={self.eps}, beta={self.beta}")
        if self.c_regime <= 0.0:
            raise ValueError("c_regime must be positive")
        if self.regime == "eps_power" and (self.alpha is None or self.alpha <= 0.0):
            raise ValueError("eps_power regime needs alpha > 0")
        if self.regime not in ("eps_squared", "eps_power", "free"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.regime != "free":
            expected = beta_for(self.eps, self.regime, self.alpha, self.c_regime)
            if not np.isclose(self.beta, expected, rtol=1e-12, atol=0.0):
                raise ValueError(f"beta={self.beta} inconsistent with regime {self.regime}")

    @classmethod
    def scaled(cls, eps: float, regime: Regime, alpha: float | None = None, c: float = 1.0):
        if regime == "free":
            raise ValueError("free regime needs an explicit beta")
        return cls(eps, beta_for(eps, regime, alpha, c), regime, alpha, c)

    @property
    def label(self) -> str:
        if self.regime == "eps_power":
            return f"eps_power({self.alpha:g})"
        return self.regime


def beta_for(eps: float, regime: Regime, alpha: float | None = None, c: float = 1.0) -> float:
    if regime == "eps_squared":
        return c * eps**2
    if regime == "eps_power":
        return c * eps ** (2.0 + alpha)
    raise ValueError(f"regime {regime!r} does not determine beta")


@dataclass(frozen=True)
class TimeControls:
    t_end: float
    cfl_safety: float = 0.5
    scheme: Scheme = "rk4"
    output_times: Sequence[float] | None = None
    dt_max: float = DT_MAX

    def __post_init__(self):
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.scheme not in ("rk4", "imex"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        times = np.asarray(self.outputs())
        if np.any(np.diff(times) <= 0.0) or times[0] < 0.0 or times[-1] > self.t_end * (1 + 1e-12):
            raise ValueError("output_times must be strictly increasing within [0, t_end]")

    def outputs(self) -> list[float]:
        if self.output_times is None:
            return [0.0, self.t_end]
        return [float(t) for t in self.output_times]

    @classmethod
    def uniform(cls, t_end: float, n_out: int, **kw) -> "TimeControls":
        """``n_out`` equal output intervals, including t=0 and t_end."""
        return cls(t_end, output_times=list(np.linspace(0.0, t_end, n_out + 1)), **kw)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[Field]
    params: RegParams
    steps: int = 0
    wall_seconds: float = 0.0
    max_boundary_ratio: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if any(s.grid != self.states[0].grid for s in self.states):
            raise ValueError("states must share one grid")

    @property
    def grid(self) -> Grid1D:
        return self.states[0].grid

    @property
    def final(self) -> Field:
        return self.states[-1]

    @property
    def boundary_flag(self) -> bool:
        return self.max_boundary_ratio > BOUNDARY_TOL

    def array(self) -> np.ndarray:
        return np.stack([s.values for s in self.states])


def rhs(u: Field, p: RegParams) -> Field:
    """Semi-discrete right-hand side; the flux is differentiated as d1(u^5)."""
    out = kernels.full_rhs(u.values, u.grid.dx, p.eps, p.beta)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(float("nan"), "non-finite right-hand side")
    return Field(out, u.grid, check=False)


def _dt_bounds(v: np.ndarray, dx: float, p: RegParams) -> dict[str, float]:
    u2 = v * v
    umax4 = float(np.max(u2 * u2))
    # Advective speed also picks up the linearised -9 beta u u_x^2 term.
    drift = 18.0 * p.beta * float(np.max(np.abs(v * d1(v, dx))))
    return {
        "advective": dx / (3.0 * umax4 + drift + DELTA),
        "diffusive": dx * dx / (2.0 * p.eps + 6.0 * p.beta * float(np.max(u2)) + DELTA),
        "nonlinear_diffusive": dx * dx / (6.0 * p.beta * float(np.max(u2)) + DELTA),
        "dispersive": dx**3 / (KAPPA * p.beta + DELTA),
    }


def stable_dt(u: Field, p: RegParams, controls: TimeControls) -> float:
    """Stable step for ``controls.scheme``, capped at ``controls.dt_max``.

    IMEX drops the constraints of the linear terms it integrates exactly
    but keeps the one from the explicit ``3 beta u^2 u_xx`` term.
    """
    b = _dt_bounds(u.values, u.grid.dx, p)
    if controls.scheme == "rk4":
        dt = min(b["advective"], b["diffusive"], b["dispersive"])
    else:
        dt = min(b["advective"], b["nonlinear_diffusive"])
    return min(controls.cfl_safety * dt, controls.dt_max)


def _rk4(f, v, dt):
    k1 = f(v)
    k2 = f(v + 0.5 * dt * k1)
    k3 = f(v + 0.5 * dt * k2)
    k4 = f(v + dt * k3)
    return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _LinearPropagator:
    """Exact flow of ``-beta d3 + eps d2`` in rfft space."""

    def __init__(self, grid: Grid1D, p: RegParams):
        _, s2, s3 = symbols(grid.n, grid.dx)
        self.n = grid.n
        self.symbol = -p.beta * s3 + p.eps * s2
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, v: np.ndarray, dt: float) -> np.ndarray:
        mult = self._cache.get(dt)
        if mult is None:
            mult = np.exp(dt * self.symbol)
            if len(self._cache) < 8:
                self._cache[dt] = mult
        return np.fft.irfft(np.fft.rfft(v) * mult, n=self.n)


def integrate(u0: Field, p: RegParams, controls: TimeControls) -> Trajectory:
    """Advance ``u0`` to ``controls.t_end`` and sample at the output times.

    Raises :class:`BlowUpError` on NaN/Inf or ``max|u| > 1e6``.
    """
    grid = u0.grid
    dx = grid.dx
    outputs = controls.outputs()
    v = np.array(u0.values, dtype=float)
    t = 0.0
    states, times = [], []
    steps = 0
    max_bratio = 0.0
    tic = time.perf_counter()

    if controls.scheme == "rk4":
        full = lambda w: kernels.full_rhs(w, dx, p.eps, p.beta)  # noqa: E731

        def advance(w, dt):
            return _rk4(full, w, dt)

    else:
        prop = _LinearPropagator(grid, p)
        nonlin = lambda w: kernels.nonlinear_rhs(w, dx, p.beta)  # noqa: E731

        def advance(w, dt):
            w = prop(w, 0.5 * dt)
            w = _rk4(nonlin, w, dt)
            return prop(w, 0.5 * dt)

    for target in outputs:
        while t < target:
            dt = stable_dt(Field(v, grid, check=False), p, controls)
            if t + dt >= target or target - (t + dt) < 1e-12 * max(1.0, target):
                dt = target - t
                t_next = target
            else:
                t_next = t + dt
            v = advance(v, dt)
            steps += 1
            t = t_next
            sup = np.max(np.abs(v))
            if not np.isfinite(sup):
                raise BlowUpError(t, "non-finite state")
            if sup > BLOWUP_SUP:
                raise BlowUpError(t, f"max|u| = {sup:.3g} exceeds {BLOWUP_SUP:g}")
        max_bratio = max(max_bratio, boundary_ratio(v))
        states.append(Field(v, grid))
        times.append(t)

    traj = Trajectory(
        np.array(times), states, p, steps, time.perf_counter() - tic, max_bratio,
        meta={"scheme": controls.scheme, "backend": kernels.BACKEND},
    )
    if traj.boundary_flag:
        log.warning("solution reached the periodic wrap (ratio %.2e)", max_bratio)
    return traj
