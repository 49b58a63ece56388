"""Entropy solutions of ``u_t + F(u)_x = 0`` with ``F(u) = -(3/5) u^5``.

Contains a first-order Godunov finite-volume solver and an exact Riemann
solver built from the convex (or concave) envelope of the flux.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .grid import Field

N_ENVELOPE = 4097


class CFLViolation(ValueError):
    pass


def flux(u):
    return -0.6 * np.asarray(u, dtype=float) ** 5 if np.ndim(u) else -0.6 * float(u) ** 5


def flux_prime(u):
    return -3.0 * np.asarray(u, dtype=float) ** 4 if np.ndim(u) else -3.0 * float(u) ** 4


def flux_second(u):
    return -12.0 * np.asarray(u, dtype=float) ** 3 if np.ndim(u) else -12.0 * float(u) ** 3


def godunov_flux(a: float, b: float) -> float:
    """``min F`` over ``[a, b]`` if ``a <= b``, else ``max F`` over ``[b, a]``.

    The extremum is taken over the endpoints and the interior critical
    point ``u = 0`` of ``F``.
    """
    cands = [flux(a), flux(b)]
    if min(a, b) <= 0.0 <= max(a, b):
        cands.append(0.0)
    return min(cands) if a <= b else max(cands)


def rusanov_flux(a, b):
    """Local Lax-Friedrichs flux; only used as a cross-check."""
    s = np.maximum(np.abs(flux_prime(a)), np.abs(flux_prime(b)))
    return 0.5 * (flux(a) + flux(b)) - 0.5 * s * (np.asarray(b) - np.asarray(a))


def max_speed(u) -> float:
    return float(np.max(3.0 * np.asarray(u) ** 4))


def step_fv(u: Field, dt: float, periodic: bool = True, numerical_flux: str = "godunov") -> Field:
    """One explicit finite-volume step.

    ``periodic=False`` pads with zero-gradient ghost cells, which is the
    setting for isolated Riemann problems.
    """
    dx = u.grid.dx
    smax = max_speed(u.values)
    if dt < 0.0 or dt * smax > dx * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.3e} exceeds dx/max|F'| = {dx / max(smax, 1e-300):.3e}")
    lam = dt / dx
    if numerical_flux == "godunov":
        return Field(kernels.godunov_update(u.values, lam, periodic), u.grid)
    if numerical_flux == "rusanov":
        v = u.values
        if periodic:
            right = np.roll(v, -1)
        else:
            right = np.append(v[1:], v[-1])
        g = rusanov_flux(v, right)
        g_left = np.roll(g, 1) if periodic else np.insert(g[:-1], 0, flux(v[0]))
        return Field(v - lam * (g - g_left), u.grid)
    raise ValueError(f"unknown numerical flux {numerical_flux!r}")


def solve_reference(
    u0: Field,
    t_end: float,
    cfl: float = 0.9,
    periodic: bool = True,
    output_times=None,
    numerical_flux: str = "godunov",
):
    """March ``step_fv`` to ``t_end``, landing exactly on it.

    With ``output_times`` the states at those times are returned as a
    ``(times, states)`` pair; otherwise only the final field.
    """
    targets = [t_end] if output_times is None else [float(t) for t in output_times]
    dx = u0.grid.dx
    u = u0
    t = 0.0
    states = []
    for target in targets:
        while t < target:
            smax = max_speed(u.values)
            dt = cfl * dx / smax if smax > 0.0 else target - t
            if t + dt >= target:
                dt = target - t
            u = step_fv(u, dt, periodic, numerical_flux)
            t = target if dt == target - t else t + dt
        states.append(u)
    if output_times is None:
        return u
    return np.array(targets), states


# ---------------------------------------------------------------- Riemann

WaveKind = Literal["shock", "rarefaction", "constant"]


@dataclass(frozen=True)
class Wave:
    kind: WaveKind
    s_lo: float
    s_hi: float
    u_lo: float  # state on the slow side
    u_hi: float  # state on the fast side


@dataclass(frozen=True)
class RiemannSolution:
    u_left: float
    u_right: float
    waves: tuple[Wave, ...]

    def evaluate(self, x, t: float):
        return evaluate(self, x, t)

    @property
    def shocks(self) -> list[Wave]:
        return [w for w in self.waves if w.kind == "shock"]


def _hull(us: np.ndarray, fs: np.ndarray) -> list[int]:
    """Monotone chain over points ordered from u_left to u_right.

    Keeps the chain whose chord slopes are strictly increasing along the
    traversal: the lower convex envelope for ascending ``us`` and the upper
    concave one for descending ``us``.
    """
    h: list[int] = []
    for k in range(len(us)):
        while len(h) >= 2:
            i, j = h[-2], h[-1]
            s1 = (fs[j] - fs[i]) / (us[j] - us[i])
            s2 = (fs[k] - fs[j]) / (us[k] - us[j])
            if s1 >= s2:
                h.pop()
            else:
                break
        h.append(k)
    return h


def _chord(a: float, b: float) -> float:
    return (flux(b) - flux(a)) / (b - a)


def _polish_tangent(u_t: float, u_o: float, lo: float, hi: float) -> float:
    """Refine ``u_t`` so that ``F'(u_t)`` equals the chord slope to ``u_o``."""
    g = lambda u: flux_prime(u) * (u - u_o) - (flux(u) - flux(u_o))  # noqa: E731
    if g(lo) * g(hi) > 0.0:
        return u_t
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def riemann_exact(u_l: float, u_r: float, n_samples: int = N_ENVELOPE) -> RiemannSolution:
    """Entropy solution of the Riemann problem via the numeric flux envelope."""
    u_l, u_r = float(u_l), float(u_r)
    if u_l == u_r:
        return RiemannSolution(u_l, u_r, (Wave("constant", -np.inf, np.inf, u_l, u_r),))
    us = np.linspace(u_l, u_r, n_samples)
    fs = flux(us)
    h = _hull(us, fs)
    du = abs(us[1] - us[0])

    # Group hull edges into shocks (chords that skip samples) and
    # rarefactions (runs of adjacent samples).
    pieces: list[list] = []
    for a, b in zip(h[:-1], h[1:]):
        kind = "shock" if b - a > 1 else "rarefaction"
        if pieces and pieces[-1][0] == kind == "rarefaction":
            pieces[-1][2] = b
        else:
            pieces.append([kind, a, b])

    # Tangent points are only known to sample spacing; polish them.
    states = {}
    for kind, a, b in pieces:
        states[a] = us[a]
        states[b] = us[b]
    for _ in range(3):
        for kind, a, b in pieces:
            if kind != "shock":
                continue
            for end, other in ((a, b), (b, a)):
                if end in (0, len(us) - 1):
                    continue
                lo, hi = sorted((us[end] - 2 * du, us[end] + 2 * du))
                states[end] = _polish_tangent(states[end], states[other], lo, hi)

    waves = []
    for kind, a, b in pieces:
        ua, ub = states[a], states[b]
        if kind == "shock":
            s = _chord(ua, ub)
            waves.append(Wave("shock", s, s, ua, ub))
        else:
            waves.append(Wave("rarefaction", flux_prime(ua), flux_prime(ub), ua, ub))
    sol = RiemannSolution(u_l, u_r, tuple(waves))
    check = verify_riemann(sol)
    if not check["ok"]:
        raise RuntimeError(f"envelope construction failed verification: {check}")
    return sol


def _fan_state(w: Wave, xi: float) -> float:
    if xi <= w.s_lo:
        return w.u_lo
    if xi >= w.s_hi:
        return w.u_hi
    g = lambda u: flux_prime(u) - xi  # noqa: E731
    return brentq(g, min(w.u_lo, w.u_hi), max(w.u_lo, w.u_hi), xtol=1e-15, maxiter=200)


def evaluate(sol: RiemannSolution, x, t: float):
    """Self-similar profile ``u(x/t)`` of a Riemann solution centred at 0."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for k, xv in enumerate(xs):
        xi = xv / t if t > 0.0 else np.sign(xv) * np.inf
        val = sol.u_left
        for w in sol.waves:
            if w.kind == "constant":
                val = w.u_lo if xi < 0 else w.u_hi
                break
            if xi < w.s_lo:
                break
            if w.kind == "shock":
                val = w.u_hi
            else:
                val = _fan_state(w, xi)
        out[k] = val
    return out if np.ndim(x) else float(out[0])


def verify_riemann(sol: RiemannSolution, n_check: int = 10_000, tol: float = 1e-9) -> dict:
    """Speed ordering, Rankine-Hugoniot and Oleinik chord checks."""
    report = {"ok": True, "rh_max": 0.0, "oleinik_min": np.inf, "ordered": True}
    speeds = [(w.s_lo, w.s_hi) for w in sol.waves if w.kind != "constant"]
    for (a_lo, a_hi), (b_lo, b_hi) in zip(speeds[:-1], speeds[1:]):
        if a_hi > b_lo + tol:
            report["ordered"] = False
    for w in sol.shocks:
        rh = abs(w.s_lo * (w.u_hi - w.u_lo) - (flux(w.u_hi) - flux(w.u_lo)))
        report["rh_max"] = max(report["rh_max"], rh)
        us = np.linspace(w.u_lo, w.u_hi, n_check + 2)[1:-1]
        left = (flux(us) - flux(w.u_lo)) / (us - w.u_lo)
        right = (flux(w.u_hi) - flux(us)) / (w.u_hi - us)
        margin = min(np.min(left - w.s_lo), np.min(w.s_lo - right))
        report["oleinik_min"] = min(report["oleinik_min"], float(margin))
    report["ok"] = report["ordered"] and report["rh_max"] <= 1e-10 and report["oleinik_min"] >= -tol
    return report


def riemann_datum(grid, u_l: float, u_r: float, x0: float = 0.0) -> Field:
    """Cell averages of the step ``u_l`` for ``x < x0``, ``u_r`` beyond."""
    x = grid.x
    dx = grid.dx
    frac = np.clip((x + 0.5 * dx - x0) / dx, 0.0, 1.0)
    return Field(u_l + (u_r - u_l) * frac, grid)
