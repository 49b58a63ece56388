"""Pure numpy kernels. Reference implementation and fallback backend."""

import numpy as np

from .grid import d1, d2, d3


def nonlinear_rhs(u, dx, beta):
    """``(3/5) d1(u^5) + 3 beta u^2 d2(u) - 9 beta u d1(u)^2``."""
    ux = d1(u, dx)
    return 0.6 * d1(u**5, dx) + 3.0 * beta * u * u * d2(u, dx) - 9.0 * beta * u * ux * ux


def full_rhs(u, dx, eps, beta):
    return nonlinear_rhs(u, dx, beta) - beta * d3(u, dx) + eps * d2(u, dx)


def _envelope_flux(a, b):
    # Extremum of F(u) = -0.6 u^5 over the interface interval; F' vanishes only at 0.
    fa = -0.6 * a**5
    fb = -0.6 * b**5
    spans_zero = (np.minimum(a, b) <= 0.0) & (np.maximum(a, b) >= 0.0)
    lo = np.minimum(fa, fb)
    hi = np.maximum(fa, fb)
    lo = np.where(spans_zero, np.minimum(lo, 0.0), lo)
    hi = np.where(spans_zero, np.maximum(hi, 0.0), hi)
    return np.where(a <= b, lo, hi)


def godunov_update(u, lam, periodic=True):
    """One Godunov step ``u - lam (G[i+1/2] - G[i-1/2])``.

    Non-periodic mode uses zero-gradient ghost cells.
    """
    if periodic:
        right = np.roll(u, -1)
    else:
        right = np.empty_like(u)
        right[:-1] = u[1:]
        right[-1] = u[-1]
    g = _envelope_flux(u, right)  # flux through i+1/2
    if periodic:
        g_left = np.roll(g, 1)
    else:
        g_left = np.empty_like(g)
        g_left[1:] = g[:-1]
        g_left[0] = _envelope_flux(u[:1], u[:1])[0]
    return u - lam * (g - g_left)
