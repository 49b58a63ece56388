# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels; signatures mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _flux(double u) nogil:
    cdef double u2 = u * u
    return -0.6 * u2 * u2 * u


cdef inline double _envelope(double a, double b) nogil:
    cdef double fa = _flux(a)
    cdef double fb = _flux(b)
    cdef double r
    if a <= b:
        r = fa if fa < fb else fb
        if a <= 0.0 and b >= 0.0 and r > 0.0:
            r = 0.0
    else:
        r = fa if fa > fb else fb
        if b <= 0.0 and a >= 0.0 and r < 0.0:
            r = 0.0
    return r


cdef void _nonlinear(const double[::1] u, double[::1] out, double dx, double beta) nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, im, ip
    cdef double inv2dx = 1.0 / (2.0 * dx)
    cdef double invdx2 = 1.0 / (dx * dx)
    cdef double ul, uc, ur, ux, uxx, ul2, ur2
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        ip = i + 1 if i < n - 1 else 0
        ul = u[im]
        uc = u[i]
        ur = u[ip]
        ux = (ur - ul) * inv2dx
        uxx = (ur - 2.0 * uc + ul) * invdx2
        ul2 = ul * ul
        ur2 = ur * ur
        out[i] = (0.6 * (ur2 * ur2 * ur - ul2 * ul2 * ul) * inv2dx
                  + 3.0 * beta * uc * uc * uxx
                  - 9.0 * beta * uc * ux * ux)


def nonlinear_rhs(u, double dx, double beta):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    out = np.empty(uv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        _nonlinear(uv, ov, dx, beta)
    return out


def full_rhs(u, double dx, double eps, double beta):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, im, imm, ip, ipp
    cdef double invdx2 = 1.0 / (dx * dx)
    cdef double inv2dx3 = 1.0 / (2.0 * dx * dx * dx)
    with nogil:
        _nonlinear(uv, ov, dx, beta)
        for i in range(n):
            im = (i - 1 + n) % n
            imm = (i - 2 + n) % n
            ip = (i + 1) % n
            ipp = (i + 2) % n
            ov[i] += (-beta * (uv[ipp] - 2.0 * uv[ip] + 2.0 * uv[im] - uv[imm]) * inv2dx3
                      + eps * (uv[ip] - 2.0 * uv[i] + uv[im]) * invdx2)
    return out


def godunov_update(u, double lam, bint periodic=True):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double g_left, g_right
    with nogil:
        if periodic:
            g_left = _envelope(uv[n - 1], uv[0])
        else:
            g_left = _envelope(uv[0], uv[0])
        for i in range(n):
            if i < n - 1:
                g_right = _envelope(uv[i], uv[i + 1])
            elif periodic:
                g_right = _envelope(uv[n - 1], uv[0])
            else:
                g_right = _envelope(uv[n - 1], uv[n - 1])
            ov[i] = uv[i] - lam * (g_right - g_left)
            g_left = g_right
    return out
