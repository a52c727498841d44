# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
from libc.math cimport isinf


def upwind_fluxes(const double[:, :, ::1] s, const double[:, ::1] u, const double[:, ::1] v):
    cdef Py_ssize_t m = s.shape[0], nx = s.shape[1], ny = s.shape[2]
    fx_a = np.zeros((m, nx + 1, ny))
    fy_a = np.zeros((m, nx, ny + 1))
    cdef double[:, :, ::1] fx = fx_a
    cdef double[:, :, ::1] fy = fy_a
    cdef Py_ssize_t a, i, j
    cdef double w
    for a in range(m):
        for i in range(1, nx):
            for j in range(ny):
                w = u[i, j]
                fx[a, i, j] = (s[a, i - 1, j] if w >= 0.0 else s[a, i, j]) * w
        for i in range(nx):
            for j in range(1, ny):
                w = v[i, j]
                fy[a, i, j] = (s[a, i, j - 1] if w >= 0.0 else s[a, i, j]) * w
    return fx_a, fy_a


def divergence(const double[:, :, ::1] fx, const double[:, :, ::1] fy, double hx, double hy):
    cdef Py_ssize_t m = fx.shape[0], nx = fx.shape[1] - 1, ny = fx.shape[2]
    out_a = np.empty((m, nx, ny))
    cdef double[:, :, ::1] out = out_a
    cdef Py_ssize_t a, i, j
    for a in range(m):
        for i in range(nx):
            for j in range(ny):
                out[a, i, j] = (fx[a, i + 1, j] - fx[a, i, j]) / hx + (fy[a, i, j + 1] - fy[a, i, j]) / hy
    return out_a


cdef inline double _xi(double y) nogil:
    cdef double t = y - 1.0
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    return 1.0 - t * t * (3.0 - 2.0 * t)


def convection(const double[:, ::1] u, const double[:, ::1] v, double hx, double hy, double k):
    cdef Py_ssize_t nx = u.shape[0] - 1, ny = u.shape[1]
    cdef bint trunc = not isinf(k)
    fxx_a = np.empty((nx, ny))
    fyy_a = np.empty((nx, ny))
    fxy_a = np.zeros((nx + 1, ny + 1))
    cdef double[:, ::1] fxx = fxx_a
    cdef double[:, ::1] fyy = fyy_a
    cdef double[:, ::1] fxy = fxy_a
    cdef Py_ssize_t i, j
    cdef double uc, vc, x
    for i in range(nx):
        for j in range(ny):
            uc = 0.5 * (u[i + 1, j] + u[i, j])
            vc = 0.5 * (v[i, j + 1] + v[i, j])
            x = _xi((uc * uc + vc * vc) / k) if trunc else 1.0
            fxx[i, j] = x * uc * uc
            fyy[i, j] = x * vc * vc
    for i in range(1, nx):
        for j in range(1, ny):
            uc = 0.5 * (u[i, j] + u[i, j - 1])
            vc = 0.5 * (v[i, j] + v[i - 1, j])
            x = _xi((uc * uc + vc * vc) / k) if trunc else 1.0
            fxy[i, j] = x * uc * vc
    cu_a = np.zeros((nx + 1, ny))
    cv_a = np.zeros((nx, ny + 1))
    cdef double[:, ::1] cu = cu_a
    cdef double[:, ::1] cv = cv_a
    for i in range(1, nx):
        for j in range(ny):
            cu[i, j] = (fxx[i, j] - fxx[i - 1, j]) / hx + (fxy[i, j + 1] - fxy[i, j]) / hy
    for i in range(nx):
        for j in range(1, ny):
            cv[i, j] = (fxy[i + 1, j] - fxy[i, j]) / hx + (fyy[i, j] - fyy[i, j - 1]) / hy
    return cu_a, cv_a


def strain_rates(const double[:, ::1] u, const double[:, ::1] v, double hx, double hy):
    cdef Py_ssize_t nx = u.shape[0] - 1, ny = u.shape[1]
    dxx_a = np.empty((nx, ny))
    dyy_a = np.empty((nx, ny))
    dxy_a = np.zeros((nx + 1, ny + 1))
    cdef double[:, ::1] dxx = dxx_a
    cdef double[:, ::1] dyy = dyy_a
    cdef double[:, ::1] dxy = dxy_a
    cdef Py_ssize_t i, j
    for i in range(nx):
        for j in range(ny):
            dxx[i, j] = (u[i + 1, j] - u[i, j]) / hx
            dyy[i, j] = (v[i, j + 1] - v[i, j]) / hy
    for i in range(1, nx):
        for j in range(1, ny):
            dxy[i, j] = 0.5 * ((u[i, j] - u[i, j - 1]) / hy + (v[i, j] - v[i - 1, j]) / hx)
    return dxx_a, dyy_a, dxy_a


def stress_divergence(const double[:, ::1] sxx, const double[:, ::1] syy,
                      const double[:, ::1] sxy, double hx, double hy):
    cdef Py_ssize_t nx = sxx.shape[0], ny = sxx.shape[1]
    fu_a = np.zeros((nx + 1, ny))
    fv_a = np.zeros((nx, ny + 1))
    cdef double[:, ::1] fu = fu_a
    cdef double[:, ::1] fv = fv_a
    cdef Py_ssize_t i, j
    for i in range(1, nx):
        for j in range(ny):
            fu[i, j] = (sxx[i, j] - sxx[i - 1, j]) / hx + (sxy[i, j + 1] - sxy[i, j]) / hy
    for i in range(nx):
        for j in range(1, ny):
            fv[i, j] = (sxy[i + 1, j] - sxy[i, j]) / hx + (syy[i, j] - syy[i, j - 1]) / hy
    return fu_a, fv_a
