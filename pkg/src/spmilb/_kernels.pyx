# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for Laguerre polynomials and the Wishart eigenvalue density."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, lgamma, sqrt

cnp.import_array()


cdef inline double _laguerre(int m, double r, double x, const double[::1] inv) noexcept nogil:
    cdef double p0 = 1.0, p1, p2
    cdef int k
    if m == 0:
        return 1.0
    p1 = 1.0 + r - x
    for k in range(1, m):
        p2 = ((2 * k + 1 + r - x) * p1 - (k + r) * p0) * inv[k]
        p0 = p1
        p1 = p2
    return p1


cdef double[::1] _reciprocals(int m):
    cdef double[::1] inv = np.empty(max(m, 1), dtype=np.float64)
    cdef int k
    for k in range(inv.shape[0]):
        inv[k] = 1.0 / (k + 1)
    return inv


def laguerre(int m, double r, double x):
    return _laguerre(m, r, x, _reciprocals(m))


def laguerre_array(int m, double r, x):
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t npts = xs.shape[0]
    out = np.empty(npts, dtype=np.float64)
    cdef double[::1] p1 = out
    cdef double[::1] p0 = np.ones(npts, dtype=np.float64)
    cdef Py_ssize_t i
    cdef int k
    cdef double nxt, inv
    with nogil:
        for i in range(npts):
            p1[i] = 1.0 + r - xs[i] if m > 0 else 1.0
        for k in range(1, m):
            inv = 1.0 / (k + 1)
            for i in range(npts):
                nxt = ((2 * k + 1 + r - xs[i]) * p1[i] - (k + r) * p0[i]) * inv
                p0[i] = p1[i]
                p1[i] = nxt
    return out.reshape(np.shape(x))


def wishart_density(x, int n, int width):
    # orthonormal Laguerre functions: psi_m = La_m * sqrt(m!/(m+r)!) * x^(r/2) * e^(-x/2);
    # order loop outside so the per-point updates are independent and vectorise
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t npts = xs.shape[0]
    out = np.empty(npts, dtype=np.float64)
    cdef double[::1] acc = out
    cdef double[::1] psi = np.empty(npts, dtype=np.float64)
    cdef double[::1] prev = np.zeros(npts, dtype=np.float64)
    cdef double[::1] shift = np.empty(npts, dtype=np.float64)
    cdef int r = n - width
    cdef int m
    cdef Py_ssize_t i
    cdef double xi, nxt, back, scale
    cdef double lg = lgamma(r + 1.0)
    cdef double inv_w = 1.0 / width
    with nogil:
        for i in range(npts):
            xi = xs[i]
            if xi > 0.0:
                psi[i] = exp(0.5 * (r * log(xi) - xi - lg))
            elif xi == 0.0 and r == 0:
                psi[i] = 1.0
            else:
                psi[i] = 0.0
            shift[i] = r + 1.0 - xi
            acc[i] = psi[i] * psi[i]
        for m in range(width - 1):
            back = sqrt(<double>m * (m + r))
            scale = 1.0 / sqrt((m + 1.0) * (m + 1.0 + r))
            for i in range(npts):
                nxt = ((2 * m + shift[i]) * psi[i] - back * prev[i]) * scale
                prev[i] = psi[i]
                psi[i] = nxt
                acc[i] += nxt * nxt
        for i in range(npts):
            acc[i] = acc[i] * inv_w if xs[i] >= 0.0 else 0.0
    return out.reshape(np.shape(x))
