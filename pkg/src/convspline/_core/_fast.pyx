# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled numerical core: marching/stability recursions and the
triangle-pair quadrature bins used by retarded-matrix assembly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, sqrt

cnp.import_array()

DEF OVERFLOW_LIMIT = 1e250


cdef inline double _cardinal(int degree, double u) nogil:
    """Cardinal B-spline b^degree(u), supported on [0, degree+1)."""
    if u <= 0.0 or u >= degree + 1:
        return 0.0
    if degree == 0:
        return 1.0
    if degree == 1:
        return u if u < 1.0 else 2.0 - u
    if degree == 2:
        if u < 1.0:
            return 0.5 * u * u
        if u < 2.0:
            return -1.5 + u * (3.0 - u)
        return 4.5 + u * (-3.0 + 0.5 * u)
    if u < 1.0:
        return u * u * u / 6.0
    if u < 2.0:
        return 4.0 / 6.0 + u * (-2.0 + u * (2.0 - 0.5 * u))
    if u < 3.0:
        return -44.0 / 6.0 + u * (10.0 + u * (-4.0 + 0.5 * u))
    return 64.0 / 6.0 + u * (-8.0 + u * (2.0 - u / 6.0))


def march_core(q, a):
    """Solve sum_{j=0}^n q_j v_{n-j} = a_n for v by forward substitution."""
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n_tot = av.shape[0]
    cdef Py_ssize_t nq = qv.shape[0]
    out = np.empty(n_tot)
    cdef double[::1] v = out
    cdef double inv_q0 = 1.0 / qv[0]
    cdef Py_ssize_t n, j, jmax
    cdef double s
    with nogil:
        v[0] = av[0] * inv_q0
        for n in range(1, n_tot):
            jmax = n if n < nq - 1 else nq - 1
            s = 0.0
            for j in range(1, jmax + 1):
                s += qv[j] * v[n - j]
            v[n] = (av[n] - s) * inv_q0
    return out


def pn_core(q, Py_ssize_t n_max):
    """Stability coefficients p_0..p_{n_max}; returns (p, overflowed)."""
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t nq = qv.shape[0]
    out = np.empty(n_max + 1)
    cdef double[::1] p = out
    cdef double inv_q0 = -1.0 / qv[0]
    cdef Py_ssize_t n, j, jmax
    cdef double s
    cdef bint overflowed = False
    with nogil:
        p[0] = 1.0
        for n in range(1, n_max + 1):
            jmax = n if n < nq - 1 else nq - 1
            s = 0.0
            for j in range(1, jmax + 1):
                s += qv[j] * p[n - j]
            s *= inv_q0
            if fabs(s) > OVERFLOW_LIMIT:
                overflowed = True
                break
            p[n] = s
    if overflowed:
        out[n:] = np.inf
    return out, overflowed


def batch_pair_bins(
    double[:, :, ::1] points,
    double[:, ::1] weights,
    long[::1] idx_a,
    long[::1] idx_b,
    long[::1] jlo,
    long[::1] nbins,
    long[::1] out_off,
    double[::1] out,
    double inv_dt,
    int degree,
):
    """Accumulate cardinal-translate quadrature bins for element pairs.

    Same contract as the reference implementation: disjoint output slots per
    pair, zero-initialised ``out``.
    """
    cdef Py_ssize_t npairs = idx_a.shape[0]
    cdef Py_ssize_t nq = points.shape[1]
    cdef Py_ssize_t p, a, b, ia, ib
    cdef long g, g_lo, g_hi, g0, g1, base
    cdef double dx, dy, dz, d, tau, w
    cdef int supp = degree + 1
    with nogil:
        for p in range(npairs):
            ia = idx_a[p]
            ib = idx_b[p]
            g_lo = jlo[p]
            g_hi = g_lo + nbins[p]
            base = out_off[p]
            for a in range(nq):
                for b in range(nq):
                    dx = points[ia, a, 0] - points[ib, b, 0]
                    dy = points[ia, a, 1] - points[ib, b, 1]
                    dz = points[ia, a, 2] - points[ib, b, 2]
                    d = sqrt(dx * dx + dy * dy + dz * dz)
                    if d == 0.0:
                        continue
                    tau = d * inv_dt
                    w = weights[ia, a] * weights[ib, b] / d
                    g0 = <long>floor(tau) - supp + 1
                    if g0 < g_lo:
                        g0 = g_lo
                    g1 = <long>floor(tau)
                    if g1 >= g_hi:
                        g1 = g_hi - 1
                    for g in range(g0, g1 + 1):
                        out[base + g - g_lo] += w * _cardinal(degree, tau - g)
