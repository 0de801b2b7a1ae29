# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trapezoidal quadrature for scaled K-Bessel functions.

e^z K_{ir}(z) = int_0^inf exp(-z (cosh u - 1)) cos(r u) du and the same with
cosh(nu u) for real order.  The integrand already decays double
exponentially, so the plain trapezoidal rule in u converges geometrically
once the step resolves the oscillation.
"""

from libc.math cimport exp, cos, cosh, sinh, sqrt, acosh, ceil, fabs, fmin

import numpy as np

cdef double TWO_PI = 6.283185307179586
cdef double TAIL = 45.0
cdef double H_MAX = 0.1


cdef inline double _cutoff(double z, double nu) nogil:
    cdef double u = acosh(1.0 + TAIL / z)
    if nu > 0.0:
        u = acosh(1.0 + (TAIL + nu * u) / z)
        u = acosh(1.0 + (TAIL + nu * u) / z)
    return u


cdef inline double _step(double r, double z) nogil:
    cdef double h = fmin(H_MAX, TWO_PI / (r + 10.0 * sqrt(z) + 10.0))
    if r > 0.0:
        h = fmin(h, TWO_PI / (20.0 * r))
    return h


cdef void _trap(double r, double z, double nu, bint imag, double* val, double* absval, long* nodes) nogil:
    cdef double u_max = _cutoff(z, nu)
    cdef double h = _step(r, z)
    cdef long n = <long>ceil(u_max / h)
    cdef long k
    cdef double u, s, f, w
    cdef double acc = 0.0, comp = 0.0, tot, absacc = 0.0
    for k in range(n + 1):
        u = k * h
        s = sinh(0.5 * u)
        w = exp(-2.0 * z * s * s)
        if imag:
            f = w * cos(r * u)
        else:
            f = w * cosh(nu * u)
        if k == 0:
            f *= 0.5
        # Neumaier compensated sum
        tot = acc + f
        if fabs(acc) >= fabs(f):
            comp += (acc - tot) + f
        else:
            comp += (f - tot) + acc
        acc = tot
        absacc += fabs(f)
    val[0] = h * (acc + comp)
    absval[0] = h * absacc
    nodes[0] = n + 1


def kir_scaled_many(r, double z):
    """Return (values, absolute sums, node counts) for e^z K_{ir}(z)."""
    cdef double[::1] rr = np.ascontiguousarray(r, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = rr.shape[0], i
    out = np.empty(n)
    ab = np.empty(n)
    nd = np.empty(n, dtype=np.int64)
    cdef double[::1] o = out
    cdef double[::1] a = ab
    cdef long long[::1] c = nd
    cdef long cnt
    with nogil:
        for i in range(n):
            _trap(rr[i], z, 0.0, True, &o[i], &a[i], &cnt)
            c[i] = cnt
    return out, ab, nd


def knu_scaled_many(nu, double z):
    """Return (values, absolute sums, node counts) for e^z K_nu(z), real nu."""
    cdef double[::1] vv = np.ascontiguousarray(nu, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = vv.shape[0], i
    out = np.empty(n)
    ab = np.empty(n)
    nd = np.empty(n, dtype=np.int64)
    cdef double[::1] o = out
    cdef double[::1] a = ab
    cdef long long[::1] c = nd
    cdef long cnt
    with nogil:
        for i in range(n):
            _trap(0.0, z, vv[i], False, &o[i], &a[i], &cnt)
            c[i] = cnt
    return out, ab, nd
