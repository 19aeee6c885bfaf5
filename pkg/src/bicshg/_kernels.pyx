# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice-sum kernels; same contract as ``_kernels_py``."""

from libc.math cimport sqrt, log, exp, fabs, M_PI

cdef double TWO_PI = 2.0 * M_PI
cdef long _MAX_TERMS = 50000000


cdef void _em_tail(double q, double c, long n, double* value, double* bound) nogil:
    cdef double t = TWO_PI * n + c
    cdef double s = sqrt(t * t - q * q)
    cdef double s2 = s * s
    cdef double n1 = n + 1.0
    cdef double f = 1.0 / s - 1.0 / (TWO_PI * n1)
    cdef double integral = log(2.0 * TWO_PI * n1 / (t + s)) / TWO_PI
    cdef double d1 = -TWO_PI * t / (s2 * s) + 1.0 / (TWO_PI * n1 * n1)
    cdef double d3 = (-3.0 * TWO_PI * TWO_PI * TWO_PI * t * (2.0 * t * t + 3.0 * q * q)
                      / (s2 * s2 * s2 * s) + 6.0 / (TWO_PI * n1 * n1 * n1 * n1))
    value[0] = integral + 0.5 * f - d1 / 12.0 + d3 / 720.0
    bound[0] = fabs(d3) / 720.0


def alpha_closed_sum(double q, double qx, double tol, long m_max=0):
    cdef long n = <long>((q + fabs(qx)) / TWO_PI) + 2
    cdef long m
    cdef double v, b1, b2, t, total = 0.0
    cdef double c
    cdef int side
    if m_max + 1 > n:
        n = m_max + 1
    while True:
        _em_tail(q, qx, n, &v, &b1)
        _em_tail(q, -qx, n, &v, &b2)
        if b1 + b2 < tol or n > 10000000:
            break
        n *= 2
    with nogil:
        for side in range(2):
            c = qx if side == 0 else -qx
            for m in range(1, n):
                t = TWO_PI * m + c
                if t <= q:
                    continue
                total += 1.0 / sqrt(t * t - q * q) - 1.0 / (TWO_PI * (m + 1))
            _em_tail(q, c, n, &v, &b1)
            total += v
    return total, n


def beta_closed_sum(double q, double qx, double h, double tol):
    cdef double ratio = exp(-4.0 * M_PI * h)
    cdef double total = 0.0, t, kappa, term, c
    cdef long m, used = 0
    cdef int side
    with nogil:
        for side in range(2):
            c = qx if side == 0 else -qx
            m = 1
            while m < _MAX_TERMS:
                t = TWO_PI * m + c
                if t > q:
                    kappa = sqrt(t * t - q * q)
                    term = exp(-2.0 * h * kappa) / kappa
                    total += term
                    if term * ratio / (1.0 - ratio) < 0.5 * tol:
                        break
                m += 1
            if m > used:
                used = m
    return total, used
