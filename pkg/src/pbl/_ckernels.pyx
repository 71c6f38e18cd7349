# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same API as ``pbl._kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, lgamma, exp, fabs

cnp.import_array()


def hermite_table(int n_max, x):
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t m = xs.shape[0]
    out_arr = np.empty((n_max + 1, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    cdef int n
    for i in range(m):
        out[0, i] = 1.0
        if n_max >= 1:
            out[1, i] = 2.0 * xs[i]
        for n in range(1, n_max):
            out[n + 1, i] = 2.0 * xs[i] * out[n, i] - 2.0 * n * out[n - 1, i]
    return out_arr


def laguerre_table(int n_max, double x):
    out_arr = np.empty(n_max + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int n
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 - x
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1 - x) * out[n] - n * out[n - 1]) / (n + 1)
    return out_arr


cdef inline double _perm_sqrt(int n, int k):
    # sqrt(n! / (n-k)!)
    cdef double r = 1.0
    cdef int t
    for t in range(n - k + 1, n + 1):
        r *= t
    return sqrt(r)


def fock_poly_matrix(int n_max, keys, coeffs):
    cdef long[:, ::1] ks = np.ascontiguousarray(np.asarray(keys, dtype=np.int64).reshape(-1, 4), dtype=np.int64)
    cdef double complex[::1] cs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef int size = n_max + 1
    out_arr = np.zeros((size * size, size * size), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t t
    cdef int a, b, c, d, n1, n2, k1, k2
    cdef double w1
    for t in range(ks.shape[0]):
        a = ks[t, 0]
        b = ks[t, 1]
        c = ks[t, 2]
        d = ks[t, 3]
        for n1 in range(b, size):
            k1 = n1 - b + a
            if k1 >= size:
                continue
            w1 = _perm_sqrt(n1, b) * _perm_sqrt(k1, a)
            for n2 in range(d, size):
                k2 = n2 - d + c
                if k2 >= size:
                    continue
                out[k1 * size + k2, n1 * size + n2] += cs[t] * (w1 * _perm_sqrt(n2, d) * _perm_sqrt(k2, c))
    return out_arr


cdef inline double _lbinom(int n, int k):
    return lgamma(n + 1.0) - lgamma(k + 1.0) - lgamma(n - k + 1.0)


cdef inline double _lfact(int n):
    return lgamma(n + 1.0)


def summation_rule(int m1, int m2, int n1, int n2, double c, double s):
    if m1 + m2 != n1 + n2:
        return 0.0
    cdef int i, l, k, j, pc, ps, sign
    cdef double logmag, term, total = 0.0, comp = 0.0, t
    for i in range(m1 + 1):
        for l in range(m2 + 1):
            for k in range(n1 + 1):
                j = l + i - k
                if j < 0 or j > n2:
                    continue
                pc = m1 + n1 + l - i + j - k
                ps = m2 + n2 + i - l + k - j
                logmag = (_lbinom(m1, i) + _lbinom(m2, l) + _lbinom(n1, k) + _lbinom(n2, j)
                          + 0.5 * (_lfact(n1 + n2 - j - k) + _lfact(j + k) - _lfact(n1) - _lfact(n2))
                          + 0.5 * (_lfact(m1 + m2 - l - i) + _lfact(l + i) - _lfact(m1) - _lfact(m2)))
                term = exp(logmag) * c ** pc * s ** ps
                if (m2 + i - l) % 2:
                    term = -term
                # Neumaier compensated sum
                t = total + term
                if fabs(total) >= fabs(term):
                    comp += (total - t) + term
                else:
                    comp += (term - t) + total
                total = t
    return total + comp
