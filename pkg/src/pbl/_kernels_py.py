"""Pure-Python kernels; same API as the compiled ``_ckernels`` module."""

from __future__ import annotations

import math

import numpy as np


def hermite_table(n_max, x):
    """Physicists' Hermite ``H_0..H_n_max`` at the points ``x``; shape ``(n_max+1, len(x))``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((n_max + 1, x.shape[0]))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * x
    for n in range(1, n_max):
        out[n + 1] = 2.0 * x * out[n] - 2.0 * n * out[n - 1]
    return out


def laguerre_table(n_max, x):
    """Laguerre ``L_0..L_n_max`` at the scalar ``x``."""
    x = float(x)
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 - x
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1 - x) * out[n] - n * out[n - 1]) / (n + 1)
    return out


def fock_poly_matrix(n_max, keys, coeffs):
    """Dense matrix of ``sum_t coeffs[t] * Ad1^a A1^b Ad2^c A2^d`` (mode-1 index major)."""
    size = n_max + 1
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 4)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    out = np.zeros((size * size, size * size), dtype=np.complex128)
    for (a, b, c, d), value in zip(keys, coeffs):
        out += value * np.kron(_mode_matrix(size, a, b), _mode_matrix(size, c, d))
    return out


def _mode_matrix(size, up, down):
    """``(A^dag)^up A^down`` on ``|0..size-1>``; exact compression."""
    m = np.zeros((size, size))
    for n in range(down, size):
        k = n - down + up
        if k < size:
            # sqrt(n!/(n-down)!) * sqrt(k!/(n-down)!)
            m[k, n] = math.sqrt(math.perm(n, down) * math.perm(k, up))
    return m


def summation_rule(m1, m2, n1, n2, c, s):
    """Quadruple binomial sum for the overlap of the second model's families.

    Evaluates ``<Psi_{m1,m2}, phi_{n1,n2}>`` term by term with the
    selection rules ``m1+m2 = n1+n2`` and ``l+i = j+k`` and the prefactors
    written out as binomials and ``xi``; summed with ``math.fsum``.
    """
    if m1 + m2 != n1 + n2:
        return 0.0
    terms = []
    for i in range(m1 + 1):
        for l in range(m2 + 1):
            for k in range(n1 + 1):
                for j in range(n2 + 1):
                    if l + i != j + k:
                        continue
                    value = (
                        math.comb(m1, i)
                        * math.comb(m2, l)
                        * math.comb(n1, k)
                        * math.comb(n2, j)
                        * _xi(n1, n2, j, k)
                        * _xi(m1, m2, l, i)
                        * c ** (m1 + n1 + l - i + j - k)
                        * (-1.0) ** (m2 + i - l)
                        * s ** (m2 + n2 + i - l + k - j)
                    )
                    terms.append(value)
    return math.fsum(terms)


def _xi(a, b, c, d):
    return math.sqrt(math.factorial(a + b - c - d) * math.factorial(c + d) / (math.factorial(a) * math.factorial(b)))
