"""Independent reference computations.

Each routine here takes a different path to a quantity that the main
modules compute, so that agreement between the two is evidence rather
than tautology:

* ``bch_series`` sums ``sum_k ad_X^k(G) / k!`` with symbolic commutators,
  bypassing the 5x5 matrix exponential of :mod:`pbl.deform`.
* ``fock_matrix_direct`` applies ladder operators to basis kets one at a
  time, bypassing the Kronecker-product kernels.
"""

from __future__ import annotations

import math
from typing import Dict, Tuple

import numpy as np

from pbl.deform import generators
from pbl.opalg import OperatorPoly, commutator

BCH_ORDER = 12


def bch_series(x: OperatorPoly, g: OperatorPoly, order: int = BCH_ORDER) -> OperatorPoly:
    """``e^X G e^{-X}`` truncated after ``ad_X^order``."""
    total = g
    term = g
    for k in range(1, order + 1):
        term = commutator(x, term) * (1.0 / k)
        if not term:
            break
        total = total + term
    return total


def bch_ladders(x: OperatorPoly, order: int = BCH_ORDER) -> Tuple[OperatorPoly, ...]:
    """Deformed ``(a1, a2, b1, b2)`` from the truncated series."""
    return tuple(bch_series(x, g, order) for g in generators())


def _apply_monomial(key, n1: int, n2: int) -> Tuple[float, int, int]:
    """``Ad1^a A1^b Ad2^c A2^d |n1, n2>`` as (amplitude, m1, m2)."""
    a, b, c, d = key
    amp = 1.0
    for _ in range(d):
        if n2 == 0:
            return 0.0, 0, 0
        amp *= math.sqrt(n2)
        n2 -= 1
    for _ in range(c):
        n2 += 1
        amp *= math.sqrt(n2)
    for _ in range(b):
        if n1 == 0:
            return 0.0, 0, 0
        amp *= math.sqrt(n1)
        n1 -= 1
    for _ in range(a):
        n1 += 1
        amp *= math.sqrt(n1)
    return amp, n1, n2


def fock_matrix_direct(n_max: int, poly: OperatorPoly) -> np.ndarray:
    """Dense truncated matrix built column by column from ket actions."""
    size = n_max + 1
    out = np.zeros((size * size, size * size), dtype=complex)
    for n1 in range(size):
        for n2 in range(size):
            col: Dict[int, complex] = {}
            for key, coeff in poly.coeffs.items():
                amp, m1, m2 = _apply_monomial(key, n1, n2)
                if amp and m1 <= n_max and m2 <= n_max:
                    row = m1 * size + m2
                    col[row] = col.get(row, 0) + coeff * amp
            for row, value in col.items():
                out[row, n1 * size + n2] = value
    return out
