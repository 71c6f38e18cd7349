"""Closed-form conjugation ``e^X (.) e^{-X}`` for quadratic-plus-linear ``X``.

For ``deg X <= 2`` the adjoint action ``[X, .]`` maps the affine span of
``(A1, A2, A1^dag, A2^dag, 1)`` into itself, so conjugation by ``e^X`` is
the exponential of a 5x5 matrix. The deformed Hamiltonian is assembled by
substituting the deformed ladders into ``w1 b1 a1 + w2 b2 a2 + w3``.

Nothing here addresses domains: ``e^X`` is typically unbounded and the
identities are formal until checked on concrete vectors (see
:mod:`pbl.fockrep` and :mod:`pbl.waves`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from pbl.opalg import DegreeError, OperatorPoly, commutator, ladder, product

# affine basis order: A1, A2, A1^dag, A2^dag, identity
BASIS_KEYS = ((0, 1, 0, 0), (0, 0, 0, 1), (1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 0))
GENERATOR_NAMES = ("A1", "A2", "Ad1", "Ad2")

# Omega[j, k] = identity coefficient of [G_j, G_k]
OMEGA = np.array(
    [
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [-1, 0, 0, 0],
        [0, -1, 0, 0],
    ],
    dtype=complex,
)


def generators() -> Tuple[OperatorPoly, ...]:
    return tuple(ladder(name) for name in GENERATOR_NAMES)


def affine_coordinates(p: OperatorPoly) -> np.ndarray:
    """Coordinates of an affine-linear poly on the 5-element basis."""
    if p.degree > 1:
        raise DegreeError("expected an affine-linear operator (degree <= 1)")
    return np.array([p[key] for key in BASIS_KEYS], dtype=complex)


def from_affine_coordinates(c: np.ndarray) -> OperatorPoly:
    return OperatorPoly({key: complex(v) for key, v in zip(BASIS_KEYS, c)})


def ad_generator(x: OperatorPoly) -> np.ndarray:
    """5x5 matrix ``M`` with ``[X, G_j] = sum_k M[j, k] G_k``; last row zero."""
    if x.degree > 2:
        raise DegreeError("X must have degree <= 2")
    m = np.zeros((5, 5), dtype=complex)
    for j, g in enumerate(generators()):
        m[j] = affine_coordinates(commutator(x, g))
    return m


def expm_taylor(m: np.ndarray, theta: float = 0.25) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    The scaled matrix has 1-norm <= ``theta`` and the series is summed until
    the next term is below double-precision resolution, so defective and
    nilpotent generators are handled without eigendecomposition.
    """
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite generator")
    norm = np.linalg.norm(m, 1)
    squarings = max(0, math.ceil(math.log2(norm / theta))) if norm > 0 else 0
    a = m / 2.0**squarings
    result = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, 40):
        term = term @ a / k
        result = result + term
        if np.linalg.norm(term, 1) <= 1e-18 * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result


@dataclass(frozen=True, eq=False)
class AffineLadderMap:
    """Action of ``e^X . e^{-X}`` on the ladder generators.

    Row ``j`` of ``linear`` (plus ``shift[j]`` times the identity) is the
    image of generator ``G_j`` in ``(A1, A2, A1^dag, A2^dag)``.
    """

    linear: np.ndarray
    shift: np.ndarray

    @classmethod
    def identity(cls) -> "AffineLadderMap":
        return cls(np.eye(4, dtype=complex), np.zeros(4, dtype=complex))

    @classmethod
    def from_matrix(cls, e: np.ndarray) -> "AffineLadderMap":
        return cls(np.array(e[:4, :4], dtype=complex), np.array(e[:4, 4], dtype=complex))

    @property
    def matrix(self) -> np.ndarray:
        e = np.zeros((5, 5), dtype=complex)
        e[:4, :4] = self.linear
        e[:4, 4] = self.shift
        e[4, 4] = 1.0
        return e

    def then(self, other: "AffineLadderMap") -> "AffineLadderMap":
        """Map obtained by conjugating with ``self`` first, then ``other``.

        ``e^Y e^X G e^-X e^-Y``: images under ``self`` are re-expressed through
        ``other``'s images of the generators.
        """
        return AffineLadderMap.from_matrix(self.matrix @ other.matrix)

    def symplectic_residual(self) -> float:
        """``max |L Omega L^T - Omega|``; zero iff commutators are preserved."""
        return float(np.max(np.abs(self.linear @ OMEGA @ self.linear.T - OMEGA)))

    def image(self, index: int) -> OperatorPoly:
        return from_affine_coordinates(self.matrix[index])

    def ladders(self) -> Tuple[OperatorPoly, OperatorPoly, OperatorPoly, OperatorPoly]:
        """Deformed ``(a1, a2, b1, b2)``."""
        return tuple(self.image(j) for j in range(4))


def exp_map(x: OperatorPoly) -> AffineLadderMap:
    """Exact ``e^{ad_X}`` on the affine ladder space."""
    return AffineLadderMap.from_matrix(expm_taylor(ad_generator(x)))


def deform_operator(ladder_map: AffineLadderMap, p: OperatorPoly) -> OperatorPoly:
    """Image of an affine-linear ``P`` under the conjugation map."""
    c = affine_coordinates(p)
    return from_affine_coordinates(c @ ladder_map.matrix)


@dataclass(frozen=True)
class H0Spec:
    """Frequencies of ``H0 = w1 A1^dag A1 + w2 A2^dag A2 + w3``.

    The position/momentum form ``wt1 (x1^2 + p1^2) + wt2 (x2^2 + p2^2) + wt3``
    uses ``wt1 = w1/2``, ``wt2 = w2/2`` and ``wt3 = w3 - (w1 + w2)/2``.
    """

    w1: float
    w2: float
    w3: float = 0.0

    @classmethod
    def from_tilde(cls, wt1: float, wt2: float, wt3: float = 0.0) -> "H0Spec":
        return cls(2 * wt1, 2 * wt2, wt3 + wt1 + wt2)

    @property
    def wt1(self) -> float:
        return self.w1 / 2

    @property
    def wt2(self) -> float:
        return self.w2 / 2

    @property
    def wt3(self) -> float:
        return self.w3 - (self.w1 + self.w2) / 2

    def params(self) -> Dict[str, float]:
        """Name bindings used by catalog expressions."""
        return {
            "w1": self.w1,
            "w2": self.w2,
            "w3": self.w3,
            "wt1": self.wt1,
            "wt2": self.wt2,
            "wt3": self.wt3,
        }

    def energy(self, n1: int, n2: int) -> float:
        return self.w1 * n1 + self.w2 * n2 + self.w3

    def poly(self) -> OperatorPoly:
        return OperatorPoly({(1, 1, 0, 0): self.w1, (0, 0, 1, 1): self.w2, (0, 0, 0, 0): self.w3})


def conserves_number(x: OperatorPoly, tol: float = 1e-14) -> bool:
    """Does ``X`` commute with ``A1^dag A1 + A2^dag A2``?"""
    total = OperatorPoly({(1, 1, 0, 0): 1.0, (0, 0, 1, 1): 1.0})
    return commutator(x, total).max_abs() <= tol


def number_operators(
    a1: OperatorPoly, a2: OperatorPoly, b1: OperatorPoly, b2: OperatorPoly
) -> Tuple[OperatorPoly, OperatorPoly]:
    """``N_j = b_j a_j``."""
    return product(b1, a1), product(b2, a2)


def hamiltonian_from_ladders(
    a1: OperatorPoly, a2: OperatorPoly, b1: OperatorPoly, b2: OperatorPoly, h0: H0Spec
) -> OperatorPoly:
    n1, n2 = number_operators(a1, a2, b1, b2)
    return n1 * h0.w1 + n2 * h0.w2 + OperatorPoly.constant(h0.w3)


def deform_hamiltonian(x: OperatorPoly, h0: H0Spec) -> OperatorPoly:
    """``H = e^X H0 e^{-X}`` in canonical normal-ordered form."""
    return hamiltonian_from_ladders(*exp_map(x).ladders(), h0)


@dataclass(frozen=True, eq=False)
class PseudoBosonResidual:
    """Residuals of ``[a_j, b_k] = delta_jk``, ``[a1, a2] = 0``, ``[b1, b2] = 0``."""

    matrix: np.ndarray
    aa: float
    bb: float

    @property
    def max(self) -> float:
        return float(max(self.matrix.max(), self.aa, self.bb))

    def passed(self, tol: float) -> bool:
        return self.max <= tol


def pseudo_boson_check(
    a1: OperatorPoly, a2: OperatorPoly, b1: OperatorPoly, b2: OperatorPoly
) -> PseudoBosonResidual:
    """Max-coefficient residuals of the pseudo-bosonic commutation rules."""
    for op in (a1, a2, b1, b2):
        if op.degree > 1:
            raise DegreeError("pseudo-boson operands must be affine-linear")
    one = OperatorPoly.constant(1.0)
    res = np.zeros((2, 2))
    for j, a in enumerate((a1, a2)):
        for k, b in enumerate((b1, b2)):
            target = one if j == k else OperatorPoly.zero()
            res[j, k] = commutator(a, b).distance(target)
    return PseudoBosonResidual(
        matrix=res,
        aa=commutator(a1, a2).max_abs(),
        bb=commutator(b1, b2).max_abs(),
    )
