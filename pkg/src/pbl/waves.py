"""Real-space wavefunctions of the position-deformed model.

States are Hermite products times a Gaussian,

    c * H_n1(x1) H_n2(x2) * exp(-1/2 x^T Q x + l^T x),

and every inner product in scope is a polynomial times a Gaussian. Such
integrals are evaluated exactly: complete the square, rotate onto the
eigenbasis of the 2x2 form, and apply a tensor Gauss-Hermite rule.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite import hermgauss

from pbl import kernels

J = np.array([[0.0, 1.0], [1.0, 0.0]])
N_DEFAULT = 1.0 / math.sqrt(math.pi)
MIN_NODES = 20


class NotIntegrableError(ValueError):
    """The combined quadratic form is not positive definite."""


def hermite(n: int, x) -> np.ndarray:
    """Physicists' Hermite polynomial ``H_n`` at ``x``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    arr = np.asarray(x, dtype=float)
    out = kernels.hermite_table(n, arr.ravel())[n].reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def laguerre(n: int, x: float) -> float:
    """Laguerre polynomial ``L_n(x)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return float(kernels.laguerre_table(n, x)[n])


def is_positive_definite(q: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(np.asarray(q, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True


def deformation_form(gamma: float) -> np.ndarray:
    """``Q = I - 2 gamma J``; positive definite iff ``|gamma| < 1/2``."""
    return np.eye(2) - 2.0 * gamma * J


@dataclass(frozen=True, eq=False)
class DeformedGaussianState:
    """``c H_n1(x1) H_n2(x2) exp(-1/2 x^T Q x + l^T x)`` with real ``Q`` and ``l``."""

    n1: int
    n2: int
    q: np.ndarray
    ell: np.ndarray
    c: complex = 1.0

    @property
    def normalizable(self) -> bool:
        return is_positive_definite(self.q)

    @property
    def degree(self) -> int:
        return self.n1 + self.n2


def phi_state(gamma: float, n1: int, n2: int, norm: float = N_DEFAULT) -> DeformedGaussianState:
    """``phi_{n1,n2}``; the Psi family is ``phi_state(-gamma, ...)``."""
    c = norm / math.sqrt(2.0 ** (n1 + n2) * math.factorial(n1) * math.factorial(n2))
    ell = math.sqrt(2.0) * gamma * np.ones(2)
    return DeformedGaussianState(n1, n2, deformation_form(gamma), ell, c)


def psi_state(gamma: float, n1: int, n2: int, norm: float = N_DEFAULT) -> DeformedGaussianState:
    return phi_state(-gamma, n1, n2, norm)


def phi_eval(state: DeformedGaussianState, x1, x2) -> np.ndarray:
    """Pointwise amplitude (evaluated even when not normalizable)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    q, ell = state.q, state.ell
    expo = -0.5 * (q[0, 0] * x1**2 + 2 * q[0, 1] * x1 * x2 + q[1, 1] * x2**2) + ell[0] * x1 + ell[1] * x2
    return state.c * hermite(state.n1, x1) * hermite(state.n2, x2) * np.exp(expo)


def multiplier_form(x) -> Tuple[float, np.ndarray, np.ndarray]:
    """Split a position-only real ``X`` as ``k + v.x + 1/2 x^T M x``.

    Raises ValueError when ``X`` contains momenta or complex coefficients,
    in which case ``e^{tX}`` is not a real Gaussian multiplier.
    """
    from pbl.opalg import to_phase_space

    k, v, m = 0.0, np.zeros(2), np.zeros((2, 2))
    for (a, b, c, d), coeff in to_phase_space(x).items():
        if b or d:
            raise ValueError("generator contains momenta; not a multiplication operator")
        if abs(coeff.imag) > 1e-14:
            raise ValueError("generator has complex coefficients")
        w = coeff.real
        if a + c == 0:
            k += w
        elif a + c == 1:
            v[0 if a else 1] += w
        elif a == 2:
            m[0, 0] += 2 * w
        elif c == 2:
            m[1, 1] += 2 * w
        else:
            m[0, 1] += w
            m[1, 0] += w
    return k, v, m


def apply_multiplier(state: DeformedGaussianState, x, t: float) -> DeformedGaussianState:
    """``e^{tX} state`` for a position-only quadratic ``X`` (exact)."""
    k, v, m = multiplier_form(x)
    return DeformedGaussianState(state.n1, state.n2, state.q - t * m, state.ell + t * v, state.c * math.exp(t * k))


def metric_image(x, gamma: float, indices: Sequence[Tuple[int, int]], n_max: int) -> np.ndarray:
    """Fock coefficients of ``e^{-2X} phi_n`` (rows), multiplier applied exactly.

    Only the final projection onto ``m_j <= n_max`` truncates; no truncated
    exponential of ``X`` is involved.
    """
    return np.array([fock_projection(apply_multiplier(phi_state(gamma, n1, n2), x, -2.0), n_max)
                     for n1, n2 in indices])


# -- quadrature -------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _gauss_hermite(m: int) -> Tuple[np.ndarray, np.ndarray]:
    return hermgauss(m)


def node_count(degree: int) -> int:
    """Nodes per axis for a polynomial prefactor of total ``degree``."""
    return max(MIN_NODES, degree // 2 + 4)


@dataclass(frozen=True, eq=False)
class GaussQuadPlan:
    """Tensor Gauss-Hermite rule for ``int p(x) exp(-x^T P x + L^T x) dx``.

    ``points`` has shape (2, m*m); ``weights`` already contains the
    Gaussian prefactor ``exp(mu^T P mu) / sqrt(det P)``. Exact for
    polynomials of total degree ``<= 2m - 1``.
    """

    m: int
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, p: np.ndarray, lin: np.ndarray, m: int) -> "GaussQuadPlan":
        p = np.asarray(p, dtype=float)
        lam, vec = np.linalg.eigh(p)
        if not lam.min() > 0:
            raise NotIntegrableError(
                f"combined quadratic form has eigenvalue {lam.min():.3e} <= 0; "
                "the integrand is not integrable (|gamma| >= 1/2 regime)"
            )
        mu = np.linalg.solve(p, np.asarray(lin, dtype=float)) / 2.0
        t, w = _gauss_hermite(m)
        y = np.stack(np.meshgrid(t, t, indexing="ij")).reshape(2, -1)
        points = vec @ (y / np.sqrt(lam)[:, None]) + mu[:, None]
        weights = np.outer(w, w).ravel() * math.exp(mu @ p @ mu) / math.sqrt(lam.prod())
        return cls(m, points, weights)


def _pair_plan(a: DeformedGaussianState, b: DeformedGaussianState, extra_degree: int = 0, m: int | None = None):
    p = (a.q + b.q) / 2.0
    lin = a.ell + b.ell
    if m is None:
        m = node_count(a.degree + b.degree + extra_degree)
    return GaussQuadPlan.build(p, lin, m)


def inner2d(a: DeformedGaussianState, b: DeformedGaussianState, m: int | None = None) -> complex:
    """``<a, b> = int conj(a) b`` over the plane, conjugate-linear in ``a``."""
    plan = _pair_plan(a, b, m=m)
    x1, x2 = plan.points
    poly = hermite(a.n1, x1) * hermite(a.n2, x2) * hermite(b.n1, x1) * hermite(b.n2, x2)
    return complex(np.conj(a.c) * b.c * np.dot(plan.weights, poly))


def gram2d(bra: Sequence[DeformedGaussianState], ket: Sequence[DeformedGaussianState]) -> np.ndarray:
    return np.array([[inner2d(a, b) for b in ket] for a in bra])


def fock_projection(state: DeformedGaussianState, n_max: int) -> np.ndarray:
    """Coefficients ``<Phi_{m1,m2}, state>`` for ``m_j <= n_max`` (mode-1 major).

    Exact for the truncated coefficients; the tail beyond ``n_max`` is
    simply dropped.
    """
    ground = phi_state(0.0, 0, 0)
    plan = _pair_plan(ground, state, extra_degree=2 * n_max)
    x1, x2 = plan.points
    size = n_max + 1
    scale = np.array([1.0 / math.sqrt(2.0**k * math.factorial(k)) for k in range(size)]) * math.pi**-0.25
    h1 = kernels.hermite_table(n_max, x1) * scale[:, None]
    h2 = kernels.hermite_table(n_max, x2) * scale[:, None]
    f = plan.weights * state.c * hermite(state.n1, x1) * hermite(state.n2, x2)
    return np.einsum("ik,jk,k->ij", h1, h2, f).reshape(-1).astype(complex)


# -- norm growth ----------------------------------------------------------------------------


def laguerre_bound(gamma: float, n: int) -> float:
    """``pi exp(4 g^2 / (1 - 2 g)) L_n(-(2 g / (1 - 2 g))^2)``."""
    r = 2.0 * gamma / (1.0 - 2.0 * gamma)
    return math.pi * math.exp(4.0 * gamma**2 / (1.0 - 2.0 * gamma)) * laguerre(n, -(r**2))


def ground_norm(gamma: float) -> float:
    """Closed form of ``I_0``."""
    return math.pi * math.exp(4.0 * gamma**2 / (1.0 - 2.0 * gamma)) / math.sqrt(1.0 - 4.0 * gamma**2)


@dataclass(frozen=True)
class NormEstimate:
    n: int
    gamma: float
    i_n: float
    lower_bound: float
    s0: float
    symmetric_bound: float | None = None

    @property
    def ratio(self) -> float:
        return self.i_n / self.lower_bound

    @property
    def holds(self) -> bool:
        return self.i_n >= self.lower_bound


def norm_growth(gamma: float, ns: Iterable[int]) -> List[NormEstimate]:
    """``I_n = ||phi_{n,0}||^2 / N^2`` next to its Laguerre lower bound.

    For negative ``gamma`` the bound is also evaluated at ``|gamma|`` and
    reported as ``symmetric_bound``. At ``gamma = 0`` both sides equal pi.
    """
    if not abs(gamma) < 0.5:
        raise ValueError("norm_growth needs |gamma| < 1/2")
    out = []
    for n in ns:
        state = phi_state(gamma, n, 0)
        i_n = inner2d(state, state).real / N_DEFAULT**2
        sym = laguerre_bound(abs(gamma), n) if gamma < 0 else None
        s0 = math.sqrt(2.0) * gamma / (1.0 - 2.0 * gamma)
        out.append(NormEstimate(n, gamma, i_n, laguerre_bound(gamma, n), s0, sym))
    return out


def norms_csv(rows: Sequence[NormEstimate]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "gamma", "I_n", "lower_bound", "ratio", "symmetric_bound"])
    for r in rows:
        writer.writerow([r.n, r.gamma, repr(r.i_n), repr(r.lower_bound), repr(r.ratio),
                         "" if r.symmetric_bound is None else repr(r.symmetric_bound)])
    return buf.getvalue()
