"""Truncated two-mode Fock space.

States ``|n1, n2>`` with ``0 <= n_j <= n_max`` are indexed mode-1 major,
``index = n1 * (n_max + 1) + n2``. Normal-ordered monomials are built as
exact compressions of the infinite-dimensional operators, so commutators of
matrices agree with matrices of commutators away from the cutoff edge.
All finite-dimensional statements here are surrogates for the operator
identities; every check restricts its assertions to an interior index
range and reports truncation diagnostics alongside residuals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from pbl import kernels
from pbl.deform import H0Spec
from pbl.opalg import OperatorPoly, adjoint

DEFAULT_NMAX = 16


class TruncationWarning(UserWarning):
    """Amplitude reached the cutoff edge; interior results may be polluted."""


class VacuumError(ValueError):
    """No normalizable common null vector at this truncation."""


class FockRep:
    """Truncated Fock space with per-mode cutoff ``n_max``."""

    def __init__(self, n_max: int = DEFAULT_NMAX):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.n_max = int(n_max)
        self.size = self.n_max + 1
        self.dim = self.size**2
        grid = np.arange(self.dim)
        self.n1 = grid // self.size
        self.n2 = grid % self.size
        self._cache: Dict[OperatorPoly, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"FockRep(n_max={self.n_max})"

    def index(self, n1: int, n2: int) -> int:
        if not (0 <= n1 <= self.n_max and 0 <= n2 <= self.n_max):
            raise IndexError(f"|{n1},{n2}> outside the truncation")
        return n1 * self.size + n2

    def basis(self, n1: int, n2: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(n1, n2)] = 1.0
        return v

    def interior(self, margin: int = 1) -> np.ndarray:
        """Mask of states with ``n_j <= n_max - margin``."""
        return (self.n1 <= self.n_max - margin) & (self.n2 <= self.n_max - margin)

    def edge_weight(self, v: np.ndarray) -> float:
        """Norm of the component on the outermost layer (``n1`` or ``n2`` = ``n_max``)."""
        edge = (self.n1 == self.n_max) | (self.n2 == self.n_max)
        return float(np.linalg.norm(v[edge]))

    def matrix(self, poly: OperatorPoly) -> np.ndarray:
        """Dense matrix of ``poly`` (cached; treat the result as read-only)."""
        m = self._cache.get(poly)
        if m is None:
            if poly.degree > 2:
                raise ValueError("only degree <= 2 operators are represented")
            if poly:
                keys, coeffs = zip(*poly.coeffs.items())
            else:
                keys, coeffs = [], []
            m = kernels.fock_poly_matrix(self.n_max, np.array(keys, dtype=np.int64).reshape(-1, 4), np.array(coeffs, dtype=complex))
            m.setflags(write=False)
            self._cache[poly] = m
        return m

    def expm(self, poly: OperatorPoly, t: complex = 1.0) -> np.ndarray:
        """``exp(t * matrix(poly))`` by scaling and squaring (Pade).

        Decoupled blocks (e.g. fixed total number when ``poly`` conserves
        it) are exponentiated separately, so large high-occupation blocks do
        not pollute small ones through a shared scaling.
        """
        m = t * self.matrix(poly)
        count, labels = connected_components(scipy.sparse.csr_matrix(m != 0), directed=False)
        if count == 1:
            return scipy.linalg.expm(m)
        out = np.zeros_like(m)
        for c in range(count):
            idx = np.flatnonzero(labels == c)
            out[np.ix_(idx, idx)] = scipy.linalg.expm(m[np.ix_(idx, idx)])
        return out


def build_matrix(rep: FockRep, poly: OperatorPoly) -> np.ndarray:
    return rep.matrix(poly)


# -- spectrum ----------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeMatch:
    n1: int
    n2: int
    target: float
    found: complex

    @property
    def abs_err(self) -> float:
        return abs(self.found - self.target)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    matches: Tuple[LatticeMatch, ...]
    k_interior: int

    @property
    def max_error(self) -> float:
        return max((m.abs_err for m in self.matches), default=0.0)

    @property
    def max_imag(self) -> float:
        return max((abs(m.found.imag) for m in self.matches), default=0.0)

    def rows(self) -> List[dict]:
        return [
            {
                "n1": m.n1,
                "n2": m.n2,
                "target": m.target,
                "found_re": m.found.real,
                "found_im": m.found.imag,
                "abs_err": m.abs_err,
            }
            for m in self.matches
        ]


def sort_spectrum(values: np.ndarray, vectors: np.ndarray | None = None):
    order = np.lexsort((values.imag, values.real))
    if vectors is None:
        return values[order]
    return values[order], vectors[:, order]


def match_lattice(eigenvalues: np.ndarray, h0: H0Spec, k_interior: int) -> Tuple[LatticeMatch, ...]:
    """Greedy nearest matching of eigenvalues to ``w1 n1 + w2 n2 + w3``.

    Globally closest pairs are fixed first and each eigenvalue and lattice
    point is used once; ties go to the earlier eigenvalue in (Re, Im) order
    and then to the lattice point with smaller ``(n1 + n2, n1)``.
    """
    points = [(n1, t - n1) for t in range(k_interior + 1) for n1 in range(t, -1, -1)]
    points.sort(key=lambda p: (p[0] + p[1], -p[0]))
    targets = np.array([h0.energy(*p) for p in points])
    dist = np.abs(eigenvalues[:, None] - targets[None, :])
    flat = np.lexsort((np.tile(np.arange(len(points)), len(eigenvalues)),
                       np.repeat(np.arange(len(eigenvalues)), len(points)),
                       dist.ravel()))
    used_e, used_p = set(), set()
    found: Dict[int, int] = {}
    for f in flat:
        e, p = divmod(int(f), len(points))
        if e in used_e or p in used_p:
            continue
        used_e.add(e)
        used_p.add(p)
        found[p] = e
        if len(found) == len(points):
            break
    return tuple(
        LatticeMatch(points[p][0], points[p][1], float(targets[p]), complex(eigenvalues[found[p]]))
        for p in range(len(points))
        if p in found
    )


def spectrum(rep: FockRep, h: OperatorPoly, h0: H0Spec, k_interior: int) -> SpectrumResult:
    """Dense non-symmetric eigendecomposition plus the lattice match table."""
    if k_interior > rep.n_max / 2:
        raise ValueError("k_interior must be <= n_max/2 to stay clear of the cutoff")
    try:
        values, vectors = scipy.linalg.eig(rep.matrix(h))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed: {exc}") from exc
    values, vectors = sort_spectrum(values, vectors)
    return SpectrumResult(values, vectors, match_lattice(values, h0, k_interior), k_interior)


# -- vacua and families --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Vacuum:
    vector: np.ndarray
    residual: float
    edge: float


def _fix_phase(rep: FockRep, v: np.ndarray) -> np.ndarray:
    ref = v[rep.index(0, 0)]
    if abs(ref) < 1e-8:
        ref = v[np.argmax(np.abs(v))]
    return v * (abs(ref) / ref)


def _null_vector(m: np.ndarray) -> np.ndarray:
    """A unit null vector of a wide matrix."""
    _, _, vh = np.linalg.svd(m, full_matrices=True)
    return vh[-1].conj()


def vacuum(rep: FockRep, a1: OperatorPoly, a2: OperatorPoly, tol: float = 1e-6) -> Vacuum:
    """Unit vector minimizing ``||a1 v||^2 + ||a2 v||^2`` over ``n_j < n_max``.

    Restricting to ``n_j < n_max`` keeps ``a_j v`` exact for affine-linear
    ``a_j``, so the residual is a true residual rather than a truncation
    artifact. Raises :class:`VacuumError` when it exceeds ``tol``.

    Columns that share no rows are solved separately, so a vacuum living in
    one decoupled sector carries exact zeros elsewhere instead of rounding
    noise (which an unbounded metric would later amplify).
    """
    for op in (a1, a2):
        if op.degree > 1:
            raise ValueError("vacuum() needs affine-linear operators")
    cols = np.flatnonzero(rep.interior(1))
    stacked = np.vstack([rep.matrix(a1)[:, cols], rep.matrix(a2)[:, cols]])
    pattern = scipy.sparse.csr_matrix(stacked != 0)
    count, labels = connected_components(pattern.T @ pattern, directed=False)
    residual, best = math.inf, None
    for c in range(count):
        sub = np.flatnonzero(labels == c)
        _, sing, vh = np.linalg.svd(stacked[:, sub], full_matrices=False)
        smallest = float(sing[-1]) if sing.size == sub.size else 0.0
        if smallest < residual:
            residual = smallest
            vec = vh[-1].conj() if sing.size == sub.size else _null_vector(stacked[:, sub])
            best = (sub, vec)
    sub, vec = best
    v = np.zeros(rep.dim, dtype=complex)
    v[cols[sub]] = vec
    v = _fix_phase(rep, v)
    if not residual <= tol:
        raise VacuumError(
            f"smallest singular value {residual:.3e} exceeds {tol:.1e}: no normalizable vacuum "
            f"at n_max={rep.n_max} (parameters outside the normalizable range or truncation too small)"
        )
    return Vacuum(v, residual, rep.edge_weight(v))


def family_indices(k: int) -> List[Tuple[int, int]]:
    """``(n1, n2)`` with ``n1 + n2 <= k``, by total then descending ``n1``."""
    return [(n1, t - n1) for t in range(k + 1) for n1 in range(t, -1, -1)]


@dataclass(frozen=True, eq=False)
class Family:
    indices: Tuple[Tuple[int, int], ...]
    vectors: np.ndarray  # shape (len(indices), dim)
    leakage: float

    def __getitem__(self, nn: Tuple[int, int]) -> np.ndarray:
        return self.vectors[self.indices.index(tuple(nn))]

    def __len__(self) -> int:
        return len(self.indices)


def raise_family(
    rep: FockRep, r1: OperatorPoly, r2: OperatorPoly, vac: np.ndarray, k: int, leak_tol: float = 1e-8
) -> Family:
    """``r1^n1 r2^n2 vac / sqrt(n1! n2!)`` for ``n1 + n2 <= k``.

    With ``(r1, r2) = (b1, b2)`` this is the phi family; with
    ``(a1^dag, a2^dag)`` and the ``b^dag`` vacuum it is the Psi family.
    ``leakage`` is the largest edge-layer norm met before a raising step,
    relative to the vector norm.
    """
    if k > rep.n_max / 2:
        raise ValueError("k must be <= n_max/2")
    m1, m2 = rep.matrix(r1), rep.matrix(r2)
    vecs: Dict[Tuple[int, int], np.ndarray] = {(0, 0): np.asarray(vac, dtype=complex)}
    leak = 0.0

    def step(m, v, n):
        nonlocal leak
        leak = max(leak, rep.edge_weight(v) / max(np.linalg.norm(v), 1e-300))
        return m @ v / math.sqrt(n)

    for n2 in range(1, k + 1):
        vecs[(0, n2)] = step(m2, vecs[(0, n2 - 1)], n2)
    for n2 in range(k + 1):
        for n1 in range(1, k - n2 + 1):
            vecs[(n1, n2)] = step(m1, vecs[(n1 - 1, n2)], n1)
    indices = family_indices(k)
    if leak > leak_tol:
        warnings.warn(f"edge leakage {leak:.2e} > {leak_tol:.0e} at n_max={rep.n_max}", TruncationWarning, stacklevel=2)
    return Family(tuple(indices), np.array([vecs[i] for i in indices]), leak)


def raise_mode(rep: FockRep, r: OperatorPoly, vac: np.ndarray, n: int) -> np.ndarray:
    """Rows ``r^k vac / sqrt(k!)`` for ``k = 0..n`` (no pollution guard)."""
    m = rep.matrix(r)
    out = [np.asarray(vac, dtype=complex)]
    for k in range(1, n + 1):
        out.append(m @ out[-1] / math.sqrt(k))
    return np.array(out)


@dataclass(frozen=True, eq=False)
class Biorthogonal:
    phi: Family
    psi: Family
    phi_vacuum: Vacuum
    psi_vacuum: Vacuum


def biorthogonal_families(
    rep: FockRep,
    a1: OperatorPoly,
    a2: OperatorPoly,
    b1: OperatorPoly,
    b2: OperatorPoly,
    k: int,
    vacuum_tol: float = 1e-6,
) -> Biorthogonal:
    """phi and Psi families with ``<phi_00, Psi_00> = 1`` and unit ``phi_00``."""
    phi_vac = vacuum(rep, a1, a2, vacuum_tol)
    psi_vac = vacuum(rep, adjoint(b1), adjoint(b2), vacuum_tol)
    overlap = np.vdot(phi_vac.vector, psi_vac.vector)
    if abs(overlap) < 1e-12:
        raise VacuumError("vacua are orthogonal; cannot normalize the biorthogonal pair")
    psi0 = psi_vac.vector / overlap.conjugate()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        phi = raise_family(rep, b1, b2, phi_vac.vector, k)
        psi = raise_family(rep, adjoint(a1), adjoint(a2), psi0, k)
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    return Biorthogonal(phi, psi, phi_vac, Vacuum(psi0, psi_vac.residual, psi_vac.edge))


def biorth_gram(phi: Family, psi: Family) -> np.ndarray:
    """``G[n, m] = <phi_n, Psi_m>``, conjugate-linear in the first slot."""
    if phi.indices != psi.indices:
        raise ValueError("families must share the index set")
    return phi.vectors.conj() @ psi.vectors.T


# -- closed forms for the number-conserving model -------------------------------------


def xi(a: int, b: int, c: int, d: int) -> float:
    """``sqrt((a+b-c-d)! (c+d)! / (a! b!))``."""
    return math.sqrt(math.factorial(a + b - c - d) * math.factorial(c + d) / (math.factorial(a) * math.factorial(b)))


def model2_coefficients(rep: FockRep, n1: int, n2: int, gamma: float, kind: str = "phi") -> np.ndarray:
    """Double binomial sum for phi_{n1,n2} (or Psi with ``kind="psi"``) of the second model."""
    if n1 + n2 > rep.n_max:
        raise ValueError("n1 + n2 must be <= n_max")
    c, s = complex(math.cosh(gamma)), complex(math.sinh(gamma))
    if kind == "psi":
        c, s = c.conjugate(), -s.conjugate()
    elif kind != "phi":
        raise ValueError("kind must be 'phi' or 'psi'")
    v = np.zeros(rep.dim, dtype=complex)
    for k in range(n1 + 1):
        for j in range(n2 + 1):
            coeff = math.comb(n1, k) * math.comb(n2, j) * c ** (n1 + j - k) * s ** (n2 + k - j) * xi(n1, n2, j, k)
            v[rep.index(n1 + n2 - j - k, j + k)] += coeff
    return v


def summation_rule(m1: int, m2: int, n1: int, n2: int, gamma: float) -> float:
    """Direct quadruple-sum evaluation of ``<Psi_{m1,m2}, phi_{n1,n2}>`` (second model)."""
    return kernels.summation_rule(m1, m2, n1, n2, math.cosh(gamma), math.sinh(gamma))


# -- metric, intertwining, quasi-basis ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ThetaReport:
    indices: Tuple[Tuple[int, int], ...]
    residuals: np.ndarray
    scale: float
    min_rayleigh: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max(initial=0.0))


def metric_matrix(rep: FockRep, x: OperatorPoly) -> np.ndarray:
    """Truncated ``Theta = exp(-2X)``."""
    theta = rep.expm(x, -2.0)
    if not np.all(np.isfinite(theta)):
        raise OverflowError("exp(-2X) overflowed at this truncation")
    return theta


def theta_check(
    rep: FockRep,
    x: OperatorPoly,
    phi: Family,
    psi: Family,
    theta: np.ndarray | None = None,
    theta_phi: np.ndarray | None = None,
) -> ThetaReport:
    """Residuals ``||Psi_n - Theta phi_n||`` after fixing the vacuum scale.

    The families are defined up to ``phi -> l phi``, ``Psi -> Psi / l``; the
    real ``l`` is chosen so that ``Psi_00 = Theta phi_00`` holds best, which
    is the normalization ``phi_00 = e^X Phi_00``. ``min_rayleigh`` is the
    smallest eigenvalue of the Hermitian part of ``Theta`` on the interior
    block (a positivity diagnostic only).

    ``theta_phi`` supplies the rows ``Theta phi_n`` directly (for instance
    from an exact real-space multiplication, see
    :func:`pbl.waves.metric_image`); the truncated ``e^{-2X}`` is then not
    formed and ``min_rayleigh`` is NaN.
    """
    if theta_phi is not None:
        tphi = np.asarray(theta_phi)
    else:
        if theta is None:
            theta = metric_matrix(rep, x)
        tphi = phi.vectors @ theta.T
    t0, p0 = tphi[0], psi.vectors[0]
    # Psi_00 ~ c Theta phi_00; phi -> l phi, Psi -> Psi / l with l^2 = c
    c = np.vdot(t0, p0) / np.vdot(t0, t0)
    scale = math.sqrt(abs(c.real)) if c.real != 0 else 1.0
    residuals = np.linalg.norm(psi.vectors / scale - tphi * scale, axis=1)
    if theta is None:
        return ThetaReport(phi.indices, residuals, scale, math.nan)
    block = rep.interior(rep.n_max // 2)
    sub = theta[np.ix_(block, block)]
    min_rayleigh = float(np.linalg.eigvalsh((sub + sub.conj().T) / 2).min())
    return ThetaReport(phi.indices, residuals, scale, min_rayleigh)


@dataclass(frozen=True, eq=False)
class IntertwineReport:
    indices: Tuple[Tuple[int, int], ...]
    residuals: np.ndarray  # shape (len(indices), 2): modes 1 and 2

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max(initial=0.0))


def intertwine_check(
    rep: FockRep,
    x: OperatorPoly,
    numbers: Sequence[OperatorPoly],
    phi: Family,
    theta: np.ndarray | None = None,
) -> IntertwineReport:
    """``||N_j^dag Theta phi_n - Theta N_j phi_n||`` per index and mode."""
    if theta is None:
        theta = metric_matrix(rep, x)
    out = np.zeros((len(phi), len(numbers)))
    for j, n in enumerate(numbers):
        nm = rep.matrix(n)
        ndag = rep.matrix(adjoint(n))
        lhs = (ndag @ theta @ phi.vectors.T).T
        rhs = (theta @ nm @ phi.vectors.T).T
        out[:, j] = np.linalg.norm(lhs - rhs, axis=1)
    return IntertwineReport(phi.indices, out)


@dataclass(frozen=True, eq=False)
class QuasiBasisResult:
    partial_sums: np.ndarray  # S_K for K = 0..k_max
    target: complex

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.partial_sums - self.target)

    def first_within(self, tol: float) -> int | None:
        hits = np.flatnonzero(self.errors <= tol)
        return int(hits[0]) if hits.size else None


def quasi_basis_sum(phi: Family, psi: Family, f: np.ndarray, g: np.ndarray, k_max: int | None = None) -> QuasiBasisResult:
    """Partial sums ``S_K = sum_{n1+n2<=K} <f, phi_n> <Psi_n, g>``."""
    totals = np.array([a + b for a, b in phi.indices])
    k_max = int(totals.max()) if k_max is None else k_max
    terms = (phi.vectors.conj() @ f).conj() * (psi.vectors.conj() @ g)
    sums = np.array([terms[totals <= k].sum() for k in range(k_max + 1)])
    return QuasiBasisResult(sums, complex(np.vdot(f, g)))
