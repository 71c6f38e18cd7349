"""Check battery for one catalog entry at one parameter point.

Checks are grouped as

* algebraic: exact up to rounding, tolerance ``tol_alg``;
* fock: truncated Fock-space surrogates, tolerance ``tol_num``;
* realspace: Gaussian quadrature for the position-deformed model;
* closed-form: identities specific to the number-conserving model.

Hard checks decide the overall verdict. Soft checks are reported only:
diffs of listed-only entries, spectra of entries without a generator, the
metric positivity diagnostic, and Fock checks for generators that do not
conserve the total number of quanta (there the truncation error is not
controlled by the cutoff alone).
"""

from __future__ import annotations

import json
import math
import platform
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np
import scipy

from pbl import __version__, fockrep, kernels, oracles, waves
from pbl.deform import (
    H0Spec,
    conserves_number,
    deform_hamiltonian,
    exp_map,
    number_operators,
    pseudo_boson_check,
)
from pbl.models import (
    CatalogError,
    ModelInstance,
    SingularParameterError,
    compare,
    exchange_symmetry_check,
    get_spec,
    instantiate,
)
from pbl.opalg import adjoint

SCHEMA = "pbl-report/1"
SUMMATION_TOL = 1e-12


@dataclass(frozen=True)
class VerifyConfig:
    n_max: int = fockrep.DEFAULT_NMAX
    k_spectrum: int = 4
    k_family: int = 3
    n_norms: int = 15
    quad_order: Optional[int] = None
    tol_alg: float = 1e-10
    tol_num: float = 1e-6
    seed: int = 0
    h0: Optional[H0Spec] = None

    def stamp(self) -> dict:
        d = asdict(self)
        d["h0"] = None if self.h0 is None else [self.h0.w1, self.h0.w2, self.h0.w3]
        return d


@dataclass
class CheckResult:
    name: str
    category: str
    hard: bool
    status: str  # "pass" | "fail" | "skipped"
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    details: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "category": self.category,
            "hard": self.hard,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "details": self.details,
            "runtime": self.runtime,
        }


@dataclass
class VerificationReport:
    model: str
    kind: str
    params: Dict[str, float]
    checks: List[CheckResult]
    environment: dict

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks if c.hard)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self, runtime: bool = True) -> dict:
        checks = [c.to_json() for c in self.checks]
        if not runtime:
            for c in checks:
                c.pop("runtime")
        return {
            "schema": SCHEMA,
            "model": self.model,
            "kind": self.kind,
            "params": self.params,
            "overall_pass": self.passed,
            "checks": checks,
            "environment": self.environment,
        }

    def dumps(self, runtime: bool = True) -> str:
        return json.dumps(self.to_json(runtime), indent=2, sort_keys=False, default=_json_default)

    def table(self) -> str:
        lines = [f"{self.model} {self.params}  overall: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            res = "-" if c.residual is None else f"{c.residual:.2e}"
            tol = "-" if c.tolerance is None else f"{c.tolerance:.0e}"
            kind = "hard" if c.hard else "soft"
            lines.append(f"  {c.status:7s} {kind} {c.category:11s} {c.name:28s} {res:>9s} / {tol}")
            note = c.details.get("note")
            if note and c.status != "pass":
                lines.append(f"          {note}")
        return "\n".join(lines)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj)!r}")


class _Skip(Exception):
    pass


class _Suite:
    """Runs checks in order; a raised exception fails only that check."""

    def __init__(self):
        self.results: List[CheckResult] = []

    def run(self, name: str, category: str, hard: bool, tol: Optional[float], fn: Callable[[], tuple]):
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                residual, details = fn()
            if caught:
                details = {**details, "warnings": sorted({str(w.message) for w in caught})}
            if isinstance(residual, bool):
                ok, residual = residual, None
            else:
                residual = float(residual)
                ok = residual <= tol
            status = "pass" if ok else "fail"
        except _Skip as skip:
            residual, status, details = None, "skipped", {"note": str(skip)}
        except Exception as exc:  # isolation: one failure must not abort the suite
            residual, status, details = None, "fail", {"note": f"{type(exc).__name__}: {exc}"}
        self.results.append(
            CheckResult(name, category, hard, status, residual, tol, details, time.perf_counter() - t0)
        )
        return self.results[-1]


def _rep_cache():
    cache: Dict[int, fockrep.FockRep] = {}

    def get(n: int) -> fockrep.FockRep:
        if n not in cache:
            cache[n] = fockrep.FockRep(n)
        return cache[n]

    return get


def environment(config: VerifyConfig) -> dict:
    return {
        "pbl": __version__,
        "backend": kernels.BACKEND,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "config": config.stamp(),
        "quadrature": {
            "min_nodes": waves.MIN_NODES,
            "policy": "max(min_nodes, degree // 2 + 4)" if config.quad_order is None else config.quad_order,
        },
    }


def run_suite(model_id: str, params: Optional[Mapping[str, float]] = None, config: VerifyConfig = VerifyConfig()) -> VerificationReport:
    """Run every applicable check; never raises for check failures.

    ``params=None`` draws an in-range point from ``config.seed``.
    """
    suite = _Suite()
    env = environment(config)
    try:
        spec = get_spec(model_id)
    except CatalogError as exc:
        suite.results.append(CheckResult("setup", "setup", True, "fail", details={"note": str(exc)}))
        return VerificationReport(model_id, "unknown", dict(params or {}), suite.results, env)

    if params is None:
        params = spec.draw(np.random.default_rng(config.seed))
        env["drawn_with_seed"] = config.seed
    params = {k: float(v) for k, v in params.items()}

    state: dict = {}

    def setup():
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                inst = instantiate(model_id, params, config.h0, printed=True)
                details = {}
            except SingularParameterError as exc:
                inst = instantiate(model_id, params, config.h0, printed=False)
                details = {"note": f"engine only: {exc}"}
        state["inst"] = inst
        details["h0"] = [inst.h0.w1, inst.h0.w2, inst.h0.w3]
        if caught:
            details["range_warnings"] = [str(w.message) for w in caught]
        return True, details

    if not suite.run("setup", "setup", True, None, setup).passed:
        return VerificationReport(model_id, spec.kind, params, suite.results, env)

    inst: ModelInstance = state["inst"]
    if inst.x is None:
        _h_only_checks(suite, inst, config, _rep_cache())
    else:
        _generator_checks(suite, inst, config, _rep_cache())
    return VerificationReport(model_id, spec.kind, params, suite.results, env)


# -- checks for entries with a generator ----------------------------------------------------


def _generator_checks(suite: _Suite, inst: ModelInstance, config: VerifyConfig, rep_for) -> None:
    spec, x, h0 = inst.spec, inst.x, inst.h0
    state: dict = {}
    tol_a, tol_n = config.tol_alg, config.tol_num
    lmap = exp_map(x)
    ladders = lmap.ladders()
    a1, a2, b1, b2 = ladders
    conserving = conserves_number(x)
    truncation_note = (
        "" if conserving else "generator mixes quanta numbers; truncated-space result is a soft diagnostic"
    )

    suite.run("pseudo_boson", "algebraic", True, tol_a,
              lambda: (pseudo_boson_check(*ladders).max, {}))
    suite.run("symplectic", "algebraic", True, tol_a,
              lambda: (lmap.symplectic_residual(), {}))

    def bch():
        ref = oracles.bch_ladders(x)
        return max(p.distance(q) for p, q in zip(ladders, ref)), {"order": oracles.BCH_ORDER,
                                                               "ad_norm": float(np.linalg.norm(lmap.matrix - np.eye(5)))}

    suite.run("bch_oracle", "algebraic", True, tol_a, bch)

    def printed():
        if inst.h_printed is None:
            raise _Skip("printed Hamiltonian not instantiable at these parameters")
        rep = compare(spec.id, inst.params, h0, tol=tol_a)
        details = {"max_delta": rep.max_delta,
                   "mismatches": [{"monomial": m.monomial, "printed": m.printed, "engine": m.engine}
                                  for m in rep.mismatches()]}
        if rep.mismatches():
            details["note"] = "printed and engine Hamiltonians differ in " + ", ".join(
                m.monomial for m in rep.mismatches())
        return rep.max_delta, details

    suite.run("printed_hamiltonian", "algebraic", spec.kind == "derived-in-text", tol_a, printed)

    def exchange():
        res = exchange_symmetry_check(spec.id, inst.params, tol=tol_a)
        details = {"symmetric": res.symmetric, "catalog_flag": res.catalog_claim,
                   "swapped_pseudo_boson": res.swapped_residual}
        ok = res.swapped_residual <= tol_a and (res.catalog_claim is None or res.catalog_claim == res.symmetric)
        if not ok:
            details["note"] = "exchange symmetry differs from the catalog flag"
        return ok, details

    suite.run("exchange_symmetry", "algebraic", True, tol_a, exchange)

    rep = rep_for(config.n_max)

    def interior_commutation():
        mats = [rep.matrix(op) for op in ladders]
        inner = rep.interior(2)
        eye = np.eye(rep.dim)
        worst = 0.0
        for j in range(2):
            for k in range(2):
                c = mats[j] @ mats[2 + k] - mats[2 + k] @ mats[j]
                target = eye if j == k else 0.0 * eye
                worst = max(worst, float(np.abs((c - target)[np.ix_(inner, inner)]).max()))
        return worst, {}

    suite.run("interior_commutation", "fock", True, tol_a, interior_commutation)

    def spectrum():
        h = deform_hamiltonian(x, h0)
        res = fockrep.spectrum(rep, h, h0, config.k_spectrum)
        worst = max(res.max_error, res.max_imag)
        details = {"k_interior": config.k_spectrum, "max_abs_err": res.max_error, "max_imag": res.max_imag}
        if truncation_note:
            details["note"] = truncation_note
        return worst, details

    suite.run("spectrum_lattice", "fock", conserving, tol_n, spectrum)

    def families():
        bo = fockrep.biorthogonal_families(rep, a1, a2, b1, b2, config.k_family)
        state["bo"] = bo
        gram = fockrep.biorth_gram(bo.phi, bo.psi)
        err = float(np.abs(gram - np.eye(len(gram))).max())
        details = {"vacuum_residual": bo.phi_vacuum.residual, "dual_vacuum_residual": bo.psi_vacuum.residual,
                   "leakage": max(bo.phi.leakage, bo.psi.leakage), "k": config.k_family}
        if truncation_note:
            details["note"] = truncation_note
        return err, details

    fam = suite.run("biorthogonality", "fock", conserving, tol_n, families)

    def need_families():
        if "bo" not in state:
            raise _Skip("no biorthogonal families (see biorthogonality)")
        return state["bo"]

    def ladder_actions():
        bo = need_families()
        worst = 0.0
        for (n1, n2), v in zip(bo.phi.indices, bo.phi.vectors):
            for j, a in enumerate((a1, a2)):
                n = (n1, n2)[j]
                lhs = rep.matrix(a) @ v
                if n == 0:
                    rhs = 0
                else:
                    lower = (n1 - 1, n2) if j == 0 else (n1, n2 - 1)
                    rhs = math.sqrt(n) * bo.phi[lower]
                worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        return worst, {"note": truncation_note} if truncation_note else {}

    suite.run("ladder_actions", "fock", conserving, tol_n, ladder_actions)

    def theta():
        bo = need_families()
        th = fockrep.metric_matrix(rep, x)
        state["theta"] = th
        r = fockrep.theta_check(rep, x, bo.phi, bo.psi, theta=th)
        state["theta_report"] = r
        details = {"scale": r.scale}
        if truncation_note:
            details["note"] = truncation_note + " (exp(-2X) is unbounded)"
        return r.max_residual, details

    suite.run("metric_relation", "fock", conserving, tol_n, theta)

    def intertwining():
        bo = need_families()
        if "theta" not in state:
            raise _Skip("metric not available")
        r = fockrep.intertwine_check(rep, x, number_operators(*ladders), bo.phi, theta=state["theta"])
        return r.max_residual, {"note": truncation_note} if truncation_note else {}

    suite.run("intertwining", "fock", conserving, tol_n, intertwining)

    def positivity():
        if "theta_report" not in state:
            raise _Skip("metric not available")
        value = state["theta_report"].min_rayleigh
        return value > 0, {"min_rayleigh": value, "note": "interior compression of exp(-2X); diagnostic only"}

    suite.run("metric_positivity", "diagnostic", False, None, positivity)

    def quasi_basis():
        bo = need_families()
        targets = [(j, t - j) for t in range(3) for j in range(t, -1, -1)]
        worst_final, reached = 0.0, []
        for f_idx in targets:
            for g_idx in targets:
                res = fockrep.quasi_basis_sum(bo.phi, bo.psi, rep.basis(*f_idx), rep.basis(*g_idx))
                worst_final = max(worst_final, float(res.errors[-1]))
                reached.append(res.first_within(tol_n))
        details = {"k_max": config.k_family,
                   "first_k_within_tol": None if None in reached else max(reached)}
        if truncation_note:
            details["note"] = truncation_note
        return worst_final, details

    suite.run("quasi_basis", "fock", conserving, tol_n, quasi_basis)

    if spec.closed_forms == "two-mode":
        _two_mode_checks(suite, inst, config, rep, ladders)
    elif spec.closed_forms == "gaussian":
        _gaussian_checks(suite, inst, config, rep, ladders, state)


def _two_mode_checks(suite: _Suite, inst: ModelInstance, config: VerifyConfig, rep, ladders) -> None:
    gamma = inst.params["gamma"]
    a1, a2, b1, b2 = ladders
    n_top = min(12, rep.n_max)

    def norm_identity():
        vac = fockrep.vacuum(rep, a1, a2, config.tol_num).vector
        vecs = fockrep.raise_mode(rep, b1, vac, n_top)
        norms = np.linalg.norm(vecs, axis=1) ** 2
        target = np.cosh(2 * gamma) ** np.arange(n_top + 1)
        rel = float(np.max(np.abs(norms - target) / target))
        monotone = bool(np.all(np.diff(norms) > 0)) if gamma != 0 else True
        details = {"n_max_index": n_top, "monotone": monotone}
        if not monotone:
            details["note"] = "norms not strictly increasing"
            return math.inf, details
        return rel, details

    suite.run("norm_identity", "closed-form", True, config.tol_alg, norm_identity)

    def coefficients():
        vac = fockrep.vacuum(rep, a1, a2, config.tol_num).vector
        k = config.k_family
        fam = fockrep.raise_family(rep, b1, b2, vac, k)
        worst = 0.0
        dual = fockrep.vacuum(rep, adjoint(b1), adjoint(b2), config.tol_num).vector
        dual = dual / np.vdot(vac, dual).conjugate()
        psi = fockrep.raise_family(rep, adjoint(a1), adjoint(a2), dual, k)
        for kind, family in (("phi", fam), ("psi", psi)):
            for (n1, n2), v in zip(family.indices, family.vectors):
                ref = fockrep.model2_coefficients(rep, n1, n2, gamma, kind)
                worst = max(worst, float(np.abs(v - ref).max()))
        return worst, {"k": k}

    suite.run("closed_form_coefficients", "closed-form", True, config.tol_alg, coefficients)

    def summation():
        c, s = math.cosh(gamma), math.sinh(gamma)
        worst = 0.0
        top = 6
        for m1 in range(top + 1):
            for m2 in range(top + 1):
                for n1 in range(top + 1):
                    n2 = m1 + m2 - n1
                    if not 0 <= n2 <= top:
                        continue
                    value = kernels.summation_rule(m1, m2, n1, n2, c, s)
                    worst = max(worst, abs(value - float(m1 == n1 and m2 == n2)))
        return worst, {"max_index": top, "note": "pairs with m1+m2 != n1+n2 vanish by selection rule"}

    # terms reach cosh(2 gamma)^(2 * top) before cancelling; the rounding floor scales with them
    summation_tol = SUMMATION_TOL * math.cosh(2 * gamma) ** 12
    suite.run("summation_rule", "closed-form", True, summation_tol, summation)


METRIC_TOL = 1e-4


def _gaussian_checks(suite: _Suite, inst: ModelInstance, config: VerifyConfig, rep, ladders, state) -> None:
    gamma = inst.params["gamma"]
    q = waves.deformation_form(gamma)
    integrable = waves.is_positive_definite(q)
    why = (f"Q = I - 2 gamma J has determinant {1 - 4 * gamma**2:.3e}: phi_00 and Psi_00 are not "
           "square integrable for |gamma| >= 1/2, so (a_j, b_j) are not D-pseudo-bosonic")

    def integrability():
        details = {"det_Q": 1 - 4 * gamma**2, "min_eig_Q": float(np.linalg.eigvalsh(q).min())}
        if not integrable:
            details["note"] = why
        return integrable, details

    suite.run("integrability", "realspace", True, None, integrability)

    def require():
        if not integrable:
            raise _Skip(why)

    def realspace_gram():
        require()
        idx = fockrep.family_indices(config.k_family)
        phis = [waves.phi_state(gamma, *i) for i in idx]
        psis = [waves.psi_state(gamma, *i) for i in idx]
        gram = np.array([[waves.inner2d(p, s, m=config.quad_order) for s in psis] for p in phis])
        state["gram2d"] = gram
        err = float(np.abs(gram - np.eye(len(idx))).max())
        return err, {"k": config.k_family}

    suite.run("realspace_biorthogonality", "realspace", True, config.tol_num, realspace_gram)

    def cross():
        require()
        if "gram2d" not in state or "bo" not in state:
            raise _Skip("needs both the quadrature and the truncated Gram matrices")
        fock_gram = fockrep.biorth_gram(state["bo"].phi, state["bo"].psi)
        return float(np.abs(fock_gram - state["gram2d"]).max()), {
            "note": "truncated-space Gram against quadrature Gram"}

    suite.run("realspace_vs_fock", "realspace", False, config.tol_num, cross)

    def eigen_residual():
        require()
        h = rep.matrix(deform_hamiltonian(inst.x, inst.h0))
        worst = 0.0
        for n1, n2 in fockrep.family_indices(config.k_family):
            v = waves.fock_projection(waves.phi_state(gamma, n1, n2), rep.n_max)
            worst = max(worst, float(np.linalg.norm(h @ v - inst.h0.energy(n1, n2) * v) / np.linalg.norm(v)))
        return worst, {"note": "quadrature coefficients, truncated Hamiltonian"}

    suite.run("realspace_eigenvectors", "realspace", False, config.tol_num, eigen_residual)

    def metric_multiplier():
        require()
        if "bo" not in state:
            raise _Skip("no biorthogonal families (see biorthogonality)")
        bo = state["bo"]
        image = waves.metric_image(inst.x, gamma, bo.phi.indices, rep.n_max)
        r = fockrep.theta_check(rep, inst.x, bo.phi, bo.psi, theta_phi=image)
        return r.max_residual, {"scale": r.scale, "n_max": rep.n_max,
                                "note": "exp(-2X) applied as an exact multiplier; truncation-limited"}

    suite.run("realspace_metric", "realspace", True, METRIC_TOL, metric_multiplier)

    def norms():
        require()
        if gamma == 0:
            raise _Skip("undeformed: no divergence to bound")
        rows = waves.norm_growth(gamma, range(config.n_norms + 1))
        violations = [r.n for r in rows if not r.holds]
        increasing = all(b.i_n > a.i_n for a, b in zip(rows, rows[1:]))
        details = {"n_max_index": config.n_norms, "min_ratio": min(r.ratio for r in rows),
                   "increasing": increasing, "bound_violations": violations}
        if gamma < 0:
            details["symmetric_bound_violations"] = [r.n for r in rows if r.i_n < r.symmetric_bound]
        return (not violations) and increasing, details

    suite.run("norm_divergence", "realspace", True, None, norms)


# -- entries given only by their Hamiltonian --------------------------------------------------


def _h_only_checks(suite: _Suite, inst: ModelInstance, config: VerifyConfig, rep_for) -> None:
    rep = rep_for(config.n_max)

    def h_spectrum():
        values = fockrep.sort_spectrum(np.linalg.eigvals(rep.matrix(inst.h_printed)))
        low = values[: max(1, rep.dim // 4)]
        real = np.abs(low.imag) <= config.tol_num * np.maximum(1.0, np.abs(low.real))
        return True, {"reality_fraction": float(real.mean()), "max_imag": float(np.abs(low.imag).max()),
                      "lowest": [[v.real, v.imag] for v in low[:10]],
                      "note": "no eigenvalue claim to test; reported only"}

    suite.run("spectrum_report", "diagnostic", False, None, h_spectrum)
