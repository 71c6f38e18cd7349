"""Command-line front end (``pbl``).

Exit status: 0 when everything requested passed, 1 when a hard check
failed, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from pbl import fockrep, verify, waves
from pbl.deform import H0Spec, deform_hamiltonian, exp_map
from pbl.models import KINDS, CatalogError, SingularParameterError, get_spec, instantiate, load_catalog
from pbl.opalg import OperatorPoly, monomial_key, phase_key, to_phase_space, to_string

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- argument helpers -------------------------------------------------------------------------


def parse_assignments(items: Sequence[str]) -> Dict[str, float]:
    """``["gamma=0.2", "wt1=1"]`` -> dict; malformed entries raise UsageError."""
    out: Dict[str, float] = {}
    for item in items or ():
        for part in item.split(","):
            name, sep, value = part.partition("=")
            name = name.strip()
            if not sep or not name:
                raise UsageError(f"malformed parameter {part!r}; expected name=value")
            try:
                out[name] = float(value)
            except ValueError:
                raise UsageError(f"parameter {name!r} has non-numeric value {value!r}") from None
            if not math.isfinite(out[name]):
                raise UsageError(f"parameter {name!r} is not finite")
    return out


def parse_omega(text: Optional[str]) -> Optional[H0Spec]:
    if text is None:
        return None
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--omega expects w1,w2[,w3], got {text!r}") from None
    if len(values) not in (2, 3):
        raise UsageError("--omega expects two or three numbers")
    return H0Spec(*values)


def _split_params(spec, values: Dict[str, float]):
    """Separate frequency overrides from model parameters."""
    model = {k: v for k, v in values.items() if k in spec.params}
    extra = {k: v for k, v in values.items() if k not in spec.params}
    return model, extra


def _h0_from(args, extra: Dict[str, float]) -> Optional[H0Spec]:
    h0 = parse_omega(args.omega)
    tilde = {k: extra[k] for k in ("wt1", "wt2", "wt3") if k in extra}
    plain = {k: extra[k] for k in ("w1", "w2", "w3") if k in extra}
    unknown = set(extra) - set(tilde) - set(plain)
    if unknown:
        raise UsageError(f"unknown parameters {sorted(unknown)}")
    if tilde and plain:
        raise UsageError("give frequencies either as w1.. or as wt1.., not both")
    if tilde or plain:
        if h0 is not None:
            raise UsageError("--omega conflicts with frequency parameters")
        if tilde:
            base = {"wt1": 0.5, "wt2": 1.0, "wt3": 0.25, **tilde}
            h0 = H0Spec.from_tilde(base["wt1"], base["wt2"], base["wt3"])
        else:
            base = {"w1": 1.0, "w2": 2.0, "w3": 1.75, **plain}
            h0 = H0Spec(base["w1"], base["w2"], base["w3"])
    return h0


def _config(args, h0: Optional[H0Spec]) -> verify.VerifyConfig:
    if args.nmax < 2:
        raise UsageError("--nmax must be >= 2")
    return verify.VerifyConfig(
        n_max=args.nmax,
        k_spectrum=min(4, args.nmax // 2),
        k_family=min(3, args.nmax // 2),
        quad_order=args.quad_order,
        tol_alg=args.tol_alg,
        tol_num=args.tol_num,
        seed=args.seed,
        h0=h0,
    )


# -- output ---------------------------------------------------------------------------------------


def _csv(rows: List[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _table(rows: List[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _render(rows: List[dict], fmt: str, payload=None) -> str:
    if fmt == "json":
        return json.dumps(payload if payload is not None else rows, indent=2, default=verify._json_default) + "\n"
    if fmt == "csv":
        return _csv(rows)
    return _table(rows)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _plot_manifest(out: Optional[str], x: str, y: List[str], title: str, log_y: bool = False) -> None:
    """Small declarative description of the plot for the data file ``out``."""
    if not out:
        return
    manifest = {"data": Path(out).name, "kind": "line", "x": x, "y": y, "log_y": log_y, "title": title}
    Path(out).with_suffix(".plot.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


# -- commands ----------------------------------------------------------------------------------


def cmd_catalog(args) -> int:
    rows = []
    for spec in load_catalog():
        if args.kind and spec.kind != args.kind:
            continue
        rows.append({
            "id": spec.id,
            "kind": spec.kind,
            "params": " ".join(f"{k}:({lo:g},{hi:g})" for k, (lo, hi) in spec.params.items()),
            "source": spec.source,
        })
    _emit(_render(rows, args.format), args.out)
    return EXIT_OK


def _poly_rows(name: str, poly: OperatorPoly) -> List[dict]:
    rows = [{"operator": name, "view": "ladder", "monomial": monomial_key(k), "re": c.real, "im": c.imag}
            for k, c in poly.coeffs.items()]
    rows += [{"operator": name, "view": "phase", "monomial": phase_key(k), "re": c.real, "im": c.imag}
             for k, c in sorted(to_phase_space(poly).items(), key=lambda kv: (sum(kv[0]), kv[0]))]
    return rows


def cmd_build(args) -> int:
    spec = get_spec(args.id)
    values, extra = _split_params(spec, parse_assignments(args.param))
    h0 = _h0_from(args, extra)
    if spec.kind == "h-only":
        inst = instantiate(spec.id, values, h0)
        ops = {"H_printed": inst.h_printed}
    else:
        try:
            inst = instantiate(spec.id, values, h0, printed=not args.engine_only)
        except SingularParameterError as exc:
            raise UsageError(str(exc) + " (pass --engine-only)") from None
        a1, a2, b1, b2 = exp_map(inst.x).ladders()
        ops = {"X": inst.x, "a1": a1, "a2": a2, "b1": b1, "b2": b2, "H": deform_hamiltonian(inst.x, inst.h0)}
        if inst.h_printed is not None:
            ops["H_printed"] = inst.h_printed
    rows = [r for name, poly in ops.items() for r in _poly_rows(name, poly)]
    payload = {
        "model": spec.id,
        "params": inst.params,
        "h0": [inst.h0.w1, inst.h0.w2, inst.h0.w3],
        "operators": {name: {"ladder": poly.to_json(),
                             "phase": {phase_key(k): [c.real, c.imag] for k, c in to_phase_space(poly).items()}}
                      for name, poly in ops.items()},
    }
    if args.format == "table":
        text = "".join(f"{name} = {to_string(poly) or '0'}\n" for name, poly in ops.items())
        _emit(text, args.out)
    else:
        _emit(_render(rows, args.format, payload), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = get_spec(args.id)
    values, extra = _split_params(spec, parse_assignments(args.param))
    h0 = _h0_from(args, extra)
    if values and set(values) != set(spec.params):
        raise UsageError(f"{spec.id} needs parameters {sorted(spec.params)}")
    config = _config(args, h0)
    report = verify.run_suite(spec.id, values or None, config)
    if args.out:
        Path(args.out).write_text(report.dumps() + "\n", encoding="utf-8")
        sys.stdout.write(report.table() + "\n")
    elif args.format == "json":
        sys.stdout.write(report.dumps() + "\n")
    elif args.format == "csv":
        rows = [{k: v for k, v in c.to_json().items() if k != "details"} for c in report.checks]
        sys.stdout.write(_csv(rows))
    else:
        sys.stdout.write(report.table() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_norms(args) -> int:
    spec = get_spec(args.id)
    values, extra = _split_params(spec, parse_assignments(args.param))
    if "gamma" not in spec.params or set(values) != {"gamma"}:
        raise UsageError("norms needs a single-parameter entry with gamma=VALUE")
    if spec.closed_forms is None:
        raise UsageError(f"{spec.id} has no closed-form wavefunctions; use model1/model2 or item3/item4")
    gamma = values["gamma"]
    n_top = args.n
    if spec.closed_forms == "two-mode":
        inst = instantiate(spec.id, values, printed=False)
        a1, a2, b1, _ = exp_map(inst.x).ladders()
        rep = fockrep.FockRep(max(args.nmax, n_top))
        vac = fockrep.vacuum(rep, a1, a2, args.tol_num).vector
        norms = np.linalg.norm(fockrep.raise_mode(rep, b1, vac, n_top), axis=1) ** 2
        rows = [{"n": n, "norm_sq": float(norms[n]), "cosh_2g_pow_n": math.cosh(2 * gamma) ** n,
                 "rel_err": abs(norms[n] - math.cosh(2 * gamma) ** n) / math.cosh(2 * gamma) ** n}
                for n in range(n_top + 1)]
        y = ["norm_sq", "cosh_2g_pow_n"]
        failed = any(r["rel_err"] > args.tol_alg for r in rows)
    else:
        if not abs(gamma) < 0.5:
            raise UsageError(f"gamma={gamma}: |gamma| >= 1/2, the states are not square integrable")
        rows = []
        for est in waves.norm_growth(gamma, range(n_top + 1)):
            row = {"n": est.n, "norm_sq": est.i_n * waves.N_DEFAULT**2, "I_n": est.i_n,
                   "lower_bound": est.lower_bound, "ratio": est.ratio}
            if gamma < 0:
                row["symmetric_bound"] = est.symmetric_bound
            rows.append(row)
        y = ["I_n", "lower_bound"]
        failed = any(r["ratio"] < 1 - args.tol_alg for r in rows)
    _emit(_render(rows, args.format), args.out)
    _plot_manifest(args.out, "n", y, f"{spec.id} norms, gamma={gamma:g}", log_y=True)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_spectrum(args) -> int:
    spec = get_spec(args.id)
    values, extra = _split_params(spec, parse_assignments(args.param))
    h0 = _h0_from(args, extra)
    rep = fockrep.FockRep(args.nmax)
    if spec.kind == "h-only":
        inst = instantiate(spec.id, values, h0)
        eig = fockrep.sort_spectrum(np.linalg.eigvals(rep.matrix(inst.h_printed)))
        rows = [{"index": i, "re": v.real, "im": v.imag} for i, v in enumerate(eig)]
        _emit(_render(rows, args.format), args.out)
        _plot_manifest(args.out, "re", ["im"], f"{spec.id} truncated spectrum")
        return EXIT_OK
    inst = instantiate(spec.id, values, h0, printed=False)
    k = args.k if args.k is not None else min(6, args.nmax // 2)
    if k > args.nmax / 2:
        raise UsageError("--k must be <= nmax/2")
    res = fockrep.spectrum(rep, deform_hamiltonian(inst.x, inst.h0), inst.h0, k)
    rows = res.rows()
    _emit(_render(rows, args.format), args.out)
    _plot_manifest(args.out, "target", ["found_re", "abs_err"], f"{spec.id} eigenvalue lattice")
    return EXIT_OK if max(res.max_error, res.max_imag) <= args.tol_num else EXIT_FAIL


# -- parser -------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nmax", type=int, default=fockrep.DEFAULT_NMAX, help="per-mode Fock cutoff")
    common.add_argument("--quad-order", type=int, default=None, help="Gauss-Hermite nodes per axis (default: automatic)")
    common.add_argument("--tol-alg", type=float, default=1e-10, help="tolerance of algebraic checks")
    common.add_argument("--tol-num", type=float, default=1e-6, help="tolerance of truncation/quadrature checks")
    common.add_argument("--seed", type=int, default=0, help="seed for parameter draws")
    common.add_argument("--format", choices=("json", "csv", "table"), default="table")
    common.add_argument("--out", default=None, help="write output to this file")
    common.add_argument("--omega", default=None, help="w1,w2[,w3] of the undeformed oscillator")

    parser = argparse.ArgumentParser(prog="pbl", description="Pseudo-bosonic deformations of the 2-D oscillator.",
                                     epilog="Global options go after the subcommand, e.g. pbl verify model2 -p gamma=0.3 --nmax 20.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[common], help="list catalog entries")
    p.add_argument("--kind", choices=KINDS)
    p.set_defaults(func=cmd_catalog)

    def with_params(p):
        p.add_argument("id")
        p.add_argument("-p", "--param", action="append", default=[], metavar="NAME=VALUE",
                       help="parameter binding (repeatable or comma separated)")
        return p

    p = with_params(sub.add_parser("build", parents=[common], help="deformed ladders and Hamiltonian"))
    p.add_argument("--engine-only", action="store_true", help="skip the printed Hamiltonian")
    p.set_defaults(func=cmd_build)

    p = with_params(sub.add_parser("verify", parents=[common], help="run the check battery"))
    p.set_defaults(func=cmd_verify)

    p = with_params(sub.add_parser("norms", parents=[common], help="norm growth table"))
    p.add_argument("--n", type=int, default=15, help="largest index")
    p.set_defaults(func=cmd_norms)

    p = with_params(sub.add_parser("spectrum", parents=[common], help="truncated spectrum"))
    p.add_argument("--k", type=int, default=None, help="largest n1+n2 matched to the lattice")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = _show_warning
        try:
            return args.func(args)
        except (UsageError, CatalogError) as exc:
            sys.stderr.write(f"pbl: error: {exc}\n")
            return EXIT_USAGE
        except fockrep.VacuumError as exc:
            sys.stderr.write(f"pbl: {exc}\n")
            return EXIT_FAIL


def _show_warning(message, category, filename, lineno, file=None, line=None):
    sys.stderr.write(f"pbl: warning: {message}\n")


if __name__ == "__main__":
    sys.exit(main())
