"""Catalog of deformations and engine-versus-printed comparisons.

Each entry is a YAML file holding the generator ``x`` and the printed
Hamiltonian ``h`` as expression strings, transcribed verbatim. Printed
forms are bound against the model parameters, the frequencies
``wt1 wt2 wt3`` (and ``w1 w2 w3``), per-entry scalar ``defs`` and
``aliases``. The engine side ``e^X H0 e^{-X}`` is the reference; the
comparison output is a per-monomial diff.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import yaml

from pbl.deform import H0Spec, deform_hamiltonian, exp_map, pseudo_boson_check
from pbl.opalg import OperatorPoly, mode_swap, parse, phase_key, to_phase_space

KINDS = ("derived-in-text", "listed-only", "h-only")
CLOSED_FORMS = ("gaussian", "two-mode")
CATALOG_ENV = "PBL_CATALOG_DIR"
DEFAULT_FREQUENCIES = {"wt1": 0.5, "wt2": 1.0, "wt3": 0.25}


class CatalogError(ValueError):
    """Unknown entry, malformed entry file, or bad parameter binding."""


class ParameterRangeError(CatalogError):
    pass


class SingularParameterError(CatalogError):
    """A printed closed form is undefined at the requested parameters."""


class ParameterRangeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelSpec:
    id: str
    kind: str
    source: str
    params: Dict[str, Tuple[float, float]]
    x_source: Optional[str] = None
    printed_h: Optional[str] = None
    defs: Dict[str, str] = field(default_factory=dict)
    aliases: Dict[str, str] = field(default_factory=dict)
    nonzero: Tuple[str, ...] = ()
    h0_overrides: Dict[str, str] = field(default_factory=dict)
    exchange_symmetric: Optional[bool] = None
    closed_forms: Optional[str] = None
    notes: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CatalogError(f"{self.id}: unknown kind {self.kind!r}")
        if self.kind == "h-only":
            if self.x_source is not None or self.printed_h is None:
                raise CatalogError(f"{self.id}: h-only entries carry h and no x")
        elif self.x_source is None or self.printed_h is None:
            raise CatalogError(f"{self.id}: {self.kind} entries need both x and h")
        if self.closed_forms is not None and self.closed_forms not in CLOSED_FORMS:
            raise CatalogError(f"{self.id}: unknown closed_forms {self.closed_forms!r}")
        for name, (lo, hi) in self.params.items():
            if not lo < hi:
                raise CatalogError(f"{self.id}: empty range for {name}")

    @property
    def has_x(self) -> bool:
        return self.x_source is not None

    def in_range(self, name: str, value: float) -> bool:
        lo, hi = self.params[name]
        return lo < value < hi

    def draw(self, rng: np.random.Generator) -> Dict[str, float]:
        """Uniform draw inside the (open) parameter box."""
        return {name: float(rng.uniform(lo, hi)) for name, (lo, hi) in self.params.items()}


def _spec_from_mapping(data: Mapping, origin: str) -> ModelSpec:
    try:
        params = {str(k): (float(v[0]), float(v[1])) for k, v in (data.get("params") or {}).items()}
        return ModelSpec(
            id=str(data["id"]),
            kind=str(data["kind"]),
            source=str(data.get("source", "")),
            params=params,
            x_source=data.get("x"),
            printed_h=data.get("h"),
            defs={str(k): str(v) for k, v in (data.get("defs") or {}).items()},
            aliases={str(k): str(v) for k, v in (data.get("aliases") or {}).items()},
            nonzero=tuple(data.get("nonzero") or ()),
            h0_overrides={str(k): str(v) for k, v in (data.get("h0") or {}).items()},
            exchange_symmetric=data.get("exchange_symmetric"),
            closed_forms=data.get("closed_forms"),
            notes=str(data.get("notes", "")).strip(),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise CatalogError(f"{origin}: malformed entry ({exc})") from None


def catalog_dir() -> Path:
    env = os.environ.get(CATALOG_ENV)
    return Path(env) if env else Path(__file__).with_name("catalog")


@lru_cache(maxsize=8)
def _load(directory: str) -> Tuple[ModelSpec, ...]:
    path = Path(directory)
    if not path.is_dir():
        raise CatalogError(f"catalog directory {path} does not exist")
    specs = []
    for file in sorted(path.glob("*.yaml")):
        with open(file, encoding="utf-8") as fh:
            specs.append(_spec_from_mapping(yaml.safe_load(fh), file.name))
    ids = [s.id for s in specs]
    if len(ids) != len(set(ids)):
        raise CatalogError("duplicate catalog ids")
    return tuple(specs)


def load_catalog(directory: str | os.PathLike | None = None) -> List[ModelSpec]:
    return list(_load(str(directory or catalog_dir())))


def get_spec(model_id: str, directory=None) -> ModelSpec:
    for spec in load_catalog(directory):
        if spec.id == model_id:
            return spec
    raise CatalogError(f"unknown model id {model_id!r}")


@dataclass(frozen=True)
class ModelInstance:
    spec: ModelSpec
    params: Dict[str, float]
    h0: H0Spec
    x: Optional[OperatorPoly]
    h_printed: Optional[OperatorPoly]

    @property
    def id(self) -> str:
        return self.spec.id


def check_params(spec: ModelSpec, params: Mapping[str, float], strict: bool = False) -> Dict[str, float]:
    """Validate names and ranges; out-of-range values warn (or raise if ``strict``)."""
    missing = set(spec.params) - set(params)
    if missing:
        raise CatalogError(f"{spec.id}: missing parameters {sorted(missing)}")
    extra = set(params) - set(spec.params) - set(DEFAULT_FREQUENCIES) - {"w1", "w2", "w3"}
    if extra:
        raise CatalogError(f"{spec.id}: unknown parameters {sorted(extra)}")
    out = {name: float(params[name]) for name in spec.params}
    for name, value in out.items():
        if not math.isfinite(value):
            raise CatalogError(f"{spec.id}: parameter {name} is not finite")
        if not spec.in_range(name, value):
            lo, hi = spec.params[name]
            msg = f"{spec.id}: {name}={value} outside ({lo}, {hi})"
            if strict:
                raise ParameterRangeError(msg)
            warnings.warn(msg, ParameterRangeWarning, stacklevel=3)
    return out


def _scalar(text: str, binding: Mapping[str, complex]) -> complex:
    poly = parse(text, binding)
    if not poly.is_constant():
        raise CatalogError(f"definition {text!r} is not a scalar")
    return poly.constant_term()


def resolve_h0(spec: ModelSpec, params: Mapping[str, float], h0: H0Spec | None = None) -> H0Spec:
    """Frequencies for this entry, honoring per-entry ``h0`` overrides."""
    if h0 is None:
        freq = {k: float(params.get(k, v)) for k, v in DEFAULT_FREQUENCIES.items()}
        h0 = H0Spec.from_tilde(freq["wt1"], freq["wt2"], freq["wt3"])
    if spec.h0_overrides:
        binding = {**params, **h0.params()}
        tilde = {"wt1": h0.wt1, "wt2": h0.wt2, "wt3": h0.wt3}
        for name, text in spec.h0_overrides.items():
            tilde[name] = _scalar(text, binding).real
        h0 = H0Spec.from_tilde(tilde["wt1"], tilde["wt2"], tilde["wt3"])
    return h0


def instantiate(
    model_id: str,
    params: Mapping[str, float],
    h0: H0Spec | None = None,
    *,
    printed: bool = True,
    strict: bool = False,
    directory=None,
) -> ModelInstance:
    """Bind parameters and parse ``X`` and the printed ``H``.

    Raises
    ------
    SingularParameterError
        If ``printed`` and a parameter the printed form divides by is zero.
    ParameterRangeError
        If ``strict`` and a parameter is outside its range.
    """
    spec = get_spec(model_id, directory)
    values = check_params(spec, params, strict=strict)
    h0 = resolve_h0(spec, {**params, **values}, h0)
    x = parse(spec.x_source, values) if spec.has_x else None
    h_printed = None
    if printed:
        zeros = [name for name in spec.nonzero if values[name] == 0]
        if zeros:
            raise SingularParameterError(
                f"{spec.id}: the printed Hamiltonian divides by {', '.join(zeros)}, which is zero; "
                "use the engine-only mode to build e^X H0 e^-X without it"
            )
        h_printed = parse(spec.printed_h, printed_binding(spec, values, h0))
    return ModelInstance(spec, values, h0, x, h_printed)


def printed_binding(spec: ModelSpec, values: Mapping[str, float], h0: H0Spec) -> Dict[str, complex]:
    binding: Dict[str, complex] = {**values, **h0.params()}
    for alias, target in spec.aliases.items():
        binding[alias] = binding[target]
    for name, text in spec.defs.items():
        binding[name] = _scalar(text, binding)
    return binding


# -- comparisons -----------------------------------------------------------------


@dataclass(frozen=True)
class MonomialDiff:
    monomial: str
    printed: complex
    engine: complex

    @property
    def delta(self) -> float:
        return abs(self.printed - self.engine)


@dataclass(frozen=True)
class DiffReport:
    model_id: str
    params: Dict[str, float]
    rows: Tuple[MonomialDiff, ...]
    tol: float

    @property
    def max_delta(self) -> float:
        return max((r.delta for r in self.rows), default=0.0)

    @property
    def match(self) -> bool:
        return self.max_delta <= self.tol

    def mismatches(self) -> List[MonomialDiff]:
        return [r for r in self.rows if r.delta > self.tol]

    def to_json(self) -> dict:
        return {
            "model": self.model_id,
            "params": self.params,
            "tol": self.tol,
            "max_delta": self.max_delta,
            "match": self.match,
            "rows": [
                {
                    "monomial": r.monomial,
                    "printed": [r.printed.real, r.printed.imag],
                    "engine": [r.engine.real, r.engine.imag],
                    "delta": r.delta,
                }
                for r in self.rows
            ],
        }


def diff_polys(
    model_id: str, params: Mapping[str, float], printed: OperatorPoly, engine: OperatorPoly, tol: float
) -> DiffReport:
    """Per-monomial diff in the position/momentum view."""
    p_tab = to_phase_space(printed)
    e_tab = to_phase_space(engine)
    keys = sorted(set(p_tab) | set(e_tab), key=lambda k: (sum(k), k))
    rows = tuple(MonomialDiff(phase_key(k), p_tab.get(k, 0j), e_tab.get(k, 0j)) for k in keys)
    return DiffReport(model_id, dict(params), rows, tol)


def compare(
    model_id: str, params: Mapping[str, float], h0: H0Spec | None = None, tol: float = 1e-10, directory=None
) -> DiffReport:
    """Diff ``e^X H0 e^{-X}`` against the printed Hamiltonian."""
    inst = instantiate(model_id, params, h0, directory=directory)
    if inst.x is None:
        raise CatalogError(f"{model_id}: no generator to compare (h-only entry)")
    engine = deform_hamiltonian(inst.x, inst.h0)
    return diff_polys(model_id, inst.params, inst.h_printed, engine, tol)


@dataclass(frozen=True)
class ExchangeResult:
    symmetric: bool
    diff: DiffReport
    swapped_residual: float
    catalog_claim: Optional[bool]


def exchange_symmetry_check(
    model_id: str, params: Mapping[str, float], tol: float = 1e-12, directory=None
) -> ExchangeResult:
    """Is ``X`` invariant under ``(x1, p1) <-> (x2, p2)``?

    For asymmetric generators the swapped ``X`` still has to produce
    pseudo-bosonic ladders; its residual is reported either way.
    """
    inst = instantiate(model_id, params, printed=False, directory=directory)
    if inst.x is None:
        raise CatalogError(f"{model_id}: h-only entries have no generator")
    swapped = mode_swap(inst.x)
    diff = diff_polys(model_id, inst.params, inst.x, swapped, tol)
    residual = pseudo_boson_check(*exp_map(swapped).ladders()).max
    return ExchangeResult(diff.match, diff, residual, inst.spec.exchange_symmetric)
