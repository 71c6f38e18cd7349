"""Operators of degree <= 2 in two bosonic modes.

An :class:`OperatorPoly` is a finite linear combination of normal-ordered
ladder monomials ``Ad1^a A1^b Ad2^c A2^d`` with ``a + b + c + d <= 2``.
Creation operators stand to the left of annihilation operators within a
mode and mode-1 factors precede mode-2 factors, so two polys are equal iff
their coefficient maps are equal.

The position/momentum picture (``x_j = (A_j + A_j^dag)/sqrt(2)``,
``p_j = -i (A_j - A_j^dag)/sqrt(2)``) is only a view; see
:func:`to_phase_space` and :func:`from_phase_space`.
"""

from __future__ import annotations

import cmath
import json
import math
import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, Mapping, Tuple

Monomial = Tuple[int, int, int, int]

MAX_DEGREE = 2
_EPS = 2.0**-52
_LADDER_NAMES = ("Ad1", "A1", "Ad2", "A2")
_PHASE_NAMES = ("x1", "p1", "x2", "p2")
# [A, A^dag] = 1 and [p, x] = -i: both algebras share the same reordering rule
_LADDER_SWAP = 1.0
_PHASE_SWAP = -1j
_SQRT_HALF = math.sqrt(0.5)


class DegreeError(ValueError):
    """An operation would produce (or requires) a poly of the wrong degree."""


class ExprError(ValueError):
    """Malformed or unevaluable operator expression.

    ``span`` is the ``(start, end)`` character range of the offending text.
    """

    def __init__(self, message: str, text: str = "", span: Tuple[int, int] = (0, 0)):
        self.message = message
        self.text = text
        self.span = span
        super().__init__(self._render())

    def _render(self) -> str:
        if not self.text:
            return self.message
        start, end = self.span
        caret = " " * start + "^" * max(1, end - start)
        return f"{self.message} at {start}:{end}\n  {self.text}\n  {caret}"


def _degree(m: Monomial) -> int:
    return m[0] + m[1] + m[2] + m[3]


class _Accumulator:
    """Sums complex terms per monomial, flagging rounding-level cancellations."""

    __slots__ = ("_sum", "_abs")

    def __init__(self) -> None:
        self._sum: Dict[Monomial, complex] = {}
        self._abs: Dict[Monomial, float] = {}

    def add(self, key: Monomial, value: complex) -> None:
        if value == 0:
            return
        self._sum[key] = self._sum.get(key, 0j) + value
        self._abs[key] = self._abs.get(key, 0.0) + abs(value)

    def result(self) -> Dict[Monomial, complex]:
        out = {}
        for key, total in self._sum.items():
            # a total below the rounding floor of its own inputs is a cancelled zero
            if abs(total) > 8 * _EPS * self._abs[key]:
                out[key] = complex(total)
        return out


class OperatorPoly:
    """Immutable poly over normal-ordered ladder monomials.

    Parameters
    ----------
    coeffs : mapping, optional
        ``{(a, b, c, d): coefficient}`` where the key holds the exponents
        of ``(Ad1, A1, Ad2, A2)``.
    """

    __slots__ = ("_coeffs", "_hash")

    def __init__(self, coeffs: Mapping[Monomial, complex] | None = None):
        clean: Dict[Monomial, complex] = {}
        for key, value in (coeffs or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != 4 or min(key) < 0:
                raise ValueError(f"bad monomial key {key!r}")
            if _degree(key) > MAX_DEGREE:
                raise DegreeError(f"monomial {key} has degree > {MAX_DEGREE}")
            value = complex(value)
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"non-finite coefficient for {key}")
            if value != 0:
                clean[key] = clean.get(key, 0j) + value
        self._coeffs = MappingProxyType({k: v for k, v in sorted(clean.items()) if v != 0})
        self._hash = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, value: complex) -> "OperatorPoly":
        return cls({(0, 0, 0, 0): value})

    @classmethod
    def zero(cls) -> "OperatorPoly":
        return cls()

    @classmethod
    def _from_accumulator(cls, acc: _Accumulator) -> "OperatorPoly":
        return cls(acc.result())

    # -- basic protocol -------------------------------------------------------

    @property
    def coeffs(self) -> Mapping[Monomial, complex]:
        return self._coeffs

    @property
    def degree(self) -> int:
        """Highest total degree present; ``-1`` for the zero poly."""
        return max((_degree(k) for k in self._coeffs), default=-1)

    def __iter__(self) -> Iterator[Tuple[Monomial, complex]]:
        return iter(self._coeffs.items())

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __getitem__(self, key: Monomial) -> complex:
        return self._coeffs.get(tuple(key), 0j)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        return dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._coeffs.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"OperatorPoly({to_string(self) or '0'})"

    def __add__(self, other: "OperatorPoly") -> "OperatorPoly":
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        acc = _Accumulator()
        for poly in (self, other):
            for key, value in poly:
                acc.add(key, value)
        return OperatorPoly._from_accumulator(acc)

    def __neg__(self) -> "OperatorPoly":
        return OperatorPoly({k: -v for k, v in self})

    def __sub__(self, other: "OperatorPoly") -> "OperatorPoly":
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar: complex) -> "OperatorPoly":
        if isinstance(scalar, OperatorPoly):
            return NotImplemented
        return OperatorPoly({k: v * scalar for k, v in self})

    __rmul__ = __mul__

    def max_abs(self) -> float:
        """Largest coefficient magnitude (0 for the zero poly)."""
        return max((abs(v) for v in self._coeffs.values()), default=0.0)

    def distance(self, other: "OperatorPoly") -> float:
        """Max coefficient-wise difference."""
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def allclose(self, other: "OperatorPoly", atol: float = 1e-12) -> bool:
        return self.distance(other) <= atol

    def is_constant(self) -> bool:
        return self.degree <= 0

    def constant_term(self) -> complex:
        return self[(0, 0, 0, 0)]

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> Dict[str, list]:
        return {monomial_key(k): [v.real, v.imag] for k, v in self}

    @classmethod
    def from_json(cls, data: Mapping[str, Iterable[float]] | str) -> "OperatorPoly":
        if isinstance(data, str):
            data = json.loads(data)
        coeffs = {}
        for key, (re_, im_) in data.items():
            coeffs[parse_monomial_key(key)] = complex(re_, im_)
        return cls(coeffs)


def monomial_key(m: Monomial) -> str:
    """``(1, 0, 0, 1)`` -> ``"Ad1^1 A2^1"``; the identity is ``"I"``."""
    parts = [f"{name}^{power}" for name, power in zip(_LADDER_NAMES, m) if power]
    return " ".join(parts) or "I"


def parse_monomial_key(key: str) -> Monomial:
    if key.strip() == "I":
        return (0, 0, 0, 0)
    powers = [0, 0, 0, 0]
    for part in key.split():
        name, _, power = part.partition("^")
        if name not in _LADDER_NAMES or not power.isdigit():
            raise ValueError(f"bad monomial key {key!r}")
        powers[_LADDER_NAMES.index(name)] += int(power)
    return tuple(powers)


def to_string(poly: OperatorPoly) -> str:
    """Render in the expression grammar so that ``parse(to_string(P)) == P``."""
    terms = []
    for key, value in poly:
        factors = [f"({value.real!r}{value.imag:+}j)".replace("+-", "-")]
        factors.extend(name for name, power in zip(_LADDER_NAMES, key) for _ in range(power))
        terms.append("*".join(factors))
    return " + ".join(terms) or "0"


# -- ordered products ------------------------------------------------------------


def _mode_product(a: int, b: int, c: int, d: int, swap: complex) -> list:
    """``u^a v^b u^c v^d`` reordered to ``sum_k coeff * u^(a+c-k) v^(b+d-k)``.

    ``u`` is the left-ordered generator and ``[v, u] = swap``.
    """
    return [
        (math.comb(b, k) * math.comb(c, k) * math.factorial(k) * swap**k, a + c - k, b + d - k)
        for k in range(min(b, c) + 1)
    ]


def _monomial_product(m: Monomial, n: Monomial, swap: complex) -> list:
    out = []
    for c1, u1, v1 in _mode_product(m[0], m[1], n[0], n[1], swap):
        for c2, u2, v2 in _mode_product(m[2], m[3], n[2], n[3], swap):
            out.append((c1 * c2, (u1, v1, u2, v2)))
    return out


def _raw_product(p: Mapping, q: Mapping, swap: complex) -> Dict[Monomial, complex]:
    acc = _Accumulator()
    for km, vm in p.items():
        for kn, vn in q.items():
            for c, key in _monomial_product(km, kn, swap):
                acc.add(key, c * vm * vn)
    return acc.result()


def _raw_commutator(p: Mapping, q: Mapping, swap: complex) -> Dict[Monomial, complex]:
    acc = _Accumulator()
    for km, vm in p.items():
        for kn, vn in q.items():
            # integer structure constants cancel exactly before scaling
            terms: Dict[Monomial, complex] = {}
            for c, key in _monomial_product(km, kn, swap):
                terms[key] = terms.get(key, 0) + c
            for c, key in _monomial_product(kn, km, swap):
                terms[key] = terms.get(key, 0) - c
            for key, c in terms.items():
                if c != 0:
                    acc.add(key, c * vm * vn)
    return acc.result()


def _checked(coeffs: Dict[Monomial, complex], what: str) -> OperatorPoly:
    bad = [k for k in coeffs if _degree(k) > MAX_DEGREE]
    if bad:
        raise DegreeError(f"{what} has degree {max(map(_degree, bad))} > {MAX_DEGREE}")
    return OperatorPoly(coeffs)


def product(p: OperatorPoly, q: OperatorPoly) -> OperatorPoly:
    """Normal-ordered operator product of two affine-linear polys."""
    if p.degree > 1 or q.degree > 1:
        raise DegreeError("product() requires factors of degree <= 1")
    return _checked(_raw_product(p.coeffs, q.coeffs, _LADDER_SWAP), "product")


def commutator(p: OperatorPoly, q: OperatorPoly) -> OperatorPoly:
    """``[p, q] = pq - qp`` in canonical form."""
    return _checked(_raw_commutator(p.coeffs, q.coeffs, _LADDER_SWAP), "commutator")


def adjoint(p: OperatorPoly) -> OperatorPoly:
    return OperatorPoly({(k[1], k[0], k[3], k[2]): v.conjugate() for k, v in p})


def mode_swap(p: OperatorPoly) -> OperatorPoly:
    """Exchange ``(x1, p1) <-> (x2, p2)``."""
    return OperatorPoly({(k[2], k[3], k[0], k[1]): v for k, v in p})


# -- generators ------------------------------------------------------------------


def ladder(name: str) -> OperatorPoly:
    """One of ``A1, A2, Ad1, Ad2`` or ``I``."""
    if name == "I":
        return OperatorPoly.constant(1.0)
    key = [0, 0, 0, 0]
    key[_LADDER_NAMES.index(name)] = 1
    return OperatorPoly({tuple(key): 1.0})


def position(mode: int) -> OperatorPoly:
    return OperatorPoly(from_phase_space({_phase_key("x", mode): 1.0}).coeffs)


def momentum(mode: int) -> OperatorPoly:
    return OperatorPoly(from_phase_space({_phase_key("p", mode): 1.0}).coeffs)


def _phase_key(kind: str, mode: int) -> Monomial:
    key = [0, 0, 0, 0]
    key[2 * (mode - 1) + (kind == "p")] = 1
    return tuple(key)


# -- phase-space view ------------------------------------------------------------

# A^dag = (x - i p)/sqrt2, A = (x + i p)/sqrt2, before the 2^(-1/2) scale
_LADDER_IN_PHASE = {
    0: {(1, 0, 0, 0): 1, (0, 1, 0, 0): -1j},
    1: {(1, 0, 0, 0): 1, (0, 1, 0, 0): 1j},
    2: {(0, 0, 1, 0): 1, (0, 0, 0, 1): -1j},
    3: {(0, 0, 1, 0): 1, (0, 0, 0, 1): 1j},
}
# x = (A + A^dag)/sqrt2, p = i (A^dag - A)/sqrt2, before the 2^(-1/2) scale
_PHASE_IN_LADDER = {
    0: {(1, 0, 0, 0): 1, (0, 1, 0, 0): 1},
    1: {(1, 0, 0, 0): 1j, (0, 1, 0, 0): -1j},
    2: {(0, 0, 1, 0): 1, (0, 0, 0, 1): 1},
    3: {(0, 0, 1, 0): 1j, (0, 0, 0, 1): -1j},
}
_SCALE = {0: 1.0, 1: _SQRT_HALF, 2: 0.5}


def _convert(key: Monomial, table: dict, swap: complex) -> Dict[Monomial, complex]:
    terms: Dict[Monomial, complex] = {(0, 0, 0, 0): 1}
    for slot, power in enumerate(key):
        for _ in range(power):
            terms = _raw_product(terms, table[slot], swap)
    return terms


def to_phase_space(p: OperatorPoly) -> Dict[Monomial, complex]:
    """Coefficients over ``x1^a p1^b x2^c p2^d`` (x before p within a mode)."""
    acc = _Accumulator()
    for key, value in p:
        scale = _SCALE[_degree(key)] * value
        for pkey, c in _convert(key, _LADDER_IN_PHASE, _PHASE_SWAP).items():
            acc.add(pkey, c * scale)
    return dict(sorted(acc.result().items()))


def from_phase_space(table: Mapping[Monomial, complex]) -> OperatorPoly:
    """Inverse of :func:`to_phase_space`."""
    acc = _Accumulator()
    for key, value in table.items():
        key = tuple(key)
        if _degree(key) > MAX_DEGREE:
            raise DegreeError(f"phase-space monomial {key} has degree > {MAX_DEGREE}")
        scale = _SCALE[_degree(key)] * complex(value)
        for lkey, c in _convert(key, _PHASE_IN_LADDER, _LADDER_SWAP).items():
            acc.add(lkey, c * scale)
    return OperatorPoly._from_accumulator(acc)


def phase_key(m: Monomial) -> str:
    """``(1, 0, 0, 1)`` -> ``"x1 p2"``; the identity is ``"I"``."""
    parts = []
    for name, power in zip(_PHASE_NAMES, m):
        parts.extend([name] * power)
    return " ".join(parts) or "I"


def parse_phase_key(key: str) -> Monomial:
    if key.strip() == "I":
        return (0, 0, 0, 0)
    powers = [0, 0, 0, 0]
    for name in key.split():
        name, _, power = name.partition("^")
        powers[_PHASE_NAMES.index(name)] += int(power or 1)
    return tuple(powers)


# -- expression parser --------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),])"
    r")"
)

_CONSTANTS = {"i": 1j, "pi": math.pi}
_FUNCTIONS = {
    "exp": cmath.exp,
    "sqrt": cmath.sqrt,
    "sin": cmath.sin,
    "cos": cmath.cos,
    "tan": cmath.tan,
    "sinh": cmath.sinh,
    "cosh": cmath.cosh,
    "tanh": cmath.tanh,
    "sec": lambda z: 1 / cmath.cos(z),
    "conj": lambda z: z.conjugate(),
}


class _Graded:
    """Parser value: ladder terms keyed by ``(monomial, k)`` meaning ``c * 2**(-k/2)``.

    Keeping the powers of sqrt(2) symbolic until the end makes phase-space
    input such as ``x1*x2 + p1*p2`` land on exactly representable values.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Tuple[Monomial, int], complex]):
        self.terms = {key: v for key, v in terms.items() if v != 0}

    @classmethod
    def scalar(cls, value: complex) -> "_Graded":
        return cls({((0, 0, 0, 0), 0): complex(value)})

    def __add__(self, other: "_Graded") -> "_Graded":
        out = dict(self.terms)
        for key, v in other.terms.items():
            out[key] = out.get(key, 0j) + v
        return _Graded(out)

    def __neg__(self) -> "_Graded":
        return _Graded({key: -v for key, v in self.terms.items()})

    def scale(self, value: complex) -> "_Graded":
        return _Graded({key: v * value for key, v in self.terms.items()})

    def times(self, other: "_Graded") -> "_Graded":
        out: Dict[Tuple[Monomial, int], complex] = {}
        for (km, gm), vm in self.terms.items():
            for (kn, gn), vn in other.terms.items():
                for c, key in _monomial_product(km, kn, _LADDER_SWAP):
                    slot = (key, gm + gn)
                    out[slot] = out.get(slot, 0j) + c * vm * vn
        return _Graded(out)

    def degree(self) -> int:
        return max((_degree(m) for m, _ in self.terms), default=-1)

    def is_constant(self) -> bool:
        return self.degree() <= 0

    def collapse(self) -> OperatorPoly:
        return OperatorPoly(self._collapsed())

    def _collapsed(self) -> Dict[Monomial, complex]:
        acc = _Accumulator()
        for (key, grade), v in self.terms.items():
            factor = 2.0 ** -(grade // 2)
            if grade % 2:
                factor *= _SQRT_HALF
            acc.add(key, v * factor)
        return acc.result()

    def nonzero_degree(self) -> int:
        return max((_degree(k) for k in self._collapsed()), default=-1)

    def value(self) -> complex:
        return self.collapse().constant_term()


def _graded_generator(name: str) -> _Graded:
    mode = int(name[-1])
    dag, ann = ((1, 0, 0, 0), (0, 1, 0, 0)) if mode == 1 else ((0, 0, 1, 0), (0, 0, 0, 1))
    if name.startswith("x"):
        return _Graded({(ann, 1): 1, (dag, 1): 1})
    if name.startswith("p"):
        return _Graded({(ann, 1): -1j, (dag, 1): 1j})
    if name.startswith("Ad"):
        return _Graded({(dag, 0): 1})
    return _Graded({(ann, 0): 1})


_GENERATOR_NAMES = {"x1", "x2", "p1", "p2", "A1", "A2", "Ad1", "Ad2"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    start: int
    end: int


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while text[pos:].strip():
        m = _TOKEN.match(text, pos)
        if not m or m.lastgroup is None:
            at = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprError("unexpected character", text, (at, at + 1))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind), m.end(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text), len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, params: Mapping[str, float]):
        self.text = text
        self.params = params
        self.toks = _tokenize(text)
        self.i = 0

    def error(self, message: str, start: int, end: int) -> ExprError:
        return ExprError(message, self.text, (start, end))

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    @property
    def last_end(self) -> int:
        return self.toks[self.i - 1].end

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            raise self.error(f"expected {text!r}", self.tok.start, max(self.tok.end, self.tok.start + 1))
        return self.take()

    def run(self) -> OperatorPoly:
        if self.tok.kind == "end":
            raise self.error("empty expression", 0, 0)
        value, _ = self.expr()
        if self.tok.kind != "end":
            raise self.error("unexpected token", self.tok.start, self.tok.end)
        return value.collapse()

    # every rule returns (value, start offset) so errors can span whole operands
    def expr(self):
        value, start = self.term()
        while self.at_op("+", "-"):
            op = self.take()
            rhs, _ = self.term()
            value = value + rhs if op.text == "+" else value + (-rhs)
        return value, start

    def term(self):
        value, start = self.unary()
        while self.at_op("*", "/"):
            op = self.take()
            rhs, _ = self.unary()
            if op.text == "*":
                value = self.multiply(value, rhs, start, self.last_end)
                continue
            if not rhs.is_constant():
                raise self.error("division by an operator", op.start, self.last_end)
            denom = rhs.value()
            if denom == 0:
                raise self.error("division by zero", op.start, self.last_end)
            value = value.scale(1 / denom)
        return value, start

    def multiply(self, lhs: _Graded, rhs: _Graded, start: int, end: int) -> _Graded:
        out = lhs.times(rhs)
        if out.nonzero_degree() > MAX_DEGREE:
            raise self.error(f"operator degree exceeds {MAX_DEGREE}", start, end)
        return out

    def unary(self):
        if self.at_op("+", "-"):
            op = self.take()
            value, _ = self.unary()
            return (-value if op.text == "-" else value), op.start
        return self.power()

    def power(self):
        base, start = self.atom()
        if not self.at_op("^", "**"):
            return base, start
        op = self.take()
        exponent, _ = self.unary()
        end = self.last_end
        if not exponent.is_constant():
            raise self.error("operator-valued exponent", op.start, end)
        e = exponent.value()
        integral = e.imag == 0 and e.real == int(e.real)
        if base.is_constant():
            b = base.value()
            if b == 0 and e.real <= 0:
                raise self.error("zero raised to a non-positive power", start, end)
            if integral and b.imag == 0:
                return _Graded.scalar(b.real ** int(e.real)), start
            return _Graded.scalar(b**e), start
        if not integral or e.real < 0:
            raise self.error("operator powers need a non-negative integer exponent", op.start, end)
        value = _Graded.scalar(1.0)
        for _ in range(int(e.real)):
            value = self.multiply(value, base, start, end)
        return value, start

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.take()
            if tok.text.endswith("j"):
                return _Graded.scalar(complex(0, float(tok.text[:-1]))), tok.start
            return _Graded.scalar(float(tok.text)), tok.start
        if tok.kind == "name":
            self.take()
            return self.name(tok), tok.start
        if tok.text == "(":
            self.take()
            value, _ = self.expr()
            self.expect(")")
            return value, tok.start
        raise self.error("expected an operand", tok.start, max(tok.end, tok.start + 1))

    def name(self, tok: _Tok) -> _Graded:
        name = tok.text
        if name in _FUNCTIONS and self.at_op("("):
            self.take()
            arg, _ = self.expr()
            close = self.expect(")")
            if not arg.is_constant():
                raise self.error(f"{name}() of an operator", tok.start, close.end)
            try:
                return _Graded.scalar(_FUNCTIONS[name](arg.value()))
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise self.error(f"{name}(): {exc}", tok.start, close.end) from None
        if name in _GENERATOR_NAMES:
            return _graded_generator(name)
        if name == "I":
            return _Graded.scalar(1.0)
        if name in self.params:
            value = complex(self.params[name])
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise self.error(f"non-finite parameter {name!r}", tok.start, tok.end)
            return _Graded.scalar(value)
        if name in _CONSTANTS:
            return _Graded.scalar(_CONSTANTS[name])
        raise self.error(f"unbound parameter {name!r}", tok.start, tok.end)


def parse(text: str, params: Mapping[str, float] | None = None) -> OperatorPoly:
    """Parse an operator expression into canonical form.

    ``*`` is the operator product in written order, so ``x1*p1`` and
    ``p1*x1`` differ by ``i``. Scalars may be combined with ``/``, ``^``
    and the functions ``exp sqrt sin cos tan sinh cosh tanh sec conj``;
    ``i`` is the imaginary unit and ``I`` the identity operator.

    Raises
    ------
    ExprError
        On unbound names, syntax errors, or any product of degree > 2.
    """
    return _Parser(text, dict(params or {})).run()
