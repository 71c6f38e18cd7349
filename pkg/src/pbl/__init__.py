"""Pseudo-bosonic deformations of the two-dimensional harmonic oscillator."""

from pbl.opalg import (
    DegreeError,
    ExprError,
    OperatorPoly,
    adjoint,
    commutator,
    from_phase_space,
    parse,
    product,
    to_phase_space,
)

__version__ = "0.1.0"

__all__ = [
    "DegreeError",
    "ExprError",
    "OperatorPoly",
    "adjoint",
    "commutator",
    "from_phase_space",
    "parse",
    "product",
    "to_phase_space",
]
