"""Kernel backend selection.

The compiled extension ``pbl._ckernels`` is used when it was built;
otherwise, or when ``PBL_PURE_PYTHON`` is set to a non-empty value, the
pure-Python module is used. Both expose the same four functions.
"""

from __future__ import annotations

import os
from types import ModuleType
from typing import Dict

from pbl import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        from pbl import _ckernels
    except ImportError:
        return None
    return _ckernels


_COMPILED = _load_compiled()
_FORCE_PURE = bool(os.environ.get("PBL_PURE_PYTHON"))

if _COMPILED is not None and not _FORCE_PURE:
    _impl = _COMPILED
    BACKEND = "cython"
else:
    _impl = _kernels_py
    BACKEND = "python"

hermite_table = _impl.hermite_table
laguerre_table = _impl.laguerre_table
fock_poly_matrix = _impl.fock_poly_matrix
summation_rule = _impl.summation_rule


def available_backends() -> Dict[str, ModuleType]:
    out = {"python": _kernels_py}
    if _COMPILED is not None:
        out["cython"] = _COMPILED
    return out
