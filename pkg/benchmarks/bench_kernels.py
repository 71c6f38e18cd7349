"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on both backends with identical inputs, and the
outputs are checked to agree before any timing is reported.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from pbl import kernels
from pbl.deform import deform_hamiltonian
from pbl.models import instantiate


def _cases():
    x = np.linspace(-6.0, 6.0, 4096)
    inst = instantiate("model1", {"gamma": 0.2})
    poly = deform_hamiltonian(inst.x, inst.h0)
    keys = np.array(list(poly.coeffs), dtype=np.int64)
    coeffs = np.array(list(poly.coeffs.values()), dtype=complex)
    return {
        "hermite_table(40, 4096 pts)": lambda k: k.hermite_table(40, x),
        "laguerre_table(60, -2.5)": lambda k: k.laguerre_table(60, -2.5),
        "fock_poly_matrix(n_max=24)": lambda k: k.fock_poly_matrix(24, keys, coeffs),
        "summation_rule(all idx <= 4)": lambda k: np.array([
            k.summation_rule(m1, m2, n1, n2, np.cosh(0.3), np.sinh(0.3))
            for m1 in range(5) for m2 in range(5) for n1 in range(5) for n2 in range(5)]),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the pure-Python backend only")
    print(f"{'kernel':32s}" + "".join(f"{name:>14s}" for name in backends) + "   speedup")
    for label, fn in _cases().items():
        outs = {name: np.asarray(fn(mod)) for name, mod in backends.items()}
        ref = outs["python"]
        for name, out in outs.items():
            if not np.allclose(out, ref, rtol=1e-12, atol=1e-12):
                raise SystemExit(f"{label}: backend {name} disagrees with python")
        times = {}
        for name, mod in backends.items():
            number = 3
            times[name] = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
        speed = f"{times['python'] / times['cython']:9.1f}x" if "cython" in times else ""
        print(f"{label:32s}" + "".join(f"{times[n] * 1e3:12.3f}ms" for n in backends) + "  " + speed)


if __name__ == "__main__":
    main()
