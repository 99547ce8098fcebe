#!/usr/bin/env python3
"""Time the compiled and pure-Python kernels on the same workloads.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]
"""

import argparse
import csv
import sys
import timeit

import numpy as np

from vqnhite import kernels
from vqnhite.hybrid import hybrid_system
from vqnhite.neural import init_params
from vqnhite.pauli import PauliString, build_heisenberg
from vqnhite.statevector import AnsatzCircuit, initial_plus_state
from vqnhite.vite import compute_M


def workloads(n):
    rng = np.random.default_rng(0)
    dim = 1 << n
    block = rng.normal(size=(8, dim)) + 1j * rng.normal(size=(8, dim))
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    masks = PauliString("XYZ" * (n // 3) + "X" * (n % 3)).masks()
    H = build_heisenberg(n, -1.0, list(rng.uniform(-1, 1, n)))
    ansatz = AnsatzCircuit.build(n, "nn", 2)
    theta = rng.uniform(-1, 1, ansatz.n_params)
    nn = init_params(1, n)

    def k():
        return kernels.impl

    return {
        "apply_ry": lambda: k().apply_ry(block.copy(), n, n // 2, 0.3),
        "apply_1q": lambda: k().apply_1q(block.copy(), n, 0, u),
        "apply_cz": lambda: k().apply_cz(block.copy(), n, 0, n - 1),
        "apply_pauli": lambda: k().apply_pauli(block, *masks),
        "vite_M": lambda: compute_M(ansatz, theta, initial_plus_state(n)),
        "hybrid_system": lambda: hybrid_system(theta, nn, ansatz, H),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--qubits", type=int, nargs="+", default=[6, 10])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the Python fallback only", file=sys.stderr)
    rows = []
    for n in args.qubits:
        for name, fn in workloads(n).items():
            t = {}
            for b in backends:
                with kernels.use_backend(b):
                    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
                    t[b] = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            speedup = t["python"] / t["cython"] if "cython" in t else float("nan")
            rows.append([n, name] + [t.get(b, float("nan")) for b in ("python", "cython")] + [speedup])
            print(f"n={n:2d} {name:14s} python {t['python'] * 1e6:10.1f} us   "
                  f"cython {t.get('cython', float('nan')) * 1e6:10.1f} us   x{speedup:5.1f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n_qubits", "workload", "python_s", "cython_s", "speedup"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
