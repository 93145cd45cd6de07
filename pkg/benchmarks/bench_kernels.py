"""Compare the compiled and numpy state-vector kernels.

Usage: python benchmarks/bench_kernels.py [--qubits 4 8 12] [--repeat 20]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from pbcvqe.kernels import compiled_kernels, python_kernels


def _random_case(n_qubits: int, n_terms: int, rng):
    dim = 1 << n_qubits
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    xs = [int(v) for v in rng.integers(0, dim, n_terms)]
    zs = [int(v) for v in rng.integers(0, dim, n_terms)]
    return psi, xs, zs


def bench(mod, n_qubits: int, repeat: int, seed: int = 0) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    psi, xs, zs = _random_case(n_qubits, 32, rng)
    work = psi.copy()
    cases = {
        "rotation": lambda: mod.pauli_rotation_inplace(work, xs[0], zs[0], 0.3),
        "expectations": lambda: mod.expectations(psi, xs, zs),
    }
    if n_qubits <= 10:
        coeffs = [1.0] * len(xs)
        cases["dense_matrix"] = lambda: mod.dense_matrix(n_qubits, xs, zs, coeffs)
    return {k: min(timeit.repeat(f, number=1, repeat=repeat)) for k, f in cases.items()}


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[4, 8, 12, 16])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    impls = [("python", python_kernels)]
    if compiled_kernels is not None:
        impls.append(("cython", compiled_kernels))
    else:
        print("compiled kernels unavailable; timing the numpy fallback only")
    print(f"{'qubits':>6} {'kernel':<14}" + "".join(f"{name + ' (us)':>16}" for name, _ in impls) + f"{'speedup':>10}")
    for n in args.qubits:
        timings = [bench(mod, n, args.repeat) for _, mod in impls]
        for k in timings[0]:
            cols = "".join(f"{t[k] * 1e6:>16.1f}" for t in timings)
            speed = f"{timings[0][k] / timings[-1][k]:>10.2f}" if len(timings) > 1 else ""
            print(f"{n:>6} {k:<14}{cols}{speed}")


if __name__ == "__main__":
    main()
