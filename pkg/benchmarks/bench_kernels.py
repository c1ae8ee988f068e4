"""Benchmark the numba and numpy kernel backends on propagation-shaped work.

Usage: python benchmarks/bench_kernels.py [--n 200000] [--nnz 2000000]
       [--labels 64] [--repeats 3]

The sparse x dense multiply is the propagation hot loop; matvec and
transpose-matvec drive the link-analysis power iterations. Expect the
numba path to win by an order of magnitude or more on the multiply.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bibmig import kernels


def build_problem(rng, n, nnz, labels):
    rows = np.sort(rng.integers(0, n, nnz))
    indices = rng.integers(0, n, nnz)
    data = rng.random(nnz)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    Y = rng.random((n, labels))
    x = rng.random(n)
    return indptr, indices, data, Y, x


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200_000)
    parser.add_argument("--nnz", type=int, default=2_000_000)
    parser.add_argument("--labels", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    indptr, indices, data, Y, x = build_problem(rng, args.n, args.nnz, args.labels)
    out_mat = np.empty_like(Y)
    out_vec = np.empty(args.n)

    cases = {
        "csr_matmul": lambda: kernels.csr_matmul(indptr, indices, data, Y, out_mat),
        "csr_matvec": lambda: kernels.csr_matvec(indptr, indices, data, x, out_vec),
        "csr_rmatvec": lambda: kernels.csr_rmatvec(indptr, indices, data, x, out_vec),
    }

    backends = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    print(f"n={args.n} nnz={args.nnz} labels={args.labels} "
          f"(best of {args.repeats})")
    results: dict[str, dict[str, float]] = {name: {} for name in cases}
    for backend in backends:
        kernels.set_backend(backend)
        for name, fn in cases.items():
            fn()  # warm up (JIT compile on the numba path)
            results[name][backend] = time_call(fn, args.repeats)

    width = max(len(name) for name in cases)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    for name, timings in results.items():
        row = f"{name:<{width}}  " + "  ".join(
            f"{timings[b] * 1000:>8.1f}ms" for b in backends)
        if len(backends) == 2:
            row += f"  {timings['numpy'] / timings['numba']:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
