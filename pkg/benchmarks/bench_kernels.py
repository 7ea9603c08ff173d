#!/usr/bin/env python3
"""Benchmark the compiled flux kernel against the pure-NumPy fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from wfr_split_lab import _kernels_py, kernels
from wfr_split_lab.pde1d import (
    GaussianTarget,
    edge_weights,
    gaussian_field,
    suggest_grid,
)

try:
    from wfr_split_lab import _cc_kernel
except ImportError:
    _cc_kernel = None


def bench(impl, values, bp, bm, r, n_substeps, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        impl.advance_flux(values, bp, bm, r, n_substeps)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    print(f"selected backend: {kernels.backend_name()}")
    header = f"{'grid':>8} {'substeps':>9} {'numpy':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n_points, n_substeps in ((1001, 2000), (4001, 2000), (8001, 500), (16001, 200)):
        target = GaussianTarget(2.0, 4.0)
        grid = suggest_grid(target, 0.0, 1.0, n_points)
        v = gaussian_field(grid, 0.0, 1.0).values
        bp, bm = edge_weights(target, grid)
        r = 0.2
        t_py = bench(_kernels_py, v, bp, bm, r, n_substeps)
        if _cc_kernel is None:
            print(f"{n_points:>8} {n_substeps:>9} {t_py:>9.4f}s {'n/a':>10} {'n/a':>8}")
            continue
        t_c = bench(_cc_kernel, v, bp, bm, r, n_substeps)
        out_py = _kernels_py.advance_flux(v, bp, bm, r, 50)
        out_c = _cc_kernel.advance_flux(v, bp, bm, r, 50)
        same = "bitwise-equal" if np.array_equal(out_py, out_c) else "DIFFER"
        print(
            f"{n_points:>8} {n_substeps:>9} {t_py:>9.4f}s {t_c:>9.4f}s "
            f"{t_py / t_c:>7.1f}x  ({same})"
        )


if __name__ == "__main__":
    main()
