#!/usr/bin/env python3
"""Benchmark the two Floquet-build strategies and the diagonalization cost.

The "matrix" strategy composes the N x N iteration operator by applying
every gate (and the inter-gate propagator) to all basis columns at once;
the "columns" strategy evolves each basis state separately through the
literal gate-by-gate kernel.  Both produce the same operator; the matrix
path is the production default, the column path the cross-check.

Usage: python scripts/bench_build_strategies.py [max_nq]
"""

import sys
import time

import numpy as np

from sawsim import (
    ImperfectionParams,
    build_floquet,
    compile_iteration,
    diagonalize,
    make_params,
    sample_disorder,
)
from sawsim.imperfections import diagonal_propagator


def timeit(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    max_nq = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    print(f"{'n_q':>4} {'N':>5} {'matrix':>10} {'columns':>10} "
          f"{'speedup':>8} {'eigvals':>10} {'agree':>9}")
    for n_q in range(3, max_nq + 1):
        p = make_params(np.sqrt(2), n_q)
        seq = compile_iteration(p)
        real = sample_disorder(n_q, ImperfectionParams(1e-3), 1, 0)
        E = diagonal_propagator(real, 1.0)
        t_mat, U_mat = timeit(lambda: build_floquet(p, seq, E))
        t_col, U_col = timeit(
            lambda: build_floquet(p, seq, E, strategy="columns"),
            repeat=1 if n_q >= 7 else 3)
        t_eig, _ = timeit(
            lambda: diagonalize(U_mat, vectors=False),
            repeat=1 if n_q >= 9 else 3)
        dev = np.abs(U_mat - U_col).max()
        print(f"{n_q:>4} {p.N:>5} {t_mat:>9.4f}s {t_col:>9.4f}s "
              f"{t_col / t_mat:>7.1f}x {t_eig:>9.4f}s {dev:>8.1e}")


if __name__ == "__main__":
    main()
