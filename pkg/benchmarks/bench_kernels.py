#!/usr/bin/env python3
"""Benchmark the compiled expression kernel against the numpy fallback.

The quadrature inner loop evaluates roof expressions over point batches; the
batch size is set by the wave of cells under refinement, so both small and
large batches matter.  Also times one end-to-end height computation per
backend.
"""

import time

import numpy as np

from toricheights import kernels, kernels_py
from toricheights.expr import compile_expression, parse_expression

try:
    from toricheights import _kernels

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

EXPRS = [
    ("boundary cusp", "1 - pow(y1, -1/2)", 1),
    ("scaled cusp", "min(0, 1 - 0.35*pow(y1, -7/10))", 1),
    ("surface cusp", "-pow(1 - y2, -1)", 2),
    ("radial profile", "min(0, 1 - 0.7*pow(1 - y1, -1/2))", 1),
]


def time_backend(fn, ops, args, pts, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(ops, args, pts)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eval():
    print(f"{'expression':<16} {'batch':>8} {'numpy':>12} {'compiled':>12} {'speedup':>8}")
    rng = np.random.default_rng(0)
    for name, src, d in EXPRS:
        ops, args = compile_expression(parse_expression(src, d))
        for n in (64, 1024, 65536):
            pts = rng.random((n, d)) * 0.98 + 0.01
            repeat = max(3, 20000 // n)
            t_py = time_backend(kernels_py.eval_program, ops, args, pts, repeat)
            if HAVE_COMPILED:
                t_c = time_backend(_kernels.eval_program, ops, args, pts, repeat)
                print(f"{name:<16} {n:>8} {t_py * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us "
                      f"{t_py / t_c:>7.1f}x")
            else:
                print(f"{name:<16} {n:>8} {t_py * 1e6:>10.1f}us {'n/a':>12} {'':>8}")


def bench_height():
    from fractions import Fraction

    from toricheights import kernels as k
    from toricheights.registry import run_example

    t0 = time.perf_counter()
    hv = run_example("ex3", Fraction(-1, 2)).heights[0][1]
    dt = time.perf_counter() - t0
    print(f"\nend-to-end ex3 height ({k.backend_name()} backend): "
          f"{hv.value:.6f} +/- {hv.abs_error:.1e} in {dt:.2f}s")


if __name__ == "__main__":
    print(f"compiled kernel available: {HAVE_COMPILED}")
    bench_eval()
    bench_height()
