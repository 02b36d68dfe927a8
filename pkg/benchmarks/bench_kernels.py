#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Each kernel is called once to trigger compilation, then timed over a few
repeats; the best time is reported. Outputs of the two flavours are compared
so a speedup is never reported for a wrong answer.

Usage:
    python benchmarks/bench_kernels.py [--steps N] [--repeat R] [--seed S]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from irrev import _kernels


def best_of(fn, repeat):
    fn()  # compile / warm caches
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(steps, rng):
    n = 4
    A = 0.9 * np.linalg.qr(rng.standard_normal((n, n)))[0]
    E = rng.standard_normal((steps - 1, n))
    x0 = np.zeros(n)
    A1 = np.array([[0.99]])
    E1 = rng.standard_normal((steps - 1, 1))
    Y = rng.standard_normal((steps, 2))
    y = np.cumsum(rng.standard_normal(steps))
    lags = np.unique(np.logspace(0, 2.5, 30).astype(np.int64))
    q, p = rng.standard_normal((steps, 8)), rng.standard_normal((steps, 8))
    c = rng.standard_normal(8)
    ang = 0.01 * np.arange(steps)
    return [
        ("linear_recursion n=4", "linear_recursion", (A, E, x0)),
        ("linear_recursion n=1", "linear_recursion", (A1, E1, np.zeros(1))),
        ("lagged_products m=2, 50 lags", "lagged_products", (Y, 50)),
        ("mean_sq_increments 30 lags", "mean_sq_increments", (y, lags)),
        ("rotated_readout N=8", "rotated_readout", (q, p, c, ang)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"steps={args.steps}, best of {args.repeat}")
    print(f"{'kernel':32s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'max |diff|':>11s}")
    for label, name, kargs in cases(args.steps, rng):
        f_np = getattr(_kernels, f"{name}_numpy")
        f_nb = getattr(_kernels, f"{name}_numba")
        diff = float(np.max(np.abs(np.asarray(f_np(*kargs)) - np.asarray(f_nb(*kargs)))))
        t_np = best_of(lambda: f_np(*kargs), args.repeat)
        t_nb = best_of(lambda: f_nb(*kargs), args.repeat)
        print(f"{label:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
