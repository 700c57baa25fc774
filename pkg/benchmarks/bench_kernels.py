#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallbacks.

Runs both implementations of each kernel on identical synthetic inputs,
checks they agree to 1e-12, and prints per-size timings with the speedup.
JIT compilation happens during warm-up so it never pollutes a measurement.

    python3 benchmarks/bench_kernels.py --sizes 100 1000 10000 --repeats 7
"""
from __future__ import annotations

import argparse
import os
import time

import numpy as np

from policy_compass import _kernels


def synthetic_rows(rng: np.random.Generator, n: int):
    return _kernels.as_kernel_arrays(
        rng.integers(0, 3, n),
        rng.uniform(0.0, 360.0, n),
        rng.uniform(0.0, 1.0, n),
    )


def best_of(fn, args, repeats: int) -> float:
    fn(*args)  # warm-up: JIT compile / cache touch
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def check_agreement(numpy_out, numba_out, label: str) -> None:
    for a, b in zip(numpy_out, numba_out):
        worst = float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)))) if a.size else 0.0
        if worst > 1e-12:
            raise SystemExit(
                "%s: backends disagree by %.3e (> 1e-12)" % (label, worst)
            )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[100, 1_000, 10_000, 100_000])
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    if not _kernels.HAVE_NUMBA:
        print("numba backend unavailable (POLICY_COMPASS_NUMBA=%r); "
              "nothing to compare" % os.environ.get("POLICY_COMPASS_NUMBA", ""))
        return 1

    rng = np.random.default_rng(args.seed)
    kernels = [
        ("sector_components",
         _kernels.sector_components_numpy, _kernels.sector_components_numba),
        ("prefix_components",
         _kernels.prefix_components_numpy, _kernels.prefix_components_numba),
    ]

    header = "%-18s %9s %12s %12s %9s" % (
        "kernel", "rows", "numpy", "numba", "speedup")
    print(header)
    print("-" * len(header))
    for name, numpy_fn, numba_fn in kernels:
        for n in args.sizes:
            rows = synthetic_rows(rng, n)
            check_agreement(numpy_fn(*rows), numba_fn(*rows), name)
            t_numpy = best_of(numpy_fn, rows, args.repeats)
            t_numba = best_of(numba_fn, rows, args.repeats)
            print("%-18s %9d %10.3f ms %10.3f ms %8.2fx" % (
                name, n, t_numpy * 1e3, t_numba * 1e3, t_numpy / t_numba))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
