"""Benchmark the compiled kernels against the pure numpy/scipy fallback.

Times the two hot paths of the pipeline: the sliding-window fluctuation
matrix behind the local Hurst series, and the GARCH(1,1) likelihood +
gradient evaluation behind the volatility filter fit.

Usage: python benchmarks/bench_kernels.py [--days N] [--repeat K]
"""
import argparse
import time

import numpy as np

from bullhurst._kernels import pyfallback

try:
    from bullhurst._kernels import _core as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_fdmaa(impl, r, grid, repeat):
    return best_of(lambda: impl.fdmaa_fluctuation_matrix(r, 215, grid, 0), repeat)


def bench_garch(impl, r, repeat):
    def run():
        for _ in range(25):  # one optimizer iteration is a handful of evals
            impl.garch_nll_grad(r, 0.01, 0.05, 0.08, 0.88, 1.0)
    return best_of(run, repeat)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--days", type=int, default=17_000,
                        help="length of the synthetic daily series")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    r = rng.standard_normal(args.days)
    grid = np.unique(np.rint(np.geomspace(5, 43, 30)).astype(np.int64))
    n_windows = args.days - 215 + 1

    print(f"series: {args.days} days -> {n_windows} windows x {len(grid)} scales")
    rows = []
    t_py = bench_fdmaa(pyfallback, r, grid, args.repeat)
    rows.append(("fdmaa fluctuation matrix", "python", t_py))
    if compiled is not None:
        t_c = bench_fdmaa(compiled, r, grid, args.repeat)
        rows.append(("fdmaa fluctuation matrix", "compiled", t_c))
        rows.append(("fdmaa fluctuation matrix", "speedup", t_py / t_c))

    t_py = bench_garch(pyfallback, r, args.repeat)
    rows.append(("garch nll+grad x25", "python", t_py))
    if compiled is not None:
        t_c = bench_garch(compiled, r, args.repeat)
        rows.append(("garch nll+grad x25", "compiled", t_c))
        rows.append(("garch nll+grad x25", "speedup", t_py / t_c))

    for name, kind, value in rows:
        if kind == "speedup":
            print(f"{name:30s} {kind:>9s}: {value:6.1f}x")
        else:
            print(f"{name:30s} {kind:>9s}: {value * 1e3:8.1f} ms")
    if compiled is None:
        print("compiled extension unavailable; fallback timings only")


if __name__ == "__main__":
    main()
