#!/usr/bin/env python3
"""Benchmark: compiled pentadiagonal kernel vs the NumPy fallback.

Measures factorisation and repeated-solve throughput on stacks of mode
systems shaped like the production solver (one pentadiagonal system per
tangential Fourier mode, two right-hand sides for the real/imaginary parts),
plus one end-to-end time-stepping run.

Usage:  python3 benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import math
import time
from fractions import Fraction

import numpy as np

from degenlab import kernels
from degenlab.evolution import SchemeConfig, evolve
from degenlab.grid import build_grid
from degenlab.kernels import pylu
from degenlab.operator import OperatorParams

try:
    from degenlab.kernels import _pentalu
except ImportError:  # pragma: no cover
    _pentalu = None


def random_bands(rng, modes, n):
    ab5 = rng.standard_normal((modes, 5, n))
    ab5[:, 0, :2] = 0.0
    ab5[:, 1, :1] = 0.0
    ab5[:, 3, n - 1 :] = 0.0
    ab5[:, 4, n - 2 :] = 0.0
    ab5[:, 2, :] += 6.0  # keep the systems comfortably nonsingular
    return ab5


def time_call(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernel(impl, modes, n, solves, repeats):
    rng = np.random.default_rng(42)
    ab5 = random_bands(rng, modes, n)
    rhs = rng.standard_normal((modes, n, 2))

    t_factor = time_call(lambda: kernels.factor(ab5, impl=impl), repeats)
    fact = kernels.factor(ab5, impl=impl)

    def many_solves():
        for _ in range(solves):
            kernels.solve(fact, rhs, impl=impl)

    t_solve = time_call(many_solves, repeats) / solves
    return t_factor, t_solve


def bench_evolve(impl_name, steps=400):
    grid = build_grid(2.0 * math.pi, 64, 2.0, 96, 2.0, Fraction(2))
    params = OperatorParams(Fraction(1), grid)
    u0 = np.outer(np.sin(grid.x1), grid.xn**2 * (grid.Xmax - grid.xn) ** 2)
    u0 /= np.max(np.abs(u0))
    scheme = SchemeConfig(1.0, 1e-3, steps * 1e-3, steps)
    t0 = time.perf_counter()
    evolve(params, scheme, u0=u0)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    impls = [("numpy", pylu)]
    if _pentalu is not None:
        impls.append(("compiled", _pentalu))
    else:
        print("compiled kernel not built; benchmarking the fallback only")

    print(f"active backend at import: {kernels.backend_name()}\n")
    print(f"{'modes':>6} {'n':>6} {'impl':>9} {'factor [ms]':>12} {'solve [ms]':>11}")
    cases = [(33, 63), (65, 127), (129, 255), (257, 1023)]
    speedups = []
    for modes, n in cases:
        times = {}
        for name, impl in impls:
            t_factor, t_solve = bench_kernel(impl, modes, n, solves=20, repeats=args.repeats)
            times[name] = (t_factor, t_solve)
            print(
                f"{modes:>6} {n:>6} {name:>9} {1e3 * t_factor:>12.3f} {1e3 * t_solve:>11.3f}"
            )
        if len(times) == 2:
            s_factor = times["numpy"][0] / times["compiled"][0]
            s_solve = times["numpy"][1] / times["compiled"][1]
            speedups.append((modes, n, s_factor, s_solve))
            print(f"{'':>13} {'speedup':>9} {s_factor:>12.1f}x {s_solve:>10.1f}x")

    if _pentalu is not None:
        print("\nend-to-end implicit run (64 x 96 grid, 400 steps):")
        import degenlab.kernels as K

        for name, impl in impls:
            K._impl = impl  # route the production path through each backend
            elapsed = bench_evolve(name)
            print(f"  {name:>9}: {elapsed:.2f} s")
        K._impl = _pentalu


if __name__ == "__main__":
    main()
