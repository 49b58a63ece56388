"""Compiled vs pure-Python kernels: agreement and wall time per call.

    python benchmarks/bench_kernels.py [--n 4096] [--repeat 200]
"""

import argparse
import timeit

import numpy as np

from ibsh import kernels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    x = np.linspace(-4, 4, args.n, endpoint=False)
    u = np.exp(-x * x) + 0.01 * rng.standard_normal(args.n)
    dx = x[1] - x[0]
    mods = kernels.backends()
    if "cython" not in mods:
        print("compiled backend not built; only the Python kernels are available")
    cases = {
        "full_rhs": lambda m: m.full_rhs(u, dx, 0.01, 1e-4),
        "nonlinear_rhs": lambda m: m.nonlinear_rhs(u, dx, 1e-4),
        "godunov_update": lambda m: m.godunov_update(u, 0.1, True),
    }
    print(f"n={args.n} repeat={args.repeat}")
    print(f"{'kernel':16s} {'backend':8s} {'us/call':>10s} {'max|diff|':>10s}")
    for name, call in cases.items():
        base = call(mods["python"])
        times = {}
        for label, mod in mods.items():
            t = timeit.timeit(lambda: call(mod), number=args.repeat) / args.repeat
            times[label] = t
            diff = float(np.max(np.abs(call(mod) - base)))
            print(f"{name:16s} {label:8s} {1e6 * t:10.1f} {diff:10.2e}")
        if "cython" in times:
            print(f"{name:16s} speedup  {times['python'] / times['cython']:10.2f}x")


if __name__ == "__main__":
    main()
