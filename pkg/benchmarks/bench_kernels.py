#!/usr/bin/env python3
"""Benchmark: compiled kernel extension vs the pure-numpy fallback.

Kernel-level timings run both implementations in-process (both modules are
importable side by side); the optional end-to-end comparison re-runs a full
gamma* optimization in subprocesses with COVERTBC_BACKEND forced.

Usage: python benchmarks/bench_kernels.py [--end-to-end]
"""
import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from covertbc import _kernels_py

P1 = np.array([[0.2, 0.28, 0.28, 0.24], [0.05, 0.1, 0.45, 0.4], [0.07, 0.37, 0.4, 0.16]])
P2 = np.array([[0.1884, 0.324, 0.232, 0.2556], [0.0515, 0.215, 0.331, 0.4025],
               [0.0744, 0.399, 0.326, 0.2006]])
Q = np.array([[0.20, 0.19, 0.36, 0.25], [0.01, 0.37, 0.17, 0.45], [0.42, 0.35, 0.05, 0.18]])


def bench(name, fn, number=20000):
    best = min(timeit.repeat(fn, number=number, repeat=5)) / number
    print(f"  {name:30s} {best * 1e6:9.2f} us/call")
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--end-to-end", action="store_true",
                        help="also time a full gamma* run per backend")
    args = parser.parse_args()

    try:
        from covertbc import _kernels as compiled
    except ImportError:
        compiled = None
        print("compiled kernels not available; benchmarking the fallback only")

    rng = np.random.default_rng(0)
    p = rng.dirichlet(np.ones(4))
    q = rng.dirichlet(np.ones(4))
    d1 = np.array([_kernels_py.kl(P1[x], P1[0]) for x in range(3)])
    d2 = np.array([_kernels_py.kl(P2[x], P2[0]) for x in range(3)])
    ptilde = np.array([0.0, 0.7, 0.3])
    w = rng.dirichlet(np.ones(2))
    rows = rng.dirichlet(np.ones(3), size=2)

    cases = [
        ("kl", lambda k: (lambda: k.kl(p, q))),
        ("chi2", lambda k: (lambda: k.chi2(p, q))),
        ("mutual_information", lambda k: (lambda: k.mutual_information(ptilde, Q))),
        ("region_coeffs", lambda k: (lambda: k.region_coeffs(
            ptilde, w, rows, P1, P2, Q, 0, d1, d2))),
    ]
    speedups = {}
    for name, make in cases:
        print(f"{name}:")
        t_py = bench("python fallback", make(_kernels_py))
        if compiled is not None:
            t_c = bench("compiled", make(compiled))
            speedups[name] = t_py / t_c
    if speedups:
        print("\nspeedups (python / compiled):")
        for name, s in speedups.items():
            print(f"  {name:30s} {s:6.1f}x")

    if args.end_to_end:
        script = (
            "import time, numpy as np, covertbc as c\n"
            "p1 = np.array([[0.8,0.2],[0.2,0.8]]); q = np.array([[0.6,0.4],[0.4,0.6]])\n"
            "w = np.array([[0.9,0.1],[0.5,0.5]])\n"
            "m = c.BcWardenModel(c.Channel(p1), c.Channel(p1@w), c.Channel(q), 0)\n"
            "t0 = time.monotonic()\n"
            "g = c.gamma_star(m, c.OptimizerConfig())\n"
            "print(f'{c.BACKEND}: gamma*={g:.6f} in {time.monotonic()-t0:.2f}s')\n"
        )
        print("\nend-to-end gamma* (binary-input family, c=0.5):")
        for backend in ("python", "compiled") if compiled is not None else ("python",):
            env = dict(os.environ, COVERTBC_BACKEND=backend)
            out = subprocess.run([sys.executable, "-c", script], env=env,
                                 capture_output=True, text=True)
            print("  " + (out.stdout.strip() or out.stderr.strip()))


if __name__ == "__main__":
    main()
