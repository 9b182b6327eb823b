"""Compare the compiled kernels against the pure-Python fallback.

Times the three hot kernels in isolation and an end-to-end solve per
backend (the solve runs in a subprocess so the import-time backend
selection applies).  Run from the repository root:

    python3 benchmarks/bench_backends.py
"""

from __future__ import annotations

import os
import subprocess
import sys
import time

import numpy as np


def best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    from rtcur._backend import py_kernels

    try:
        from rtcur._backend import _core as compiled
    except ImportError:
        print("compiled extension not built; kernel comparison skipped")
        return

    rng = np.random.default_rng(0)
    rows = []

    for m, p in ((52, 103), (108, 432), (150, 2500)):
        a = np.asfortranarray(rng.standard_normal((m, p)))
        tc = best_of(lambda: compiled.dense_svd(a.copy(order="F")), repeats=3)
        tp = best_of(lambda: py_kernels.dense_svd(a.copy(order="F")), repeats=3)
        rows.append((f"dense_svd {m}x{p}", tc, tp))

    x = rng.standard_normal(3_000_000)
    tc = best_of(lambda: compiled.hard_threshold(x, 0.5))
    tp = best_of(lambda: py_kernels.hard_threshold(x, 0.5))
    rows.append(("hard_threshold 3e6", tc, tp))

    flat = rng.standard_normal(8_000_000)
    bases = rng.integers(0, 4_000_000, size=200).astype(np.int64)
    tc = best_of(lambda: compiled.gather_columns(flat, bases, 17, 2000))
    tp = best_of(lambda: py_kernels.gather_columns(flat, bases, 17, 2000))
    rows.append(("gather 200x2000 s17", tc, tp))

    print(f"{'kernel':<24}{'compiled':>12}{'python':>12}{'speedup':>10}")
    for name, tc, tp in rows:
        print(f"{name:<24}{tc * 1e3:>10.2f}ms{tp * 1e3:>10.2f}ms{tp / tc:>9.1f}x")


SOLVE_SNIPPET = """
import time
import rtcur
from rtcur.solver import SolverConfig, rtcur as solve
from rtcur.synth import InstanceSpec, make_instance
from rtcur.tensor import inf_norm

x, low, _ = make_instance(InstanceSpec(n=3, d=80, r=3, alpha=0.1, seed=4))
cfg = SolverConfig(ranks=(3, 3, 3), zeta0=inf_norm(low), seed=1)
solve(x, cfg)  # warm caches
t0 = time.perf_counter()
res = solve(x, cfg)
print(f"{rtcur.backend_name} {time.perf_counter() - t0:.3f} {res.iterations}")
"""


def bench_solve():
    print()
    print("end-to-end solve, d=80, r=3, alpha=0.1:")
    for backend in ("compiled", "python"):
        env = dict(os.environ, RTCUR_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET],
            capture_output=True,
            text=True,
            env=env,
        )
        if out.returncode != 0:
            print(f"  {backend}: failed ({out.stderr.strip().splitlines()[-1]})")
            continue
        name, seconds, iters = out.stdout.split()
        print(f"  {name:<10} {float(seconds):.3f}s  ({iters} iterations)")


if __name__ == "__main__":
    bench_kernels()
    bench_solve()
