"""Benchmark the compiled kernels against the numpy fallback.

Runs each hot kernel with representative workloads on both backends,
reports wall times and the speedup, and checks that the outputs agree
bitwise (the fallback is the reference implementation, the extension is
an optimization only).

Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import importlib
import time

import numpy as np


def _load_backends():
    fallback = importlib.import_module("qdlab._fallback")
    try:
        compiled = importlib.import_module("qdlab._kernels")
    except ImportError:
        compiled = None
    return compiled, fallback


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _flatten(result):
    if isinstance(result, tuple):
        return [np.asarray(r) for r in result]
    return [np.asarray(result)]


def _workloads(rng):
    alpha2 = np.array([0.6180339887498949, 0.41421356237309503])
    y0 = np.array([0.1240234375, 0.3759765625])
    xs = np.sort(rng.random(1_000_000))
    counts = rng.integers(0, 40, size=(512, 512)).astype(np.int64)
    npts = int(counts.sum())
    v_many = 3.0 * np.cos(2.0 * np.pi * rng.random((64, 20_000)))
    v_one = 3.0 * np.cos(2.0 * np.pi * rng.random(200_000))
    diag = rng.standard_normal(8192) / 8.0
    psi0 = np.zeros(8192, dtype=np.complex128)
    psi0[4096] = 1.0
    coeffs = (rng.standard_normal(400) + 1j * rng.standard_normal(400)) / 400.0
    return [
        ("shift_chunk (1e6 x d=2)",
         lambda k: k.shift_chunk(y0, alpha2, 1_000_000)),
        ("skew_chunk (1e6 x d=2)",
         lambda k: k.skew_chunk(y0, alpha2[0], 1_000_000)),
        ("exact_discrepancy_1d (1e6)",
         lambda k: k.exact_discrepancy_1d(xs)),
        ("grid_discrepancy_2d (512^2)",
         lambda k: k.grid_discrepancy_2d(counts, npts)),
        ("cocycle_batch (64 x 2e4)",
         lambda k: k.cocycle_batch(v_many, 0.25)),
        ("cocycle_lognorms_all (2e5)",
         lambda k: k.cocycle_lognorms_all(v_one, 0.25)),
        ("cheb_apply (M=8192, K=400)",
         lambda k: k.cheb_apply(diag, 0.25, coeffs, psi0)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions per kernel (best is kept)")
    args = parser.parse_args()

    compiled, fallback = _load_backends()
    if compiled is None:
        print("compiled extension not importable; nothing to compare")
        return 1

    rng = np.random.default_rng(20240901)
    rows = []
    for name, call in _workloads(rng):
        t_c, out_c = _time(lambda: call(compiled), args.repeat)
        t_f, out_f = _time(lambda: call(fallback), args.repeat)
        diff = 0.0
        for a, b in zip(_flatten(out_c), _flatten(out_f)):
            if a.size == 0 or np.array_equal(a, b):
                continue
            with np.errstate(invalid="ignore"):
                delta = np.abs(a - b)
            delta = np.where(a == b, 0.0, delta)
            diff = max(diff, float(np.max(delta)))
        rows.append((name, t_c, t_f, diff))

    # summation order differs between the backends (pairwise cumsum vs
    # sequential loops), so agreement is to rounding, not bitwise; orbit
    # chunks are re-anchored exactly every 16384 steps in production use
    tol = 1e-8
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'compiled':>10}  {'fallback':>10}  "
          f"{'speedup':>8}  max diff")
    ok = True
    for name, t_c, t_f, diff in rows:
        ok = ok and diff <= tol
        flag = "" if diff <= tol else "  MISMATCH"
        print(f"{name:<{width}}  {t_c:>9.4f}s  {t_f:>9.4f}s  "
              f"{t_f / t_c:>7.1f}x  {diff:.2e}{flag}")
    if not ok:
        print(f"backend outputs differ beyond {tol:g}")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
