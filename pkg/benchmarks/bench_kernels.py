#!/usr/bin/env python3
"""Numba vs numpy timings for the hot kernels.

Both backends are called directly (``*_numba`` / ``*_numpy``), so the
``BIMULT_NUMBA`` flag does not matter here.  Outputs are cross-checked
before timing.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from bimult import kernels


def _best(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng):
    c = lambda *s: rng.normal(size=s) + 1j * rng.normal(size=s)
    out = []
    for M in (256, 1024, 2048):
        out.append(("antidiag_sum", f"M={M}", (c(M, M),)))
    for M in (32, 64):
        x = np.linspace(-1, 1, M, endpoint=False)
        k = np.arange(-M // 2, M // 2, dtype=float)
        out.append(("bilinear_bruteforce", f"M={M}", (c(M, M), c(M), c(M), x, k, 2.0)))
    for M in (16, 32):
        x = np.linspace(-1, 1, M, endpoint=False)
        k = np.arange(-M // 2, M // 2, dtype=float)
        out.append(("trilinear_bruteforce", f"M={M}",
                    (c(M, M, M), c(M), c(M), c(M), x, k, 2.0)))
    for M in (1024, 8192):
        a = np.abs(rng.normal(size=M))
        out.append(("window_averages", f"M={M}", (a, kernels.dyadic_widths(M))))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    cases = _cases(rng)

    print("Warming up numba (first calls compile)...")
    t0 = time.perf_counter()
    for name, _, a in cases:
        getattr(kernels, f"{name}_numba")(*a)
    print(f"JIT warmup: {time.perf_counter() - t0:.1f}s\n")

    print(f"{'kernel':<22} {'size':>8} {'numpy (s)':>11} {'numba (s)':>11} {'speedup':>8} {'agree':>6}")
    print("-" * 72)
    for name, size, a in cases:
        f_np = getattr(kernels, f"{name}_numpy")
        f_nb = getattr(kernels, f"{name}_numba")
        r_np, r_nb = f_np(*a), f_nb(*a)
        ok = np.allclose(r_np, r_nb, rtol=1e-10, atol=1e-12 * np.abs(r_np).max())
        t_np = _best(f_np, a, args.repeat)
        t_nb = _best(f_nb, a, args.repeat)
        print(f"{name:<22} {size:>8} {t_np:>11.5f} {t_nb:>11.5f} {t_np / t_nb:>7.1f}x "
              f"{'ok' if ok else 'FAIL':>6}")


if __name__ == "__main__":
    main()
