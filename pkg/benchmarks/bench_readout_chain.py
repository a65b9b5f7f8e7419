#!/usr/bin/env python3
"""Benchmark the readout-chain kernel: compiled extension vs NumPy fallback.

Usage: python3 benchmarks/bench_readout_chain.py [--shots N] [--cycles N]
                                                 [--reps N]

Both implementations consume identical pre-drawn uniforms, so the benchmark
also cross-checks that their outputs match bit for bit.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hallab._kernels import readout_chain_py

try:
    from hallab._kernels import _readout_chain
except ImportError:
    _readout_chain = None


def draws(rng, shots, n):
    return (rng.random((shots, n)), rng.random((shots, n + 1)),
            rng.random((shots, n + 1)), rng.random((shots, n + 1)))


def bench(fn, flags, args, reps):
    best = float("inf")
    out = None
    for _ in range(reps):
        start = time.perf_counter()
        out = fn(flags, 0.005, 0.02, 0.124, 0.5, *args)
        best = min(best, time.perf_counter() - start)
    return best, np.asarray(out)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--shots", type=int, default=3000)
    parser.add_argument("--cycles", type=int, default=40)
    parser.add_argument("--reps", type=int, default=5)
    options = parser.parse_args()

    rng = np.random.Generator(np.random.PCG64(0))
    flags = rng.integers(0, 2, size=options.cycles).astype(np.uint8)
    args = draws(rng, options.shots, options.cycles)
    readouts = options.shots * (options.cycles + 1)

    t_py, out_py = bench(readout_chain_py.simulate_chain, flags, args,
                         options.reps)
    print(f"numpy fallback : {t_py * 1e3:8.2f} ms  "
          f"({readouts / t_py / 1e6:6.1f} M readouts/s)")

    if _readout_chain is None:
        print("compiled kernel: not built (pip install -e . with Cython)")
        return
    t_cy, out_cy = bench(_readout_chain.simulate_chain, flags, args,
                         options.reps)
    print(f"compiled kernel: {t_cy * 1e3:8.2f} ms  "
          f"({readouts / t_cy / 1e6:6.1f} M readouts/s)")
    print(f"speedup        : {t_py / t_cy:8.1f}x")
    print("outputs identical:", bool(np.array_equal(out_py, out_cy)))


if __name__ == "__main__":
    main()
