"""Benchmark the backoff-chain Monte Carlo backends (numba vs pure numpy).

Run from the repository root:

    python3 benchmarks/bench_chain.py [--slots 10000000]
"""

import argparse
import time

from dbcasim import chain_mc
from dbcasim.markov import MacTiming


def time_backend(backend, n, W, m, upsilon, n_slots, repeats=3):
    timing = MacTiming()
    # Warm-up triggers JIT compilation / allocator effects.
    chain_mc.simulate_chain(n, W, m, upsilon, 100_000, timing, seed=0, backend=backend)
    best = float("inf")
    stats = None
    for rep in range(repeats):
        start = time.perf_counter()
        stats = chain_mc.simulate_chain(n, W, m, upsilon, n_slots, timing,
                                        seed=rep, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, stats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--slots", type=int, default=10_000_000)
    parser.add_argument("--stations", type=int, default=10)
    parser.add_argument("--upsilon", type=float, default=0.3)
    args = parser.parse_args()

    backends = ["numpy"]
    if chain_mc._HAVE_NUMBA:
        backends.insert(0, "numba")

    print(f"chain MC: n={args.stations} W=16 m=5 upsilon={args.upsilon} "
          f"slots={args.slots:,}")
    results = {}
    for backend in backends:
        elapsed, stats = time_backend(backend, args.stations, 16, 5,
                                      args.upsilon, args.slots)
        results[backend] = elapsed
        rate = args.slots / elapsed / 1e6
        print(f"  {backend:>6}: {elapsed:8.3f} s   {rate:8.1f} Mslots/s   "
              f"nu_hat={stats.nu_hat:.5f} T_hat={stats.throughput_hat:.5f}")
    if len(results) == 2:
        print(f"  speedup numba/numpy: {results['numpy'] / results['numba']:.1f}x")


if __name__ == "__main__":
    main()
