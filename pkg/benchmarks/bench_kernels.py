#!/usr/bin/env python3
"""Benchmark the jitted distance/histogram kernels against the pure-numpy
fallbacks.

Run with the compiled path active (the default when numba is installed):

    python3 benchmarks/bench_kernels.py

The numpy fallback alone can be timed by re-running with AELAB_NO_NUMBA=1;
in that process the jitted columns are reported as unavailable.
"""

import time

import numpy as np

from aelab import ndcore


def bench(fn, *args, repeats=5, warmup=1):
    for _ in range(warmup):
        fn(*args)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    rng = np.random.default_rng(0)
    print(f"numba backend active: {ndcore.NUMBA_ENABLED}")
    print()
    print(f"{'kernel':<28}{'size':<22}{'numpy':>12}{'numba':>12}{'speedup':>10}")

    for n, m, d in ((500, 500, 32), (2000, 2000, 64)):
        a = rng.standard_normal((n, d))
        b = rng.standard_normal((m, d))
        t_np = bench(ndcore._pairwise_sq_numpy, a, b)
        if ndcore.NUMBA_ENABLED:
            t_nb = bench(ndcore._pairwise_sq_numba, a, b)
            speed = f"{t_np / t_nb:9.2f}x"
            t_nb_s = f"{t_nb * 1e3:10.2f}ms"
        else:
            speed, t_nb_s = "n/a", "n/a"
        print(f"{'pairwise_euclidean':<28}{f'{n}x{m}, d={d}':<22}"
              f"{t_np * 1e3:10.2f}ms{t_nb_s:>12}{speed:>10}")

    for size, bins in ((100_000, 32), (1_000_000, 64)):
        x = rng.random(size)
        y = rng.random(size)
        t_np = bench(ndcore._joint_hist_numpy, x, y, bins, 0.0, 1.0)
        if ndcore.NUMBA_ENABLED:
            t_nb = bench(ndcore._joint_hist_numba, x, y, bins, 0.0, 1.0)
            speed = f"{t_np / t_nb:9.2f}x"
            t_nb_s = f"{t_nb * 1e3:10.2f}ms"
        else:
            speed, t_nb_s = "n/a", "n/a"
        print(f"{'joint_histogram':<28}{f'n={size}, bins={bins}':<22}"
              f"{t_np * 1e3:10.2f}ms{t_nb_s:>12}{speed:>10}")


if __name__ == "__main__":
    main()
