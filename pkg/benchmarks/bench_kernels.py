"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--trials 1000000] [--atoms 10] [--repeat 3]
"""
import argparse
import time

import numpy as np

from reorg.kernels import available_backends


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return min(times), result


def survival_inputs(trials):
    # the SherpaTT profile: one Camera pair needing 1, four single resources
    p = np.full(6, 0.95)
    group = np.array([0, 0, 1, 2, 3, 4], dtype=np.int64)
    req = np.ones(5, dtype=np.int64)
    draws = np.random.default_rng(0).random((trials, p.size))
    return draws, p, group, req


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--atoms", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = available_backends()
    draws, p, group, req = survival_inputs(args.trials)
    print(f"{'kernel':<28}{'backend':<10}{'seconds':>10}  result")
    for name, mod in backends.items():
        for kernel in ("count_k_of_n", "count_blocks"):
            sec, n = best_of(args.repeat, lambda: getattr(mod, kernel)(draws, p, group, req))
            print(f"{kernel + f' ({args.trials})':<28}{name:<10}{sec:>10.4f}  {n}")
        sec, rows = best_of(args.repeat, lambda: sum(1 for _ in mod.restricted_growth_strings(args.atoms)))
        print(f"{f'partitions (n={args.atoms})':<28}{name:<10}{sec:>10.4f}  {rows}")


if __name__ == "__main__":
    main()
