"""Benchmark the compiled evaluation kernel against the pure fallback.

The kernel fuses the hot loop of every strategy evaluation: pick each
kept mutant's highest-priority killing test and count how many mutants
of the whole cache those tests kill. Run as

    python benchmarks/bench_kernels.py [--mutants N] [--subsets K]

and compare the two per-call times. Both kernels are exercised on the
same inputs and must agree exactly before timing starts.
"""

from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from mutreduce import build_index, synth_cache
from mutreduce._kernels import pure as pure_kernel

try:
    _core = importlib.import_module("mutreduce._kernels._core")
except ImportError:
    _core = None


def _compiled_call(index, subset):
    return _core.select_and_count(
        subset, index.killer_indptr, index.killer_tests,
        index.test_indptr, index.test_mutants,
        index.n_tests, index.n_mutants)


def _pure_call(index, subset):
    return pure_kernel.select_and_count(
        subset, index.killer_indptr, index.killer_tests, index.kill_matrix)


def _time_kernel(call, index, subsets, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for subset in subsets:
            call(index, subset)
        best = min(best, time.perf_counter() - start)
    return best / len(subsets)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--operators", type=int, default=8)
    parser.add_argument("--mutants", type=int, default=5000)
    parser.add_argument("--tests", type=int, default=300)
    parser.add_argument("--subsets", type=int, default=200,
                        help="random mutant subsets per timing pass")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cache = synth_cache(n_operators=args.operators, n_mutants=args.mutants,
                        n_tests=args.tests, seed=args.seed)
    index = build_index(cache)
    rng = np.random.default_rng(args.seed)
    subsets = []
    for _ in range(args.subsets):
        size = int(rng.integers(1, args.mutants + 1))
        subset = np.sort(rng.choice(args.mutants, size=size, replace=False))
        subsets.append(subset.astype(np.int32))

    print(f"cache: {args.mutants} mutants, {args.tests} tests, "
          f"{index.killable_count} killable")

    if _core is None:
        print("compiled kernel unavailable; timing pure kernel only")
        pure_time = _time_kernel(_pure_call, index, subsets, args.repeats)
        print(f"pure:     {pure_time * 1e6:9.1f} us/call")
        return

    for subset in subsets[:25]:
        tests_c, killed_c = _compiled_call(index, subset)
        tests_p, killed_p = _pure_call(index, subset)
        assert killed_c == killed_p, (killed_c, killed_p)
        assert np.array_equal(tests_c, tests_p), subset

    compiled_time = _time_kernel(_compiled_call, index, subsets, args.repeats)
    pure_time = _time_kernel(_pure_call, index, subsets, args.repeats)
    print(f"compiled: {compiled_time * 1e6:9.1f} us/call")
    print(f"pure:     {pure_time * 1e6:9.1f} us/call")
    print(f"speedup:  {pure_time / compiled_time:9.2f}x")


if __name__ == "__main__":
    main()
