#!/usr/bin/env python3
"""Benchmark the compiled bitset kernel against the pure-Python fallback.

The hot loop of survivor selection is the greedy substitution scan:
restarts x pool^2 union evaluations over cover sets that, for real
targets with edge coverage, span tens of thousands of units.  This
script times both kernel backends on synthetic pools of that shape and
checks they produce identical results.

Usage: python3 benchmarks/bench_kernels.py [--pool 200] [--survivors 10]
                                           [--universe 50000] [--restarts 4]
"""

import argparse
import random
import time

from fuzzsmith.kernels import pure

try:
    from fuzzsmith.kernels import compiled
except ImportError:
    compiled = None


def make_pool(rng, pool_size, universe, density=0.02):
    sets = []
    per_set = max(1, int(universe * density))
    for _ in range(pool_size):
        size = rng.randint(per_set // 2, per_set * 2)
        sets.append(frozenset(rng.sample(range(universe), min(size, universe))))
    return sets


def bench(backend, sets, starts):
    matrix = backend.CoverMatrix(sets)
    began = time.perf_counter()
    outcomes = [matrix.greedy_scan(list(start)) for start in starts]
    elapsed = time.perf_counter() - began
    return elapsed, outcomes


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--pool", type=int, default=200)
    parser.add_argument("--survivors", type=int, default=10)
    parser.add_argument("--universe", type=int, default=50_000)
    parser.add_argument("--restarts", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    sets = make_pool(rng, args.pool, args.universe)
    starts = [rng.sample(range(args.pool), args.survivors) for _ in range(args.restarts)]

    print(
        f"pool={args.pool} survivors={args.survivors} "
        f"universe={args.universe} restarts={args.restarts}"
    )
    pure_time, pure_out = bench(pure, sets, starts)
    print(f"  pure      {pure_time:8.3f}s")
    if compiled is None:
        print("  compiled  (extension not built)")
        return
    compiled_time, compiled_out = bench(compiled, sets, starts)
    print(f"  compiled  {compiled_time:8.3f}s")
    assert pure_out == compiled_out, "backends disagreed"
    print(f"  speedup   {pure_time / compiled_time:8.2f}x (identical results)")


if __name__ == "__main__":
    main()
