#!/usr/bin/env python3
"""
Benchmark: GSA Sanity
Runs the search on the 5-dimensional sphere function over 10 seeds.

Success Criteria:
- Final best cost < 1e-2 on at least 8 of 10 seeds
- Best-so-far trace non-increasing on every run
- Total time < 30 s

Usage:
    python3 benchmarks/gsa_sanity.py
"""

import sys
import time
from pathlib import Path

import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from pose_flc.gsa import SearchSpace, run_gsa
from pose_flc.models import GsaConfig
from pose_flc.objectives import sphere

SEEDS = range(10)
THRESHOLD = 1e-2
REQUIRED_PASSES = 8
TIME_LIMIT_S = 30.0


def benchmark_sphere():
    print("\n" + "=" * 50)
    print("  GSA Sanity Benchmark (sphere, dim 5)")
    print("=" * 50)

    space = SearchSpace.cube(-5.0, 5.0, 5)
    passes = 0
    monotone = True

    start = time.time()
    for seed in SEEDS:
        config = GsaConfig(nodes=30, iterations=250, seed=seed)
        result = run_gsa(space, sphere, config)
        ok = result.best_cost < THRESHOLD
        passes += ok
        if np.any(np.diff(result.trace) > 0):
            monotone = False
        print(f"  seed {seed}: best cost {result.best_cost:.3e} {'ok' if ok else 'MISS'}")
    elapsed = time.time() - start

    print("\n" + "=" * 50)
    print(f"  Passing seeds:   {passes}/{len(SEEDS)}")
    print(f"  Monotone traces: {monotone}")
    print(f"  Time:            {elapsed:.2f}s")
    print("=" * 50)

    if passes < REQUIRED_PASSES:
        print(f"\n❌ Benchmark FAILED: {passes} seeds below {THRESHOLD:g}, need {REQUIRED_PASSES}")
        sys.exit(1)
    if not monotone:
        print("\n❌ Benchmark FAILED: best-so-far trace increased")
        sys.exit(1)
    if elapsed > TIME_LIMIT_S:
        print(f"\n❌ Benchmark FAILED: {elapsed:.1f}s > {TIME_LIMIT_S:.0f}s")
        sys.exit(1)

    print("\n✅ Benchmark PASSED")


if __name__ == "__main__":
    try:
        benchmark_sphere()
    except KeyboardInterrupt:
        print("\n\nBenchmark interrupted by user.")
        sys.exit(1)
