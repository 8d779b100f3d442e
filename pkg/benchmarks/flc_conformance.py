#!/usr/bin/env python3
"""
Benchmark: FLC Conformance
Exhaustive checks of the fuzzy gain scheduler over random parameter sets.

Success Criteria:
- k_op in [0, 100] on a 101x101 (e, de) grid for 100 random valid parameter sets
- The four corner cells equal the centroid of their single consequent (1e-6)

Usage:
    python3 benchmarks/flc_conformance.py
"""

import sys
import time
from pathlib import Path

import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from pose_flc.fuzzy_gain import build_model, consequent, infer_kop, mf_centroid, random_params

PARAM_SETS = 100
GRID = np.linspace(0.0, 1.0, 101)
CORNERS = (("VL", "VL"), ("VS", "VS"), ("VS", "VL"), ("VL", "VS"))  # (e label, de label)
CORNER_VALUE = {"VS": 0.0, "VL": 1.0}


def benchmark_flc():
    print("\n" + "=" * 50)
    print("  FLC Conformance Benchmark")
    print("=" * 50)

    rng = np.random.default_rng(0)
    out_of_range = 0
    corner_misses = 0
    lowest, highest = np.inf, -np.inf

    start = time.time()
    for i in range(PARAM_SETS):
        model = build_model(random_params(rng), quiet=True)
        values = np.array([[infer_kop(e, de, model) for e in GRID] for de in GRID])
        lowest, highest = min(lowest, values.min()), max(highest, values.max())
        out_of_range += int(np.sum((values < 0.0) | (values > 100.0)))

        for e_label, de_label in CORNERS:
            k_op = infer_kop(CORNER_VALUE[e_label], CORNER_VALUE[de_label], model)
            expected = mf_centroid(model.output_mfs[consequent(e_label, de_label)])
            if abs(k_op - expected) > 1e-6:
                corner_misses += 1
                print(f"  set {i}: corner (e={e_label}, de={de_label}) {k_op:.6f} != {expected:.6f}")
        if (i + 1) % 20 == 0:
            print(f"  {i + 1}/{PARAM_SETS} parameter sets checked")
    elapsed = time.time() - start

    print("\n" + "=" * 50)
    print(f"  k_op range:      [{lowest:.3f}, {highest:.3f}]")
    print(f"  Out of range:    {out_of_range}")
    print(f"  Corner misses:   {corner_misses}")
    print(f"  Time:            {elapsed:.1f}s")
    print("=" * 50)

    if out_of_range or corner_misses:
        print("\n❌ Benchmark FAILED")
        sys.exit(1)
    print("\n✅ Benchmark PASSED")


if __name__ == "__main__":
    try:
        benchmark_flc()
    except KeyboardInterrupt:
        print("\n\nBenchmark interrupted by user.")
        sys.exit(1)
