#!/usr/bin/env python3
"""
Unit tests for pose_flc/fuzzy_gain.py

Run: python3 -m pytest tests/test_fuzzy_gain.py
"""

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest
import skfuzzy as fuzz

from pose_flc.errors import ConfigurationError, CoverageError
from pose_flc.fuzzy_gain import (
    LABELS,
    MAX_K_OP,
    PARAM_BOUNDS,
    RULE_TABLE,
    FlcParams,
    FuzzyGainScheduler,
    TriangularMF,
    build_model,
    consequent,
    gain_K,
    infer_kop,
    membership_curves,
    mf_centroid,
    random_params,
    tri_mu,
    triangle_memberships,
)


def _midpoint_model():
    return build_model(FlcParams.midpoint())


def test_tri_mu_shape():
    mf = TriangularMF(0.2, 0.4, 0.8)
    assert tri_mu(0.4, mf) == 1.0
    assert abs(tri_mu(0.3, mf) - 0.5) < 1e-12
    assert abs(tri_mu(0.6, mf) - 0.5) < 1e-12
    assert tri_mu(0.1, mf) == 0.0 and tri_mu(0.9, mf) == 0.0
    print("✓ triangle flanks")


def test_tri_mu_shoulders():
    assert tri_mu(0.0, TriangularMF(0.0, 0.0, 0.15)) == 1.0, "Left shoulder is 1 at the flat end"
    assert tri_mu(100.0, TriangularMF(50.0, 100.0, 100.0)) == 1.0, "Right shoulder is 1 at the flat end"
    with pytest.raises(ValueError):
        TriangularMF(0.3, 0.2, 0.4)


def test_tri_mu_is_continuous():
    mf = TriangularMF(0.1, 0.35, 0.5)
    x = np.linspace(0.0, 1.0, 10001)
    mu = np.array([tri_mu(v, mf) for v in x])
    steepest = 1.0 / min(mf.b - mf.a, mf.c - mf.b)
    jump = np.max(np.abs(np.diff(mu)))
    assert jump <= steepest * (x[1] - x[0]) + 1e-9, f"Jump {jump:.2e} exceeds the slope bound"
    print(f"✓ continuity (max step {jump:.2e})")


def test_repair_sorts_triples():
    values = list(FlcParams.midpoint().values)
    values[1:4] = [0.2, 0.0, 0.1]
    repaired = FlcParams(tuple(values)).repaired()
    assert (repaired.k(2), repaired.k(3), repaired.k(4)) == (0.0, 0.1, 0.2)
    print("✓ sort repair")


def test_repair_clamps_into_bounds():
    values = list(FlcParams.midpoint().values)
    values[0] = 0.9
    values[21] = -5.0
    repaired = FlcParams(tuple(values)).repaired()
    assert repaired.k(1) == 0.15, f"k1 should clamp to 0.15, got {repaired.k(1)}"
    assert repaired.k(22) == 30.0
    assert repaired.out_of_bounds() == []


def test_random_repaired_params_stay_in_bounds():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.uniform(-10.0, 110.0, size=22)
        repaired = FlcParams(tuple(x)).repaired()
        assert repaired.out_of_bounds() == [], "Repair must land inside every box"
        k = repaired.values
        for a, b, c in [(1, 2, 3), (4, 5, 6), (7, 8, 9), (12, 13, 14), (15, 16, 17), (18, 19, 20)]:
            assert k[a] <= k[b] <= k[c]


def test_params_validation():
    with pytest.raises(ConfigurationError):
        FlcParams((0.1,) * 21)
    with pytest.raises(ConfigurationError):
        FlcParams((float("nan"),) * 22)
    assert len(PARAM_BOUNDS) == 22


def test_midpoint_model_reports_gap():
    """The midpoint input partition leaves (0.075, 0.1) uncovered"""
    model = _midpoint_model()
    input_gaps = [g for g in model.coverage_gaps if g[0] == "input"]
    assert input_gaps, "Expected an input coverage gap for the midpoint model"
    _, lo, hi = input_gaps[0]
    assert 0.07 <= lo <= 0.08 and 0.09 <= hi < 0.1, f"Unexpected gap [{lo}, {hi}]"
    with pytest.raises(CoverageError):
        build_model(FlcParams.midpoint(), strict=True)
    print("✓ coverage gap detection")


def test_rule_table_layout():
    assert len(RULE_TABLE) == 5 and all(len(row) == 5 for row in RULE_TABLE)
    assert all(label in LABELS for row in RULE_TABLE for label in row), "Only the five labels are used"
    assert consequent("VL", "VL") == "VL"
    assert consequent("VS", "VS") == "VS"
    assert consequent("VS", "VL") == "L"
    assert consequent("VL", "VS") == "VL"
    assert consequent("M", "M") == "L"
    assert consequent("S", "S") == "M"


def test_all_rule_cells():
    # rows: de = VL, L, M, S, VS; columns: e = VL, L, M, S, VS
    expected = """
        VL VL VL L  L
        VL VL VL L  M
        VL VL L  M  M
        VL VL M  M  S
        VL VL M  S  VS
    """
    rows = [line.split() for line in expected.strip().splitlines()]
    order = ["VL", "L", "M", "S", "VS"]
    for i, de_label in enumerate(order):
        for j, e_label in enumerate(order):
            got = consequent(e_label, de_label)
            assert got == rows[i][j], f"Rule (e={e_label}, de={de_label}) gave {got}, expected {rows[i][j]}"


def test_corner_cells_fire_single_consequent():
    model = _midpoint_model()
    corners = [((1.0, 1.0), "VL"), ((0.0, 0.0), "VS"), ((0.0, 1.0), "L"), ((1.0, 0.0), "VL")]
    for (e, de), label in corners:
        expected = mf_centroid(model.output_mfs[label])
        k_op = infer_kop(e, de, model)
        assert abs(k_op - expected) < 1e-6, f"(e={e}, de={de}) gave {k_op}, expected {expected} ({label})"
    print("✓ corner cells")


def test_symmetric_output_centroid():
    assert abs(mf_centroid(TriangularMF(20.0, 35.0, 50.0)) - 35.0) < 1e-9
    assert gain_K(35.0) == 36.0


def test_kop_range_on_grid():
    rng = np.random.default_rng(5)
    grid = np.linspace(0.0, 1.0, 21)
    for _ in range(20):
        model = build_model(random_params(rng), quiet=True)
        for e in grid:
            for de in grid:
                k_op = infer_kop(e, de, model)
                assert 0.0 <= k_op <= 100.0, f"k_op {k_op} outside [0, 100]"
    print("✓ k_op range")


def test_vectorized_memberships_match_trimf():
    rng = np.random.default_rng(9)
    x = np.concatenate([np.linspace(0.0, 1.0, 201), rng.uniform(0.0, 1.0, 50)])
    for _ in range(20):
        model = build_model(random_params(rng), quiet=True)
        x_all = np.concatenate([x, model.input_feet.ravel()])
        got = triangle_memberships(x_all, model.input_feet)
        for col, label in enumerate(LABELS):
            expected = fuzz.trimf(x_all, list(model.input_feet[:, col]))
            assert np.array_equal(got[:, col], expected), f"{label} differs from trimf"
    shoulders = np.array([[0.0, 0.3], [0.0, 1.0], [0.2, 1.0]])
    mu = triangle_memberships(np.array([0.0, 0.1, 0.2, 1.0]), shoulders)
    assert np.array_equal(mu[:, 0], [1.0, 0.5, 0.0, 0.0])
    assert np.array_equal(mu[:, 1], [0.0, 0.0, 0.0, 1.0])
    print("✓ vectorized memberships")


def test_kop_never_exceeds_reachable_maximum():
    """The output partition caps k_op near 90, so K stays below about 91"""
    assert abs(MAX_K_OP - 90.0) < 1e-12
    rng = np.random.default_rng(13)
    grid = np.linspace(0.0, 1.0, 11)
    top = 0.0
    for _ in range(30):
        model = build_model(random_params(rng), quiet=True)
        top = max(top, max(infer_kop(e, de, model) for e in grid for de in grid))
    assert top <= MAX_K_OP + 0.5, f"k_op reached {top:.3f}"


def test_corner_monotonicity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        model = build_model(random_params(rng), quiet=True)
        assert infer_kop(1.0, 1.0, model) >= infer_kop(0.0, 0.0, model)


def test_empty_aggregate_gives_zero():
    """An input inside the coverage gap fires nothing"""
    model = _midpoint_model()
    assert infer_kop(0.09, 0.09, model) == 0.0


def test_gain_K():
    assert gain_K(0.0) == 1.0
    assert gain_K(100.0) == 101.0


def test_scheduler_and_curves():
    model = _midpoint_model()
    scheduler = FuzzyGainScheduler(model)
    assert scheduler.k_op(1.0, 1.0) == infer_kop(1.0, 1.0, model)
    x, curves = membership_curves(model, "output", points=101)
    assert len(x) == 101 and set(curves) == set(LABELS)
    assert curves["VS"][0] == 1.0
    with pytest.raises(ValueError):
        membership_curves(model, "rate")


if __name__ == "__main__":
    tests = [
        test_tri_mu_shape,
        test_tri_mu_shoulders,
        test_tri_mu_is_continuous,
        test_repair_sorts_triples,
        test_repair_clamps_into_bounds,
        test_random_repaired_params_stay_in_bounds,
        test_params_validation,
        test_midpoint_model_reports_gap,
        test_rule_table_layout,
        test_all_rule_cells,
        test_corner_cells_fire_single_consequent,
        test_symmetric_output_centroid,
        test_kop_range_on_grid,
        test_vectorized_memberships_match_trimf,
        test_kop_never_exceeds_reachable_maximum,
        test_corner_monotonicity,
        test_empty_aggregate_gives_zero,
        test_gain_K,
        test_scheduler_and_curves,
    ]
    failed = 0
    for test in tests:
        try:
            test()
        except Exception as e:
            print(f"FAILED {test.__name__}: {e}")
            failed += 1
    print(f"\nResults: {len(tests) - failed} passed, {failed} failed")
    sys.exit(1 if failed else 0)
