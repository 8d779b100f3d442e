#!/usr/bin/env python3
"""
Unit tests for pose_flc/persistence.py

Run: python3 -m pytest tests/test_persistence.py
"""

import logging
import shutil
import sys
import tempfile
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from pose_flc.errors import ConfigurationError, ParamsParseError
from pose_flc.fuzzy_gain import FlcParams, build_model, random_params
from pose_flc.gsa import GsaResult
from pose_flc.models import CostWeights, GsaConfig, ScenarioConfig
from pose_flc.persistence import (
    ParamsFile,
    export_csv,
    export_membership_csv,
    export_trace_csv,
    format_params,
    import_csv,
    load_params,
    load_params_file,
    load_run_config,
    parse_keyvalue_text,
    parse_params,
    save_params,
)
from pose_flc.tuning_harness import COLUMNS, episode_cost, run_episode

REPO = Path(__file__).parent.parent


def _params_text(**overrides):
    text = format_params(ParamsFile(FlcParams.midpoint()))
    for key, value in overrides.items():
        text = "\n".join(
            f"{key} = {value}" if line.split("=")[0].strip() == key else line
            for line in text.splitlines()
        ) + "\n"
    return text


def test_params_save_load_bit_identical():
    tmpdir = tempfile.mkdtemp()
    try:
        params = random_params(np.random.default_rng(21))
        path = Path(tmpdir) / "params.txt"
        save_params(params, path, gamma=2.5, s_delta=7.0, seed=4)
        loaded = load_params_file(path)
        assert loaded.params.values == params.values, "Every k must survive bit-for-bit"
        assert (loaded.gamma, loaded.s_delta, loaded.seed) == (2.5, 7.0, 4)
        assert load_params(path) == params
        print("✓ params save/load")
    finally:
        shutil.rmtree(tmpdir)


def test_save_logs_with_lazy_arguments():
    """Log records keep the format string and its arguments apart"""
    records = []
    handler = logging.Handler()
    handler.emit = records.append
    log = logging.getLogger("pose_flc.persistence")
    level = log.level
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    tmpdir = tempfile.mkdtemp()
    try:
        path = Path(tmpdir) / "params.txt"
        save_params(FlcParams.midpoint(), path)
    finally:
        log.removeHandler(handler)
        log.setLevel(level)
        shutil.rmtree(tmpdir)
    saved = [r for r in records if r.getMessage().startswith("Saved params")]
    assert saved, "save_params should log at INFO"
    assert saved[0].msg == "Saved params to %s"
    assert [str(a) for a in saved[0].args] == [str(path)]


def test_missing_parameter():
    text = "\n".join(line for line in _params_text().splitlines() if not line.startswith("k22"))
    with pytest.raises(ParamsParseError) as exc:
        parse_params(parse_keyvalue_text(text, "p.txt"), "p.txt")
    assert "missing key 'k22'" in str(exc.value)


def test_out_of_bound_parameter():
    text = _params_text(k1="0.99")
    with pytest.raises(ConfigurationError) as exc:
        parse_params(parse_keyvalue_text(text, "p.txt"), "p.txt")
    assert "k1" in str(exc.value) and "0.15" in str(exc.value), f"Unhelpful message: {exc.value}"
    print("✓ out-of-bound rejection")


def test_malformed_line_reports_line_number():
    text = "# header\nk1 0.05\n"
    with pytest.raises(ParamsParseError) as exc:
        parse_keyvalue_text(text, "p.txt")
    assert exc.value.line == 2
    assert str(exc.value).startswith("p.txt:2:")


def test_duplicate_and_unknown_keys():
    with pytest.raises(ParamsParseError) as exc:
        parse_keyvalue_text("k1 = 0.1\nk1 = 0.2\n")
    assert exc.value.line == 2

    text = _params_text() + "colour = blue\n"
    with pytest.raises(ParamsParseError) as exc:
        parse_params(parse_keyvalue_text(text))
    assert "colour" in str(exc.value)

    entries = parse_keyvalue_text("  # only a comment\n\ngamma = 2  # trailing\n")
    assert entries == {"gamma": ("2", 3)}


def test_load_published_config():
    cfg = load_run_config(REPO / "configs" / "reference_scenario.cfg")
    defaults = ScenarioConfig()
    assert cfg.scenario.dt == 0.01 and cfg.scenario.t_final == 15.0
    assert cfg.scenario.vectors == defaults.vectors
    assert cfg.scenario.landmarks == defaults.landmarks
    assert cfg.scenario.cross_vector
    assert cfg.gsa == GsaConfig()
    assert cfg.cost == CostWeights()
    assert len(cfg.init_rotation) == 9
    print("✓ published config")


def test_bad_config_key():
    tmpdir = tempfile.mkdtemp()
    try:
        path = Path(tmpdir) / "bad.cfg"
        path.write_text("dt = 0.01\nspeed = 3\n", encoding="utf-8")
        with pytest.raises(ParamsParseError) as exc:
            load_run_config(path)
        assert exc.value.line == 2
        with pytest.raises(ConfigurationError):
            load_run_config(Path(tmpdir) / "missing.cfg")
    finally:
        shutil.rmtree(tmpdir)


def test_series_csv():
    tmpdir = tempfile.mkdtemp()
    try:
        scenario = ScenarioConfig(t_final=2.0)
        weights = CostWeights(tr_window=(0.0, 0.5), ss_window=(1.0, 2.0))
        series = run_episode(5.0, scenario)
        first = Path(tmpdir) / "a.csv"
        second = Path(tmpdir) / "b.csv"

        export_csv(series, first)
        lines = first.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(COLUMNS)
        assert len(lines) == 202, f"Header plus 201 rows, got {len(lines)}"
        assert lines[1].split(",")[0] == "0"

        loaded = import_csv(first)
        assert np.array_equal(loaded.table, series.table), "CSV must hold full double precision"
        assert episode_cost(loaded, weights) == episode_cost(series, weights)

        export_csv(loaded, second)
        assert first.read_bytes() == second.read_bytes(), "Re-export must be byte-identical"
        print("✓ series CSV")
    finally:
        shutil.rmtree(tmpdir)


def test_trace_and_membership_csv():
    tmpdir = tempfile.mkdtemp()
    try:
        result = GsaResult(np.zeros(2), 1.0, trace=[3.0, 2.0, 1.0], gravity=[100.0, 50.0, 25.0])
        trace = Path(tmpdir) / "trace.csv"
        export_trace_csv(result, trace)
        lines = trace.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "iter,best_cost,G"
        assert lines[1] == "0,3,100" and len(lines) == 4

        membership = Path(tmpdir) / "membership.csv"
        export_membership_csv(build_model(FlcParams.midpoint(), quiet=True), membership)
        lines = membership.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "variable,x,VS,S,M,L,VL"
        assert lines[1].startswith("input,0,1,")
        assert any(line.startswith("output,") for line in lines)
    finally:
        shutil.rmtree(tmpdir)


if __name__ == "__main__":
    tests = [
        test_params_save_load_bit_identical,
        test_save_logs_with_lazy_arguments,
        test_missing_parameter,
        test_out_of_bound_parameter,
        test_malformed_line_reports_line_number,
        test_duplicate_and_unknown_keys,
        test_load_published_config,
        test_bad_config_key,
        test_series_csv,
        test_trace_and_membership_csv,
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
