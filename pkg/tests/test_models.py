#!/usr/bin/env python3
"""Unit tests for pose_flc/models.py and the error-to-exit-code mapping"""

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import pytest

from pose_flc.errors import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    ConfigurationError,
    CoverageError,
    DegenerateMeasurementError,
    NumericalFailure,
    ParamsParseError,
    exit_code_for,
)
from pose_flc.models import CONFIG_KEYS, RunConfig, ScenarioConfig, validated


def test_from_keyvalues_builds_sections():
    entries = {
        "t_final": ("3", 1),
        "vector1": ("1, 0, 0", 2),
        "vector1_sigma": ("0.05", 3),
        "vector2": ("0, 1, 0", 4),
        "landmark1": ("1, 2, 3", 5),
        "iters": ("7", 6),
        "error_mode": ("oracle", 7),
        "ss_window": ("1, 3", 8),
    }
    cfg = RunConfig.from_keyvalues(entries)
    assert cfg.scenario.t_final == 3.0
    assert cfg.scenario.vectors[0].direction == (1.0, 0.0, 0.0)
    assert cfg.scenario.vectors[0].sigma == 0.05
    assert cfg.scenario.landmarks[0].position == (1.0, 2.0, 3.0)
    assert cfg.gsa.iterations == 7
    assert cfg.filter.error_mode == "oracle"
    assert cfg.cost.ss_window == (1.0, 3.0)
    print("✓ key/value config")


def test_from_keyvalues_reports_line():
    with pytest.raises(ParamsParseError) as exc:
        RunConfig.from_keyvalues({"dt": ("fast", 4)}, "run.cfg")
    assert exc.value.line == 4 and "run.cfg:4" in str(exc.value)


def test_t_final_must_be_whole_steps():
    with pytest.raises(ConfigurationError):
        validated(ScenarioConfig, t_final=1.005, dt=0.01)
    with pytest.raises(ConfigurationError):
        validated(ScenarioConfig, t_final=0.015, dt=0.01)
    assert ScenarioConfig().n_steps == 1500
    assert validated(ScenarioConfig, t_final=0.3, dt=0.1).n_steps == 3, "0.3 / 0.1 is 3 up to rounding"
    print("✓ whole-step horizon")


def test_validation_errors_become_configuration_errors():
    with pytest.raises(ConfigurationError):
        validated(ScenarioConfig, dt=-0.01)
    # default steady-state window ends at 14 s
    with pytest.raises(ConfigurationError):
        RunConfig.from_keyvalues({"t_final": ("2", 1)})
    with pytest.raises(ConfigurationError):
        RunConfig.from_keyvalues({"error_mode": ("guess", 1)})


def test_noiseless_scenario():
    quiet = ScenarioConfig().noiseless()
    assert quiet.sigma_omega == 0.0 and quiet.bias_v == (0.0, 0.0, 0.0)
    assert all(s.sigma == 0.0 and s.bias == (0.0, 0.0, 0.0) for s in quiet.vectors)
    assert quiet.n_steps == 1500 and quiet.n_vectors == 3


def test_exit_codes():
    assert exit_code_for(ConfigurationError("x")) == EXIT_CONFIG
    assert exit_code_for(CoverageError("input", (0.1, 0.2))) == EXIT_CONFIG
    assert exit_code_for(NumericalFailure("nan")) == EXIT_NUMERICAL
    assert exit_code_for(DegenerateMeasurementError("zero")) == EXIT_NUMERICAL
    assert exit_code_for(FloatingPointError()) == EXIT_NUMERICAL
    assert exit_code_for(KeyError("k")) is None
    assert "iters" in CONFIG_KEYS and "init_rotation" in CONFIG_KEYS


if __name__ == "__main__":
    tests = [
        test_from_keyvalues_builds_sections,
        test_from_keyvalues_reports_line,
        test_t_final_must_be_whole_steps,
        test_validation_errors_become_configuration_errors,
        test_noiseless_scenario,
        test_exit_codes,
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
