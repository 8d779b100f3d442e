"""
Persistence - key/value files (params and run configs) and CSV artifacts.

Key/value syntax, shared by params and config files:
    # comment
    key = value          (UTF-8, one entry per line, order-insensitive)

CSV files are written with pandas at full double precision
(%.17g, '.' radix, '\\n' line ends) so re-exports are byte-identical.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pose_flc.errors import ConfigurationError, ParamsParseError
from pose_flc.fuzzy_gain import LABELS, N_PARAMS, FlcModel, FlcParams, membership_curves
from pose_flc.gsa import GsaResult
from pose_flc.models import RunConfig
from pose_flc.tuning_harness import EpisodeSeries, GainComparison, comparison_table

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"

PARAM_KEYS: Tuple[str, ...] = tuple(f"k{i}" for i in range(1, N_PARAMS + 1))
PARAMS_EXTRA_KEYS: Tuple[str, ...] = ("gamma", "s_delta", "seed")


# -------------------------
# Key/value files
# -------------------------

def parse_keyvalue_text(text: str, path: str = "<input>") -> Dict[str, Tuple[str, int]]:
    """Parse `key = value` lines into {key: (raw value, line number)}."""
    entries: Dict[str, Tuple[str, int]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParamsParseError(f"expected 'key = value', got '{raw_line.strip()}'", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParamsParseError("missing key before '='", path, lineno)
        if not value:
            raise ParamsParseError(f"missing value for '{key}'", path, lineno)
        if key in entries:
            raise ParamsParseError(f"duplicate key '{key}' (first on line {entries[key][1]})", path, lineno)
        entries[key] = (value, lineno)
    return entries


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"{path}: cannot read ({e.strerror or e})") from e


def _write_text(path: PathLike, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise ConfigurationError(f"{path}: cannot write ({e.strerror or e})") from e


def parse_keyvalue_file(path: PathLike) -> Dict[str, Tuple[str, int]]:
    return parse_keyvalue_text(_read_text(path), str(path))


def load_run_config(path: PathLike) -> RunConfig:
    """Load a scenario/filter/search/cost config file."""
    config = RunConfig.from_keyvalues(parse_keyvalue_file(path), str(path))
    logger.info("Loaded config %s", path)
    return config


# -------------------------
# Params file
# -------------------------

@dataclass(frozen=True)
class ParamsFile:
    """Tuned membership parameters plus the filter settings they were tuned with."""
    params: FlcParams
    gamma: float = 1.0
    s_delta: float = 10.0
    seed: int = 0


def format_params(params_file: ParamsFile) -> str:
    lines = ["# fuzzy gain membership parameters"]
    lines += [f"{key} = {value!r}" for key, value in params_file.params.as_mapping().items()]
    lines += [
        f"gamma = {float(params_file.gamma)!r}",
        f"s_delta = {float(params_file.s_delta)!r}",
        f"seed = {int(params_file.seed)}",
    ]
    return "\n".join(lines) + "\n"


def save_params(
    params: FlcParams,
    path: PathLike,
    gamma: float = 1.0,
    s_delta: float = 10.0,
    seed: int = 0,
) -> None:
    _write_text(path, format_params(ParamsFile(params, gamma, s_delta, seed)))
    logger.info("Saved params to %s", path)


def parse_params(entries: Dict[str, Tuple[str, int]], path: str = "<input>") -> ParamsFile:
    """Validate parsed entries as a params file; values must lie inside their boxes."""
    for key, (_, line) in entries.items():
        if key not in PARAM_KEYS and key not in PARAMS_EXTRA_KEYS:
            raise ParamsParseError(f"unknown key '{key}'", path, line)
    for key in PARAM_KEYS:
        if key not in entries:
            raise ParamsParseError(f"missing key '{key}'", path)

    def number(key: str, cast=float):
        raw, line = entries[key]
        try:
            value = cast(raw)
        except ValueError:
            raise ParamsParseError(f"{key}: expected a number, got '{raw}'", path, line) from None
        if not np.isfinite(value):
            raise ParamsParseError(f"{key}: expected a finite number, got '{raw}'", path, line)
        return value

    params = FlcParams(tuple(number(k) for k in PARAM_KEYS))
    violations = params.out_of_bounds()
    if violations:
        key, value, (lo, hi) = violations[0]
        raise ConfigurationError(f"{path}: {key} = {value!r} outside bound [{lo:g}, {hi:g}]")

    gamma = number("gamma") if "gamma" in entries else 1.0
    s_delta = number("s_delta") if "s_delta" in entries else 10.0
    seed = number("seed", int) if "seed" in entries else 0
    if gamma <= 0 or s_delta <= 0:
        raise ConfigurationError(f"{path}: gamma and s_delta must be positive")
    return ParamsFile(params, gamma, s_delta, seed)


def load_params_file(path: PathLike) -> ParamsFile:
    return parse_params(parse_keyvalue_file(path), str(path))


def load_params(path: PathLike) -> FlcParams:
    return load_params_file(path).params


# -------------------------
# CSV artifacts
# -------------------------

def _write_frame(frame: pd.DataFrame, path: PathLike) -> None:
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ConfigurationError(f"{path}: cannot write ({e.strerror or e})") from e


def export_csv(series: EpisodeSeries, path: PathLike) -> None:
    """One header line plus one row per grid step."""
    _write_frame(series.to_frame(), path)
    logger.info("Wrote %d rows to %s", len(series), path)


def import_csv(path: PathLike) -> EpisodeSeries:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except OSError as e:
        raise ConfigurationError(f"{path}: cannot read ({e.strerror or e})") from e
    return EpisodeSeries.from_frame(frame)


def export_trace_csv(result: GsaResult, path: PathLike) -> None:
    frame = pd.DataFrame({
        "iter": np.arange(len(result.trace)),
        "best_cost": result.trace,
        "G": result.gravity,
    })
    _write_frame(frame, path)


def export_membership_csv(model: FlcModel, path: PathLike) -> None:
    """Membership curves of both partitions, columns variable,x,VS,S,M,L,VL."""
    frames = []
    for variable in ("input", "output"):
        x, curves = membership_curves(model, variable)
        frame = pd.DataFrame({"variable": variable, "x": x})
        for label in LABELS:
            frame[label] = curves[label]
        frames.append(frame)
    _write_frame(pd.concat(frames, ignore_index=True), path)


def export_comparison_csv(results: Sequence[GainComparison], path: PathLike) -> None:
    _write_frame(pd.DataFrame(comparison_table(results)), path)

