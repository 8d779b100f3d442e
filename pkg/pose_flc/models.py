"""Pydantic models for scenario, filter, search and cost configuration."""

from __future__ import annotations

import math
import re
from typing import Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from pose_flc.errors import ConfigurationError, ParamsParseError

Vec3T = Tuple[float, float, float]

# Published initial estimate (rounded to three decimals, not orthonormal)
REFERENCE_INIT_ROTATION: Tuple[float, ...] = (
    -0.829, 0.293, 0.343,
    0.399, 0.157, 0.903,
    0.210, 0.943, -0.257,
)
REFERENCE_INIT_POSITION: Vec3T = (4.0, -3.0, 5.0)

_INV_SQRT3 = 1.0 / math.sqrt(3.0)


def _finite(values, name: str):
    if not all(math.isfinite(float(v)) for v in values):
        raise ValueError(f"{name} must be finite")
    return values


# ── Sensors ─────────────────────────────────────────────────────

class VectorSensor(BaseModel):
    """Known inertial direction observed in the body frame."""
    model_config = ConfigDict(frozen=True)

    direction: Vec3T
    bias: Vec3T = (0.0, 0.0, 0.0)
    sigma: float = Field(0.0, ge=0.0)

    @field_validator("direction", "bias")
    @classmethod
    def _check_finite(cls, v, info):
        return _finite(v, info.field_name)


class LandmarkSensor(BaseModel):
    """Known inertial landmark observed as a body-frame position."""
    model_config = ConfigDict(frozen=True)

    position: Vec3T
    bias: Vec3T = (0.0, 0.0, 0.0)
    sigma: float = Field(0.0, ge=0.0)

    @field_validator("position", "bias")
    @classmethod
    def _check_finite(cls, v, info):
        return _finite(v, info.field_name)


REFERENCE_VECTORS = (
    VectorSensor(direction=(_INV_SQRT3, -_INV_SQRT3, _INV_SQRT3), bias=(0.1, -0.1, 0.1), sigma=0.1),
    VectorSensor(direction=(0.0, 0.0, 1.0), bias=(0.0, 0.0, 0.1), sigma=0.1),
)
REFERENCE_LANDMARKS = (
    LandmarkSensor(position=(0.5, math.sqrt(2.0), 1.0), sigma=0.1),
)


# ── Scenario ────────────────────────────────────────────────────

# Relative slack on t_final / dt being an integer
STEP_TOL = 1e-9

class ScenarioConfig(BaseModel):
    """Simulated trajectory and sensor suite. Defaults reproduce the published scenario."""
    model_config = ConfigDict(frozen=True)

    dt: float = Field(0.01, gt=0.0)
    t_final: float = 15.0
    bias_omega: Vec3T = (0.1, -0.1, 0.1)
    bias_v: Vec3T = (0.2, 0.5, 0.1)
    sigma_omega: float = Field(0.2, ge=0.0)
    sigma_v: float = Field(0.1, ge=0.0)
    vectors: Tuple[VectorSensor, ...] = REFERENCE_VECTORS
    cross_vector: bool = True  # add v3 = v1 x v2 from the first two vectors
    landmarks: Tuple[LandmarkSensor, ...] = REFERENCE_LANDMARKS
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_span(self) -> ScenarioConfig:
        if not math.isfinite(self.t_final) or self.t_final < self.dt:
            raise ValueError(f"t_final ({self.t_final}) must be >= dt ({self.dt})")
        steps = self.t_final / self.dt
        if abs(steps - round(steps)) > STEP_TOL * steps:
            raise ValueError(f"t_final ({self.t_final}) must be a whole number of dt ({self.dt}) steps")
        if self.cross_vector and len(self.vectors) < 2:
            raise ValueError("cross_vector needs at least two vectors")
        _finite(self.bias_omega, "bias_omega")
        _finite(self.bias_v, "bias_v")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def n_vectors(self) -> int:
        return len(self.vectors) + (1 if self.cross_vector else 0)

    def noiseless(self) -> ScenarioConfig:
        """Same sensors with every bias and noise level zeroed."""
        return self.model_copy(update={
            "bias_omega": (0.0, 0.0, 0.0),
            "bias_v": (0.0, 0.0, 0.0),
            "sigma_omega": 0.0,
            "sigma_v": 0.0,
            "vectors": tuple(VectorSensor(direction=s.direction) for s in self.vectors),
            "landmarks": tuple(LandmarkSensor(position=s.position) for s in self.landmarks),
        })


# ── Filter ──────────────────────────────────────────────────────

class FilterConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma: float = Field(1.0, gt=0.0)
    s_delta: float = Field(10.0, gt=0.0)
    error_mode: Literal["measurable", "oracle"] = "measurable"
    normalized_vectors: bool = False
    vector_weights: Optional[Tuple[float, ...]] = None
    landmark_weights: Optional[Tuple[float, ...]] = None
    reorthonormalize_every: int = Field(1000, ge=1)

    @field_validator("vector_weights", "landmark_weights")
    @classmethod
    def _positive(cls, v):
        if v is not None and any(not (w > 0.0) for w in v):
            raise ValueError("correction weights must be positive")
        return v


# ── Search ──────────────────────────────────────────────────────

class GsaConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    nodes: int = Field(100, ge=2)
    iterations: int = Field(250, ge=1)
    g0: float = Field(3.0, gt=0.0)  # distances are box-normalized, see gsa.node_force
    alpha: float = Field(20.0, ge=0.0)
    delta: float = Field(1e-9, gt=0.0)
    kbest_min: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)


class CostWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    w_tr: float = Field(0.3, gt=0.0)
    w_p: float = Field(0.2, gt=0.0)
    tr_window: Tuple[float, float] = (0.0, 1.0)
    ss_window: Tuple[float, float] = (4.0, 14.0)

    @field_validator("tr_window", "ss_window")
    @classmethod
    def _ordered(cls, v):
        if v[0] > v[1] or v[0] < 0.0:
            raise ValueError(f"window {v} must satisfy 0 <= start <= end")
        return v


# ── Complete run ────────────────────────────────────────────────

class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: ScenarioConfig = ScenarioConfig()
    filter: FilterConfig = FilterConfig()
    gsa: GsaConfig = GsaConfig()
    cost: CostWeights = CostWeights()
    init_rotation: Tuple[float, ...] = REFERENCE_INIT_ROTATION
    init_position: Vec3T = REFERENCE_INIT_POSITION

    @field_validator("init_rotation")
    @classmethod
    def _nine(cls, v):
        if len(v) != 9:
            raise ValueError("init_rotation needs 9 values (row-major)")
        return _finite(v, "init_rotation")

    @model_validator(mode="after")
    def _windows_inside_episode(self) -> RunConfig:
        end = max(self.cost.tr_window[1], self.cost.ss_window[1])
        if end > self.scenario.t_final + 1e-9:
            raise ValueError(
                f"cost window end {end} s lies beyond t_final {self.scenario.t_final} s"
            )
        return self

    @classmethod
    def from_keyvalues(cls, entries: Mapping[str, Tuple[str, int]], path: str = "<config>") -> RunConfig:
        """Build a RunConfig from parsed `key = value` entries (value, line)."""
        sections: Dict[str, dict] = {"scenario": {}, "filter": {}, "gsa": {}, "cost": {}, "run": {}}
        vectors: Dict[int, dict] = {}
        landmarks: Dict[int, dict] = {}

        for key, (raw, line) in entries.items():
            try:
                indexed = _INDEXED_KEY.match(key)
                if indexed:
                    kind, idx, attr = indexed.group(1), int(indexed.group(2)), indexed.group(3)
                    target = vectors if kind == "vector" else landmarks
                    field = attr or ("direction" if kind == "vector" else "position")
                    target.setdefault(idx, {})[field] = (
                        _parse_float(raw) if attr == "sigma" else _parse_vec(raw, 3)
                    )
                    continue
                if key not in _KEY_TABLE:
                    raise ValueError(f"unknown key '{key}'")
                section, field, parser = _KEY_TABLE[key]
                sections[section][field] = parser(raw)
            except ValueError as e:
                raise ParamsParseError(str(e), path=path, line=line) from e

        if vectors:
            sections["scenario"]["vectors"] = tuple(vectors[i] for i in sorted(vectors))
        if landmarks:
            sections["scenario"]["landmarks"] = tuple(landmarks[i] for i in sorted(landmarks))

        return validated(
            cls,
            scenario=validated(ScenarioConfig, **sections["scenario"]),
            filter=validated(FilterConfig, **sections["filter"]),
            gsa=validated(GsaConfig, **sections["gsa"]),
            cost=validated(CostWeights, **sections["cost"]),
            **sections["run"],
        )


def validated(model_cls, **kwargs):
    """Instantiate a pydantic model, re-raising validation failures as ConfigurationError."""
    try:
        return model_cls(**kwargs)
    except ValidationError as e:
        raise ConfigurationError(f"{model_cls.__name__}: {e}") from e


# ── Value parsers ───────────────────────────────────────────────

def _parse_float(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"expected a number, got '{raw}'") from None
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got '{raw}'")
    return value


def _parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"expected an integer, got '{raw}'") from None


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got '{raw}'")


def _parse_vec(raw: str, n: Optional[int] = None) -> Tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    values = tuple(_parse_float(p) for p in parts)
    if n is not None and len(values) != n:
        raise ValueError(f"expected {n} comma-separated values, got {len(values)}")
    return values


def _parse_str(raw: str) -> str:
    return raw.strip()


_INDEXED_KEY = re.compile(r"^(vector|landmark)(\d+)(?:_(bias|sigma))?$")

_KEY_TABLE = {
    # scenario
    "dt": ("scenario", "dt", _parse_float),
    "t_final": ("scenario", "t_final", _parse_float),
    "seed": ("scenario", "seed", _parse_int),
    "bias_omega": ("scenario", "bias_omega", lambda r: _parse_vec(r, 3)),
    "bias_v": ("scenario", "bias_v", lambda r: _parse_vec(r, 3)),
    "sigma_omega": ("scenario", "sigma_omega", _parse_float),
    "sigma_v": ("scenario", "sigma_v", _parse_float),
    "vector_cross": ("scenario", "cross_vector", _parse_bool),
    # filter
    "gamma": ("filter", "gamma", _parse_float),
    "s_delta": ("filter", "s_delta", _parse_float),
    "error_mode": ("filter", "error_mode", _parse_str),
    "normalized_vectors": ("filter", "normalized_vectors", _parse_bool),
    "vector_weights": ("filter", "vector_weights", _parse_vec),
    "landmark_weights": ("filter", "landmark_weights", _parse_vec),
    "reorthonormalize_every": ("filter", "reorthonormalize_every", _parse_int),
    # search
    "nodes": ("gsa", "nodes", _parse_int),
    "iters": ("gsa", "iterations", _parse_int),
    "g0": ("gsa", "g0", _parse_float),
    "alpha": ("gsa", "alpha", _parse_float),
    "delta": ("gsa", "delta", _parse_float),
    "kbest_min": ("gsa", "kbest_min", _parse_int),
    "gsa_seed": ("gsa", "seed", _parse_int),
    "workers": ("gsa", "workers", _parse_int),
    # cost
    "w_tr": ("cost", "w_tr", _parse_float),
    "w_p": ("cost", "w_p", _parse_float),
    "tr_window": ("cost", "tr_window", lambda r: _parse_vec(r, 2)),
    "ss_window": ("cost", "ss_window", lambda r: _parse_vec(r, 2)),
    # initial estimate
    "init_rotation": ("run", "init_rotation", lambda r: _parse_vec(r, 9)),
    "init_position": ("run", "init_position", lambda r: _parse_vec(r, 3)),
}

CONFIG_KEYS: List[str] = sorted(_KEY_TABLE)
