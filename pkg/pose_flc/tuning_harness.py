"""
Tuning Harness - episodes, the transient/steady-state cost, and the search
over fuzzy membership parameters.

An episode runs the simulator and the filter side by side for t_final
seconds (rows t = 0, dt, ..., t_final) and records truth, estimate, error
norms and the gain actually used. Its cost is

    C = w_tr * (sum ||R_err||_I + w_p sum ||P_err||)   over tr_window
          +    (sum ||R_err||_I + w_p sum ||P_err||)   over ss_window

Tuning searches the 22 membership parameters with GSA; every candidate is
scored on the same measurement stream (common random numbers).
"""

from __future__ import annotations

import hashlib
import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pose_flc.errors import ConfigurationError, NumericalFailure
from pose_flc.fuzzy_gain import (
    PARAM_BOUNDS,
    FlcModel,
    FlcParams,
    FuzzyGainScheduler,
    build_model,
)
from pose_flc.gsa import GsaResult, SearchSpace, run_gsa
from pose_flc.models import CostWeights, FilterConfig, GsaConfig, ScenarioConfig
from pose_flc.pose_filter import ConstantGain, GainSource, PoseFilter
from pose_flc.se3_core import Pose, attitude_error_norm, euler_zyx, pose_error
from pose_flc.simulator import (
    REFERENCE_INITIAL_ESTIMATE,
    TrueState,
    TwistFn,
    check_observability,
    episode_rng,
    gen_measurements,
    step_true_pose,
    true_twist,
)

logger = logging.getLogger(__name__)

COLUMNS: Tuple[str, ...] = (
    "t",
    "phi_true", "theta_true", "psi_true",
    "phi_est", "theta_est", "psi_est",
    "x_true", "y_true", "z_true",
    "x_est", "y_est", "z_est",
    "err_att", "err_pos",
    "e", "de", "kop", "K",
)

# Constant gains K compared against the fuzzy controller
COMPARISON_GAINS: Tuple[float, ...] = (1.0, 6.0, 11.0, 26.0, 51.0, 101.0)

HELD_OUT_SEEDS = 5

# Window endpoint tolerance on the time grid (s)
WINDOW_TOL = 1e-9

Gain = Union[FlcParams, FlcModel, GainSource, float]


@dataclass(eq=False)
class EpisodeSeries:
    """Per-step record of one episode, one row per grid time."""
    table: np.ndarray                       # (rows, len(COLUMNS))
    dt: float
    measurement_digest: str = ""            # SHA-256 of the measurement stream

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=float).reshape(-1, len(COLUMNS))

    def __len__(self) -> int:
        return self.table.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.table[:, COLUMNS.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.table, columns=list(COLUMNS))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, dt: Optional[float] = None) -> EpisodeSeries:
        missing = [c for c in COLUMNS if c not in frame.columns]
        if missing:
            raise ConfigurationError(f"series is missing columns: {', '.join(missing)}")
        table = frame[list(COLUMNS)].to_numpy(dtype=float)
        if dt is None:
            dt = float(table[1, 0] - table[0, 0]) if len(table) > 1 else 0.0
        return cls(table, dt)


@dataclass(frozen=True)
class CostBreakdown:
    e_tr: float
    e_ss: float
    total: float


def resolve_gain(gain: Gain, quiet: bool = False) -> GainSource:
    """Turn params, a model, a constant k_op or a ready gain source into a gain source."""
    if isinstance(gain, FlcParams):
        return FuzzyGainScheduler(build_model(gain, quiet=quiet))
    if isinstance(gain, FlcModel):
        return FuzzyGainScheduler(gain)
    if isinstance(gain, (int, float)):
        return ConstantGain(float(gain))
    if hasattr(gain, "k_op"):
        return gain
    raise ConfigurationError(f"unsupported gain {gain!r}")


def _digest_frame(h, frame) -> None:
    h.update(frame.y_m.as_vector().tobytes())
    for v in frame.vectors_body:
        h.update(v.tobytes())
    for y in frame.landmarks_body:
        h.update(y.tobytes())


# -------------------------
# Episodes
# -------------------------

def run_episode(
    gain: Gain,
    scenario: Optional[ScenarioConfig] = None,
    init: Pose = REFERENCE_INITIAL_ESTIMATE,
    seed: Optional[int] = None,
    filter_config: Optional[FilterConfig] = None,
    twist_fn: TwistFn = true_twist,
    quiet: bool = False,
) -> EpisodeSeries:
    """
    Simulate truth and filter together and record every grid step.

    Args:
        gain: FlcParams / FlcModel (fuzzy), a float k_op (constant) or a gain source
        scenario: trajectory and sensors, defaults to the published scenario
        init: initial estimate T_hat(0); the bias estimate starts at 0
        seed: measurement stream seed, defaults to scenario.seed
        filter_config: filter gains and error mode
        twist_fn: true twist profile
        quiet: log FLC coverage gaps at DEBUG

    Returns:
        EpisodeSeries with round(t_final/dt) + 1 rows

    Raises:
        ConfigurationError: the first frame does not make the pose observable
        NumericalFailure: the filter state became non-finite
    """
    scenario = scenario or ScenarioConfig()
    filter_config = filter_config or FilterConfig()
    seed = scenario.seed if seed is None else seed
    dt = scenario.dt
    n = scenario.n_steps

    rng = episode_rng(seed)
    truth = TrueState.initial()
    pf = PoseFilter.from_config(init, filter_config, resolve_gain(gain, quiet=quiet))
    digest = hashlib.sha256()
    rows = np.empty((n + 1, len(COLUMNS)))

    for k in range(n + 1):
        frame = gen_measurements(truth, scenario, rng, twist_fn)
        if k == 0 and not check_observability(frame).observable:
            raise ConfigurationError(
                f"scenario is unobservable at t=0 ({len(frame.unit_pairs)} vectors, "
                f"{len(frame.landmarks_body)} landmarks)"
            )
        _digest_frame(digest, frame)

        record = pf.assess(frame, dt, truth.pose)
        estimate = pf.state.pose
        R_err, P_err = pose_error(truth.pose, estimate)
        rows[k] = (
            k * dt,
            *euler_zyx(truth.pose.rotation),
            *euler_zyx(estimate.rotation),
            *truth.pose.position,
            *estimate.position,
            attitude_error_norm(R_err),
            float(np.linalg.norm(P_err)),
            record.e, record.de, record.k_op, record.K,
        )

        if k < n:
            pf.advance(frame, dt, record)
            truth = step_true_pose(truth, dt, twist_fn)

    return EpisodeSeries(rows, dt, digest.hexdigest())


# -------------------------
# Cost
# -------------------------

def _window_sum(series: EpisodeSeries, window: Tuple[float, float], w_p: float) -> float:
    t = series.t
    mask = (t >= window[0] - WINDOW_TOL) & (t <= window[1] + WINDOW_TOL)
    return float(np.sum(series.column("err_att")[mask]) + w_p * np.sum(series.column("err_pos")[mask]))


def cost_breakdown(series: EpisodeSeries, weights: Optional[CostWeights] = None) -> CostBreakdown:
    """Transient term, steady-state term and their weighted total."""
    weights = weights or CostWeights()
    end = max(weights.tr_window[1], weights.ss_window[1])
    if len(series) == 0 or series.t[-1] < end - WINDOW_TOL:
        covered = series.t[-1] if len(series) else 0.0
        raise ConfigurationError(f"series covers {covered:.3f} s, cost windows need {end:.3f} s")

    e_tr = _window_sum(series, weights.tr_window, weights.w_p)
    e_ss = _window_sum(series, weights.ss_window, weights.w_p)
    total = weights.w_tr * e_tr + e_ss
    if not np.isfinite(total):
        raise NumericalFailure(f"episode cost is not finite ({total})")
    return CostBreakdown(e_tr, e_ss, total)


def episode_cost(series: EpisodeSeries, weights: Optional[CostWeights] = None) -> float:
    return cost_breakdown(series, weights).total


# -------------------------
# Tuning
# -------------------------

@dataclass
class TuneResult:
    params: FlcParams
    gsa: GsaResult
    measurement_digest: str = ""
    held_out_costs: List[float] = field(default_factory=list)


def flc_search_space() -> SearchSpace:
    return SearchSpace.from_bounds(PARAM_BOUNDS)


def tune_flc(
    scenario: Optional[ScenarioConfig] = None,
    gsa_config: Optional[GsaConfig] = None,
    cost_weights: Optional[CostWeights] = None,
    seed: Optional[int] = None,
    init: Pose = REFERENCE_INITIAL_ESTIMATE,
    filter_config: Optional[FilterConfig] = None,
    progress: bool = False,
) -> TuneResult:
    """
    Search the membership parameters that minimize the episode cost.

    Every candidate sees the measurement stream of `seed` (default
    scenario.seed); the stream digest is checked to be identical across
    candidates.

    Returns:
        TuneResult with the repaired best parameters and the GSA result.
    """
    scenario = scenario or ScenarioConfig()
    seed = scenario.seed if seed is None else seed
    digests = set()
    lock = threading.Lock()

    def cost_fn(x: np.ndarray) -> float:
        series = run_episode(FlcParams(tuple(x)), scenario, init, seed, filter_config, quiet=True)
        with lock:
            digests.add(series.measurement_digest)
        return episode_cost(series, cost_weights)

    logger.info("Tuning FLC on seed %d", seed)
    result = run_gsa(flc_search_space(), cost_fn, gsa_config, progress=progress)

    if len(digests) > 1:
        raise NumericalFailure(f"candidates saw {len(digests)} different measurement streams")
    if not np.isfinite(result.best_cost):
        raise NumericalFailure("no candidate produced a finite cost")

    params = FlcParams(tuple(result.best_position)).repaired()
    logger.info("Tuning done: best cost %.6g", result.best_cost)
    return TuneResult(params, result, digests.pop() if digests else "")


def held_out_seeds(seed: int, count: int = HELD_OUT_SEEDS) -> List[int]:
    return [seed + i for i in range(1, count + 1)]


def evaluate_held_out(
    gain: Gain,
    scenario: Optional[ScenarioConfig] = None,
    cost_weights: Optional[CostWeights] = None,
    seeds: Optional[Sequence[int]] = None,
    init: Pose = REFERENCE_INITIAL_ESTIMATE,
    filter_config: Optional[FilterConfig] = None,
) -> List[float]:
    """Episode cost of one gain on each held-out seed."""
    scenario = scenario or ScenarioConfig()
    seeds = held_out_seeds(scenario.seed) if seeds is None else list(seeds)
    source = resolve_gain(gain, quiet=True)
    costs = [
        episode_cost(run_episode(source, scenario, init, s, filter_config), cost_weights)
        for s in seeds
    ]
    logger.info("Held-out mean cost over %d seeds: %.6g", len(seeds), np.mean(costs))
    return costs


@dataclass(frozen=True)
class GainComparison:
    label: str
    K: Optional[float]          # None for the fuzzy controller
    e_tr: float
    e_ss: float
    total: float


def compare_gains(
    scenario: Optional[ScenarioConfig] = None,
    cost_weights: Optional[CostWeights] = None,
    seed: Optional[int] = None,
    params: Optional[FlcParams] = None,
    gains: Sequence[float] = COMPARISON_GAINS,
    init: Pose = REFERENCE_INITIAL_ESTIMATE,
    filter_config: Optional[FilterConfig] = None,
) -> List[GainComparison]:
    """
    Cost terms of constant gains K (and the fuzzy controller when params are
    given) on one shared measurement stream. A diverging run is reported
    with infinite costs.
    """
    scenario = scenario or ScenarioConfig()
    seed = scenario.seed if seed is None else seed

    candidates: List[Tuple[str, Optional[float], Gain]] = [
        (f"K={K:g}", float(K), float(K) - 1.0) for K in gains
    ]
    if params is not None:
        candidates.append(("fuzzy", None, params))

    results = []
    for label, K, gain in candidates:
        try:
            series = run_episode(gain, scenario, init, seed, filter_config, quiet=True)
            b = cost_breakdown(series, cost_weights)
        except NumericalFailure as e:
            logger.warning("%s: %s", label, e)
            b = CostBreakdown(np.inf, np.inf, np.inf)
        results.append(GainComparison(label, K, b.e_tr, b.e_ss, b.total))
        logger.info("%s: e_tr=%.4f e_ss=%.4f C=%.4f", label, b.e_tr, b.e_ss, b.total)
    return results


def comparison_table(results: Sequence[GainComparison]) -> Dict[str, list]:
    return {
        "label": [r.label for r in results],
        "K": [np.nan if r.K is None else r.K for r in results],
        "e_tr": [r.e_tr for r in results],
        "e_ss": [r.e_ss for r in results],
        "cost": [r.total for r in results],
    }
