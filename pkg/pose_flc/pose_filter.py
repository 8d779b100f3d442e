"""
Pose Filter - nonlinear SE(3) filter with velocity-bias estimation.

    T_hat_dot = T_hat [Y_m - b_hat + K W]^
    b_hat_dot = -gamma [[R^T, 0], [-R^T [P]x, R^T]] U
    W         = [[R, 0], [[P]x R, R]]^T U

U collects landmark and vector corrections through the 6-vector wedge
product; K = 1 + k_op where k_op comes from a gain source (a constant or the
fuzzy scheduler) fed with the current error signals.

Each dt is split into sub-steps with the measurement frame held fixed; U and
W are re-evaluated on every sub-step, the pose is propagated with the exact
exponential and the bias with explicit Euler. The sub-step count grows with
K so that large gains stay stable at the sampling step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Protocol, Sequence, Tuple

import numpy as np

from pose_flc.errors import ConfigurationError, DegenerateMeasurementError, NumericalFailure
from pose_flc.fuzzy_gain import gain_K
from pose_flc.models import FilterConfig
from pose_flc.se3_core import (
    REORTHONORMALIZE_EVERY,
    Pose,
    Twist,
    attitude_error_norm,
    cross3,
    cross6,
    pose_error,
    se3_exp_arrays,
)
from pose_flc.simulator import MeasurementFrame, check_observability

logger = logging.getLogger(__name__)

# Weight of position residuals in the scalar error signal
POSITION_WEIGHT = 0.2

DEFAULT_S_DELTA = 10.0

# Largest pose increment K ||W|| h one sub-step may take (rad and m)
MAX_SUBSTEP_INCREMENT = 0.1

MAX_SUBSTEPS = 1000


class GainSource(Protocol):
    """Anything that maps (e, de) to a nonnegative k_op."""

    def k_op(self, e: float, de: float) -> float: ...


@dataclass(frozen=True)
class ConstantGain:
    """Fixed k_op regardless of the error signals."""
    value: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise ConfigurationError(f"k_op must be finite and >= 0, got {self.value}")

    def k_op(self, e: float, de: float) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class FilterState:
    """Pose estimate and velocity-bias estimate."""
    pose: Pose
    bias: Twist

    @classmethod
    def initial(cls, pose: Pose) -> FilterState:
        return cls(pose, Twist.zero())


@dataclass(frozen=True, eq=False)
class FilterGains:
    """Static filter gains plus the source of k_op."""
    gamma: float = 1.0
    vector_weights: Optional[Tuple[float, ...]] = None
    landmark_weights: Optional[Tuple[float, ...]] = None
    gain_source: GainSource = field(default_factory=ConstantGain)
    normalized_vectors: bool = False

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")
        for name in ("vector_weights", "landmark_weights"):
            weights = getattr(self, name)
            if weights is not None and any(not w > 0 for w in weights):
                raise ConfigurationError(f"{name} must all be positive")

    @classmethod
    def from_config(cls, cfg: FilterConfig, gain_source: GainSource) -> FilterGains:
        return cls(
            gamma=cfg.gamma,
            vector_weights=cfg.vector_weights,
            landmark_weights=cfg.landmark_weights,
            gain_source=gain_source,
            normalized_vectors=cfg.normalized_vectors,
        )

    def vector_weight(self, i: int) -> float:
        return _weight(self.vector_weights, i)

    def landmark_weight(self, i: int) -> float:
        return _weight(self.landmark_weights, i)


def _weight(weights: Optional[Sequence[float]], i: int) -> float:
    if weights is None or i >= len(weights):
        return 1.0
    return float(weights[i])


@dataclass(frozen=True)
class StepRecord:
    """Error signals and gain used for one filter step."""
    e: float
    de: float
    k_op: float
    K: float


# -------------------------
# Filter terms
# -------------------------

def _vector_pairs(frame: MeasurementFrame, gains: FilterGains) -> Iterable[Tuple[np.ndarray, np.ndarray]]:
    """(body, inertial) vector pairs in the form the gains ask for."""
    if gains.normalized_vectors:
        return [(u_b, u_i) for u_i, u_b in frame.unit_pairs]
    return list(zip(frame.vectors_body, frame.vectors_inertial))


def correction_U(frame: MeasurementFrame, state: FilterState, gains: FilterGains) -> np.ndarray:
    """
    Correction term U (6-vector).

    U = 1/2 sum s_L [T_hat (y_i; 1)] ^ (p_i; 1) + 1/2 sum s_R [T_hat (v_i^B; 0)] ^ (v_i^I; 0)
    """
    T = state.pose
    U = np.zeros(6)
    for i, (y_b, p_i) in enumerate(zip(frame.landmarks_body, frame.landmarks_inertial)):
        U += gains.landmark_weight(i) * cross6(T.apply(y_b, 1.0), 1.0, p_i, 1.0)
    for i, (v_b, v_i) in enumerate(_vector_pairs(frame, gains)):
        U += gains.vector_weight(i) * cross6(T.apply(v_b, 0.0), 0.0, v_i, 0.0)
    return 0.5 * U


@dataclass(frozen=True, eq=False)
class CorrectionMoments:
    """
    One frame's observations reduced to the moments U depends on.

    With M = sum s_L y_i p_i^T + sum s_R v_i^B (v_i^I)^T and G = R M:

        U_omega = 1/2 (asym(G) + P x sum s_L p_i)
        U_v     = 1/2 (sum s_L p_i - R sum s_L y_i - (sum s_L) P)

    which equals correction_U for any pose. `stiffness` bounds how fast U
    reacts to a pose change: 1/2 sum s_L (1 + |y_i|^2) + 1/2 sum s_R |v_i^B|^2.
    """
    M: np.ndarray
    p_sum: np.ndarray
    y_sum: np.ndarray
    landmark_weight: float
    stiffness: float

    @classmethod
    def from_frame(cls, frame: MeasurementFrame, gains: FilterGains) -> CorrectionMoments:
        M = np.zeros((3, 3))
        p_sum = np.zeros(3)
        y_sum = np.zeros(3)
        weight = 0.0
        stiffness = 0.0
        for i, (y_b, p_i) in enumerate(zip(frame.landmarks_body, frame.landmarks_inertial)):
            s = gains.landmark_weight(i)
            M += s * np.outer(y_b, p_i)
            p_sum += s * p_i
            y_sum += s * y_b
            weight += s
            stiffness += 0.5 * s * (1.0 + float(y_b @ y_b))
        for i, (v_b, v_i) in enumerate(_vector_pairs(frame, gains)):
            s = gains.vector_weight(i)
            M += s * np.outer(v_b, v_i)
            stiffness += 0.5 * s * float(v_b @ v_b)
        return cls(M, p_sum, y_sum, weight, stiffness)

    def evaluate(self, R: np.ndarray, P: np.ndarray) -> np.ndarray:
        G = R @ self.M
        U = np.empty(6)
        U[:3] = 0.5 * (np.array([G[1, 2] - G[2, 1], G[2, 0] - G[0, 2], G[0, 1] - G[1, 0]])
                       + cross3(P, self.p_sum))
        U[3:] = 0.5 * (self.p_sum - R @ self.y_sum - self.landmark_weight * P)
        return U


def _innovation(U: np.ndarray, R: np.ndarray, P: np.ndarray) -> np.ndarray:
    W = np.empty(6)
    W[:3] = R.T @ (U[:3] - cross3(P, U[3:]))
    W[3:] = R.T @ U[3:]
    return W


def _bias_rate(U: np.ndarray, R: np.ndarray, P: np.ndarray, gamma: float) -> np.ndarray:
    rate = np.empty(6)
    rate[:3] = R.T @ U[:3]
    rate[3:] = R.T @ (U[3:] - cross3(P, U[:3]))
    return -gamma * rate


def innovation_W(U: np.ndarray, state: FilterState) -> np.ndarray:
    """W = [[R, 0], [[P]x R, R]]^T U, evaluated blockwise."""
    return _innovation(np.asarray(U, dtype=float), state.pose.rotation, state.pose.position)


def bias_rate(U: np.ndarray, state: FilterState, gamma: float) -> np.ndarray:
    """b_hat_dot = -gamma [[R^T, 0], [-R^T [P]x, R^T]] U."""
    return _bias_rate(np.asarray(U, dtype=float), state.pose.rotation, state.pose.position, gamma)


def substep_count(K: float, W: np.ndarray, stiffness: float, dt: float) -> int:
    """
    Sub-steps for one dt at gain K.

    Chosen so that each sub-step h = dt/n satisfies K ||W|| h <= MAX_SUBSTEP_INCREMENT
    and K stiffness h <= 1, capped at MAX_SUBSTEPS.
    """
    need = max(K * math.sqrt(float(W @ W)) * dt / MAX_SUBSTEP_INCREMENT, K * stiffness * dt)
    if not math.isfinite(need):
        return 1
    return min(MAX_SUBSTEPS, max(1, math.ceil(need)))


def filter_step(
    state: FilterState,
    frame: MeasurementFrame,
    gains: FilterGains,
    dt: float,
    *,
    e: float = 0.0,
    de: float = 0.0,
    k_op: Optional[float] = None,
    substeps: Optional[int] = None,
) -> FilterState:
    """
    One discrete filter update over dt.

    Args:
        state: current estimate
        frame: measurements at the start of the interval
        gains: filter gains and k_op source
        dt: step (s), > 0
        e, de: error signals handed to the gain source
        k_op: explicit k_op, bypasses the gain source when given
        substeps: fixed sub-step count; by default substep_count decides

    Returns:
        New FilterState.

    Raises:
        DegenerateMeasurementError: dropped observations left the frame unobservable
        NumericalFailure: the updated state is not finite
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if substeps is not None and substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    if frame.degenerate and not check_observability(frame).observable:
        raise DegenerateMeasurementError(
            f"t={frame.t:.3f}: dropped {', '.join(frame.dropped)} and the frame is unobservable"
        )

    if k_op is None:
        k_op = gains.gain_source.k_op(e, de)
    K = gain_K(k_op)

    moments = CorrectionMoments.from_frame(frame, gains)
    y_m = frame.y_m.as_vector()
    R = state.pose.rotation
    P = state.pose.position
    bias = state.bias.as_vector()

    U = moments.evaluate(R, P)
    W = _innovation(U, R, P)
    n = substeps or substep_count(K, W, moments.stiffness, dt)
    h = dt / n
    for i in range(n):
        if i:
            U = moments.evaluate(R, P)
            W = _innovation(U, R, P)
        rate = _bias_rate(U, R, P, gains.gamma)
        dR, dP = se3_exp_arrays(y_m - bias + K * W, h)
        R, P = R @ dR, R @ dP + P
        bias = bias + h * rate

    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(P)) and np.all(np.isfinite(bias))):
        raise NumericalFailure(f"t={frame.t:.3f}: filter state became non-finite (K={K:.3g}, {n} sub-steps)")
    if n == MAX_SUBSTEPS:
        logger.debug("t=%.3f: sub-step ceiling reached at K=%.3g", frame.t, K)
    return FilterState(Pose(R, P), Twist.from_vector(bias))


# -------------------------
# Error signals for the gain scheduler
# -------------------------

def error_rate(e: float, e_prev: Optional[float], dt: float, s_delta: float = DEFAULT_S_DELTA) -> float:
    """Scaled, clamped rate of change; 0 when there is no previous sample."""
    if e_prev is None:
        return 0.0
    return min(1.0, abs(e - e_prev) / (dt * s_delta))


def measurable_error(
    frame: MeasurementFrame,
    state: FilterState,
    e_prev: Optional[float],
    dt: float,
    s_delta: float = DEFAULT_S_DELTA,
) -> Tuple[float, float]:
    """
    Error signals computed from measurements only.

    e_raw = mean_i 1/2 (1 - u_hat_i . u_i^B) + 0.2 mean_i ||y_hat_i - y_i^B||
    with u_hat_i = R_hat^T u_i^I and y_hat_i = R_hat^T (p_i - P_hat).

    Returns:
        (e, de), both clamped to [0, 1]
    """
    R = state.pose.rotation
    P = state.pose.position

    e_raw = 0.0
    if frame.unit_pairs:
        e_raw += float(np.mean([
            0.5 * (1.0 - float((R.T @ u_i) @ u_b)) for u_i, u_b in frame.unit_pairs
        ]))
    if frame.landmarks_body:
        e_raw += POSITION_WEIGHT * float(np.mean([
            np.linalg.norm(R.T @ (p_i - P) - y_b)
            for y_b, p_i in zip(frame.landmarks_body, frame.landmarks_inertial)
        ]))
    e = min(1.0, max(0.0, e_raw))
    return e, error_rate(e, e_prev, dt, s_delta)


def oracle_error(
    truth: Pose,
    state: FilterState,
    e_prev: Optional[float],
    dt: float,
    s_delta: float = DEFAULT_S_DELTA,
) -> Tuple[float, float]:
    """Error signals from the true pose: e_raw = ||R_err||_I + 0.2 ||P_err||."""
    R_err, P_err = pose_error(truth, state.pose)
    e_raw = attitude_error_norm(R_err) + POSITION_WEIGHT * float(np.linalg.norm(P_err))
    e = min(1.0, e_raw)
    return e, error_rate(e, e_prev, dt, s_delta)


# -------------------------
# Stateful driver
# -------------------------

class PoseFilter:
    """
    Filter instance owning its state between steps.

    Keeps the previous error sample for de and re-projects the rotation
    estimate onto SO(3) every `reorthonormalize_every` steps.

    Usage:
        pf = PoseFilter(init_pose, FilterGains(gain_source=ConstantGain(5.0)))
        for frame in frames:
            record = pf.step(frame, dt)
    """

    def __init__(
        self,
        init: Pose,
        gains: FilterGains,
        *,
        error_mode: str = "measurable",
        s_delta: float = DEFAULT_S_DELTA,
        reorthonormalize_every: int = REORTHONORMALIZE_EVERY,
    ):
        if error_mode not in ("measurable", "oracle"):
            raise ConfigurationError(f"unknown error mode '{error_mode}'")
        self.state = FilterState.initial(init)
        self.gains = gains
        self.error_mode = error_mode
        self.s_delta = s_delta
        self.reorthonormalize_every = reorthonormalize_every
        self.e_prev: Optional[float] = None
        self.steps = 0

    @classmethod
    def from_config(cls, init: Pose, cfg: FilterConfig, gain_source: GainSource) -> PoseFilter:
        return cls(
            init,
            FilterGains.from_config(cfg, gain_source),
            error_mode=cfg.error_mode,
            s_delta=cfg.s_delta,
            reorthonormalize_every=cfg.reorthonormalize_every,
        )

    def assess(self, frame: MeasurementFrame, dt: float, truth: Optional[Pose] = None) -> StepRecord:
        """Compute (e, de) and the gain for the current state; remembers e."""
        if self.error_mode == "oracle":
            if truth is None:
                raise ConfigurationError("oracle error mode needs the true pose")
            e, de = oracle_error(truth, self.state, self.e_prev, dt, self.s_delta)
        else:
            e, de = measurable_error(frame, self.state, self.e_prev, dt, self.s_delta)
        k_op = float(self.gains.gain_source.k_op(e, de))
        self.e_prev = e
        return StepRecord(e=e, de=de, k_op=k_op, K=gain_K(k_op))

    def advance(self, frame: MeasurementFrame, dt: float, record: StepRecord) -> FilterState:
        """Apply one update with the gain chosen by `assess`."""
        if frame.degenerate:
            logger.debug("t=%.3f: frame dropped %s", frame.t, ", ".join(frame.dropped))
        self.state = filter_step(self.state, frame, self.gains, dt, k_op=record.k_op)
        self.steps += 1
        if self.steps % self.reorthonormalize_every == 0:
            self.state = FilterState(self.state.pose.project(), self.state.bias)
        return self.state

    def step(self, frame: MeasurementFrame, dt: float, truth: Optional[Pose] = None) -> StepRecord:
        record = self.assess(frame, dt, truth)
        self.advance(frame, dt, record)
        return record
