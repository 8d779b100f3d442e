"""
Simulator - ground-truth rigid-body motion and corrupted measurements.

The truth follows H_dot = H [Y]^ driven by a sinusoidal twist. Each sample
produces a MeasurementFrame holding:
- the biased, noisy group velocity
- body-frame vector observations v_i^B = R^T v_i^I + b_i + n_i (optionally a
  third vector built as the cross product of the first two measured ones)
- landmark observations y_i^B = R^T (p_i^I - P) + b_i + n_i

Every random draw comes from the numpy Generator handed in by the caller, so
an episode is a pure function of (ScenarioConfig, seed).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from pose_flc.errors import DegenerateMeasurementError
from pose_flc.models import REFERENCE_INIT_POSITION, REFERENCE_INIT_ROTATION, ScenarioConfig
from pose_flc.se3_core import (
    REORTHONORMALIZE_EVERY,
    Pose,
    Twist,
    cross3,
    normalize3,
    project_to_so3,
    se3_exp,
)

logger = logging.getLogger(__name__)

# Non-collinearity threshold on |u_i . u_j|
COLLINEAR_TOL = 1e-6

TwistFn = Callable[[float], Twist]


def initial_estimate(rotation: Sequence[float], position: Sequence[float]) -> Pose:
    """Pose from a row-major 3x3 rotation (projected onto SO(3)) and a position."""
    return Pose(project_to_so3(np.reshape(np.asarray(rotation, dtype=float), (3, 3))), position)


REFERENCE_INITIAL_ESTIMATE = initial_estimate(REFERENCE_INIT_ROTATION, REFERENCE_INIT_POSITION)


@dataclass(frozen=True, eq=False)
class TrueState:
    """Ground-truth pose at time t."""
    pose: Pose
    t: float = 0.0
    steps: int = 0                    # integration steps taken, drives projection

    @classmethod
    def initial(cls) -> TrueState:
        return cls(Pose.identity(), 0.0, 0)


@dataclass(frozen=True, eq=False)
class MeasurementFrame:
    """One sample of every sensor."""
    t: float
    y_m: Twist                                          # measured group velocity
    vectors_inertial: List[np.ndarray]                  # v_i^I (raw)
    vectors_body: List[np.ndarray]                      # v_i^B (raw)
    unit_pairs: List[Tuple[np.ndarray, np.ndarray]]     # (u_i^I, u_i^B)
    landmarks_inertial: List[np.ndarray]                # p_i^I
    landmarks_body: List[np.ndarray]                    # y_i^B
    dropped: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def degenerate(self) -> bool:
        return bool(self.dropped)


class Observability(enum.Enum):
    CASE_1 = 1          # >= 2 non-collinear vectors and >= 1 landmark
    CASE_2 = 2          # >= 1 vector and >= 2 landmarks
    CASE_3 = 3          # >= 3 landmarks
    UNOBSERVABLE = 0

    @property
    def observable(self) -> bool:
        return self is not Observability.UNOBSERVABLE


# -------------------------
# Truth
# -------------------------

def true_twist(t: float) -> Twist:
    """Published angular and translational velocity profile."""
    omega = np.array([
        np.sin(0.7 * t),
        0.7 * np.sin(0.5 * t + np.pi),
        0.5 * np.sin(0.3 * t + np.pi / 3.0),
    ])
    v = 0.3 * np.array([np.sin(0.6 * t), np.sin(0.4 * t), np.sin(0.1 * t)])
    return Twist(omega, v)


def zero_twist(t: float) -> Twist:
    return Twist.zero()


def step_true_pose(s: TrueState, dt: float, twist_fn: TwistFn = true_twist) -> TrueState:
    """Advance the truth by one zero-order-hold step of the twist at s.t."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    pose = s.pose.compose(se3_exp(twist_fn(s.t), dt))
    steps = s.steps + 1
    if steps % REORTHONORMALIZE_EVERY == 0:
        pose = pose.project()
    return TrueState(pose, s.t + dt, steps)


# -------------------------
# Sensors
# -------------------------

def gen_measurements(
    s: TrueState,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    twist_fn: TwistFn = true_twist,
) -> MeasurementFrame:
    """
    Sample every sensor at the true state s.

    Draw order is fixed (velocity, vectors, landmarks) so that streams with
    equal seeds are identical. Noise is drawn even when sigma is 0.

    Args:
        s: true state
        cfg: scenario configuration
        rng: seeded generator owned by the episode
        twist_fn: true twist profile

    Returns:
        MeasurementFrame; observations whose measured vector cannot be
        normalized are dropped and listed in `dropped`.
    """
    R = s.pose.rotation
    P = s.pose.position
    twist = twist_fn(s.t)

    n_omega = rng.normal(0.0, cfg.sigma_omega, 3)
    n_v = rng.normal(0.0, cfg.sigma_v, 3)
    y_m = Twist(
        twist.omega + np.asarray(cfg.bias_omega) + n_omega,
        twist.v + np.asarray(cfg.bias_v) + n_v,
    )

    inertial: List[np.ndarray] = []
    body: List[np.ndarray] = []
    for sensor in cfg.vectors:
        v_i = np.asarray(sensor.direction, dtype=float)
        v_b = R.T @ v_i + np.asarray(sensor.bias) + rng.normal(0.0, sensor.sigma, 3)
        inertial.append(v_i)
        body.append(v_b)
    if cfg.cross_vector:
        inertial.append(cross3(inertial[0], inertial[1]))
        body.append(cross3(body[0], body[1]))

    dropped: List[str] = []
    kept_inertial, kept_body, pairs = [], [], []
    for i, (v_i, v_b) in enumerate(zip(inertial, body), start=1):
        try:
            pair = (normalize3(v_i), normalize3(v_b))
        except DegenerateMeasurementError as e:
            logger.debug("t=%.3f: dropping vector %d (%s)", s.t, i, e)
            dropped.append(f"vector{i}")
            continue
        kept_inertial.append(v_i)
        kept_body.append(v_b)
        pairs.append(pair)

    landmarks_i: List[np.ndarray] = []
    landmarks_b: List[np.ndarray] = []
    for sensor in cfg.landmarks:
        p_i = np.asarray(sensor.position, dtype=float)
        y_b = R.T @ (p_i - P) + np.asarray(sensor.bias) + rng.normal(0.0, sensor.sigma, 3)
        landmarks_i.append(p_i)
        landmarks_b.append(y_b)

    return MeasurementFrame(
        t=s.t,
        y_m=y_m,
        vectors_inertial=kept_inertial,
        vectors_body=kept_body,
        unit_pairs=pairs,
        landmarks_inertial=landmarks_i,
        landmarks_body=landmarks_b,
        dropped=tuple(dropped),
    )


def check_observability(frame: MeasurementFrame) -> Observability:
    """Classify the frame against the three pose-observability cases, first match wins."""
    n_vectors = len(frame.unit_pairs)
    n_landmarks = len(frame.landmarks_body)

    non_collinear = False
    units = [u_i for u_i, _ in frame.unit_pairs]
    for i in range(len(units)):
        for j in range(i + 1, len(units)):
            if abs(float(units[i] @ units[j])) < 1.0 - COLLINEAR_TOL:
                non_collinear = True
                break
        if non_collinear:
            break

    if non_collinear and n_landmarks >= 1:
        return Observability.CASE_1
    if n_vectors >= 1 and n_landmarks >= 2:
        return Observability.CASE_2
    if n_landmarks >= 3:
        return Observability.CASE_3
    return Observability.UNOBSERVABLE


def episode_rng(seed: Optional[int]) -> np.random.Generator:
    """PCG64 generator for one episode's measurement stream."""
    return np.random.default_rng(np.random.SeedSequence(0 if seed is None else int(seed)))
