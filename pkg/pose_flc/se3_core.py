"""
SE(3) Core - Lie-group primitives for rigid-body pose.

Provides:
- skew / unskew maps between R^3 and so(3)
- wedge / vee maps between twists and se(3)
- the 6-vector wedge product used by the filter correction term
- closed-form SO(3) and SE(3) exponentials (Rodrigues + left Jacobian)
- attitude error norm, pose error, ZYX Euler conversions
- nearest-rotation projection

All functions are pure and operate on numpy arrays; Pose and Twist are
immutable value types.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.linalg import polar

from pose_flc.errors import DegenerateMeasurementError

logger = logging.getLogger(__name__)

# Below this rotation angle the Rodrigues/Jacobian coefficients switch to series
SMALL_ANGLE = 1e-8

# Shortest vector normalize3 accepts
MIN_NORM = 1e-12

# Pitch distance from +-pi/2 treated as gimbal lock
GIMBAL_TOL = 1e-6

# Integration steps between nearest-rotation projections
REORTHONORMALIZE_EVERY = 1000

ORTHO_TOL = 1e-9


def _vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(3)
    return arr


@dataclass(frozen=True, eq=False)
class Twist:
    """Group velocity [omega; v] (rad/s, m/s)."""
    omega: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _vec3(self.omega))
        object.__setattr__(self, "v", _vec3(self.v))

    @classmethod
    def zero(cls) -> Twist:
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, xi) -> Twist:
        xi = np.asarray(xi, dtype=float).reshape(6)
        return cls(xi[:3], xi[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.omega, self.v])

    def __add__(self, other: Twist) -> Twist:
        return Twist(self.omega + other.omega, self.v + other.v)

    def __sub__(self, other: Twist) -> Twist:
        return Twist(self.omega - other.omega, self.v - other.v)


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid-body pose: rotation R (body -> inertial) and position P (m)."""
    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "position", _vec3(self.position))

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, H) -> Pose:
        H = np.asarray(H, dtype=float)
        if H.shape != (4, 4):
            raise ValueError(f"Homogeneous transform must be 4x4, got {H.shape}")
        return cls(H[:3, :3], H[:3, 3])

    def matrix(self) -> np.ndarray:
        H = np.eye(4)
        H[:3, :3] = self.rotation
        H[:3, 3] = self.position
        return H

    def compose(self, other: Pose) -> Pose:
        """self * other."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.position + self.position)

    def inverse(self) -> Pose:
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.position)

    def apply(self, x, x0: float = 1.0) -> np.ndarray:
        """Transform the first three components of the 4-vector [x; x0]."""
        return self.rotation @ _vec3(x) + x0 * self.position

    def project(self) -> Pose:
        return Pose(project_to_so3(self.rotation), self.position)


# -------------------------
# Hat / vee maps
# -------------------------

def skew(v) -> np.ndarray:
    """[v]x such that skew(v) @ w == cross(v, w)."""
    x, y, z = v
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def unskew(X) -> np.ndarray:
    """Inverse of skew; reads the strictly lower entries."""
    X = np.asarray(X, dtype=float)
    return np.array([X[2, 1], X[0, 2], X[1, 0]])


def wedge(t: Union[Twist, np.ndarray]) -> np.ndarray:
    """Lift a twist into se(3): [[skew(omega), v], [0, 0]]."""
    if not isinstance(t, Twist):
        t = Twist.from_vector(t)
    X = np.zeros((4, 4))
    X[:3, :3] = skew(t.omega)
    X[:3, 3] = t.v
    return X


def vee(X) -> Twist:
    """Inverse of wedge. Raises ValueError if the rotation block is not skew."""
    X = np.asarray(X, dtype=float)
    block = X[:3, :3]
    if np.max(np.abs(block + block.T)) > 1e-12:
        raise ValueError("Top-left block of an se(3) element must be skew-symmetric")
    return Twist(unskew(block), X[:3, 3])


def cross3(a, b) -> np.ndarray:
    """a x b for single 3-vectors, written out (np.cross is slow on length-3 input)."""
    a1, a2, a3 = a
    b1, b2, b3 = b
    return np.array([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])


def cross6(x, x0: float, y, y0: float) -> np.ndarray:
    """
    Wedge product of two homogeneous 4-vectors.

    [x; x0] ^ [y; y0] = [x cross y; x0*y - y0*x]

    Args:
        x, y: 3-vectors
        x0, y0: homogeneous components (1 for points, 0 for directions)

    Returns:
        6-vector
    """
    x = _vec3(x)
    y = _vec3(y)
    out = np.empty(6)
    out[:3] = cross3(x, y)
    out[3:] = x0 * y - y0 * x
    return out


# -------------------------
# Exponentials
# -------------------------

def so3_exp(w) -> np.ndarray:
    """
    Rodrigues formula for a scaled axis-angle vector (rad).

    Switches to the second-order series below SMALL_ANGLE.
    """
    w = _vec3(w)
    theta = math.sqrt(float(w @ w))
    W = skew(w)
    W2 = W @ W
    if theta < SMALL_ANGLE:
        return np.eye(3) + W + 0.5 * W2
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * W + b * W2


def so3_left_jacobian(w) -> np.ndarray:
    """Left Jacobian of SO(3) at w."""
    w = _vec3(w)
    theta = math.sqrt(float(w @ w))
    W = skew(w)
    W2 = W @ W
    if theta < SMALL_ANGLE:
        return np.eye(3) + 0.5 * W + W2 / 6.0
    theta2 = theta * theta
    b = (1.0 - np.cos(theta)) / theta2
    c = (theta - np.sin(theta)) / (theta2 * theta)
    return np.eye(3) + b * W + c * W2


def se3_exp(t: Twist, dt: float) -> Pose:
    """
    Closed-form exp(wedge(t) * dt).

    Args:
        t: constant twist over the interval
        dt: interval length (s), > 0

    Returns:
        Pose increment with rotation so3_exp(omega*dt) and translation
        J_l(omega*dt) @ v * dt
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    R, p = se3_exp_arrays(t.as_vector(), dt)
    return Pose(R, p)


def se3_exp_arrays(xi: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """se3_exp on a raw 6-vector, sharing one skew matrix between both blocks."""
    phi = xi[:3] * dt
    theta2 = float(phi @ phi)
    theta = math.sqrt(theta2)
    W = skew(phi)
    W2 = W @ W
    if theta < SMALL_ANGLE:
        a, b, c = 1.0, 0.5, 1.0 / 6.0
    else:
        s = math.sin(theta)
        b = (1.0 - math.cos(theta)) / theta2
        a = s / theta
        c = (theta - s) / (theta2 * theta)
    R = np.eye(3) + a * W + b * W2
    J = np.eye(3) + b * W + c * W2
    return R, J @ (xi[3:] * dt)


def project_to_so3(R) -> np.ndarray:
    """Nearest rotation matrix (Frobenius) via polar decomposition."""
    U, _ = polar(np.asarray(R, dtype=float))
    if np.linalg.det(U) < 0:
        # reflection: flip the axis of least stretch
        u, s, vt = np.linalg.svd(np.asarray(R, dtype=float))
        u[:, -1] *= -1.0
        U = u @ vt
    return U


def is_rotation(R, tol: float = ORTHO_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    ortho = np.linalg.norm(R @ R.T - np.eye(3), ord="fro")
    return ortho < tol and abs(np.linalg.det(R) - 1.0) < tol


# -------------------------
# Error metrics
# -------------------------

def rotation_angle(R) -> float:
    """Angle of the axis-angle decomposition of R, in [0, pi]."""
    c = (np.trace(np.asarray(R, dtype=float)) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def attitude_error_norm(R) -> float:
    """
    Normalized Euclidean attitude distance ||R||_I = tr(I - R) / 4.

    0 at the identity, 1 at any half turn; equals sin^2(angle / 2).
    """
    value = 0.25 * (3.0 - float(np.trace(np.asarray(R, dtype=float))))
    return min(1.0, max(0.0, value))


def pose_error(truth: Pose, estimate: Pose) -> Tuple[np.ndarray, np.ndarray]:
    """
    Error of estimate relative to truth: H_err = H_est * H_true^-1.

    Returns:
        (R_err, P_err) with R_err = R_est R^T and P_err = P_est - R_err P
    """
    R_err = estimate.rotation @ truth.rotation.T
    P_err = estimate.position - R_err @ truth.position
    return R_err, P_err


# -------------------------
# Euler angles (ZYX: yaw psi, pitch theta, roll phi)
# -------------------------

def rotation_from_euler(phi: float, theta: float, psi: float) -> np.ndarray:
    """R = Rz(psi) Ry(theta) Rx(phi)."""
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    return np.array([
        [cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf],
        [sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf],
        [-st, ct * sf, ct * cf],
    ])


def euler_zyx(R) -> Tuple[float, float, float]:
    """
    ZYX Euler angles (phi, theta, psi) of R.

    At gimbal lock (|theta| within GIMBAL_TOL of pi/2) roll is set to 0 and
    the whole in-plane rotation is reported as yaw.
    """
    R = np.asarray(R, dtype=float)
    cos_theta = float(np.hypot(R[0, 0], R[1, 0]))
    theta = float(np.arctan2(-R[2, 0], cos_theta))
    if abs(abs(theta) - np.pi / 2.0) < GIMBAL_TOL:
        phi = 0.0
        psi = float(np.arctan2(-R[0, 1], R[1, 1]))
    else:
        phi = float(np.arctan2(R[2, 1], R[2, 2]))
        psi = float(np.arctan2(R[1, 0], R[0, 0]))
    return phi, theta, psi


def normalize3(v) -> np.ndarray:
    """Unit vector along v; raises DegenerateMeasurementError when ||v|| <= MIN_NORM."""
    v = _vec3(v)
    n = float(np.linalg.norm(v))
    if not np.isfinite(n) or n <= MIN_NORM:
        raise DegenerateMeasurementError(f"Cannot normalize vector with norm {n:.3g}")
    return v / n
