"""
Fuzzy Gain - two-input Mamdani controller producing k_op from (e, de).

Partitions:
- input (shared by e and de) on [0, 1]:
    VS=(0,0,k1) S=(k2,k3,k4) M=(k5,k6,k7) L=(k8,k9,k10) VL=(k11,1,1)
- output on [0, 100]:
    VS=(0,0,k12) S=(k13,k14,k15) M=(k16,k17,k18) L=(k19,k20,k21) VL=(k22,100,100)

Inference: rule strength min(mu_de, mu_e), per-consequent max, union of
min-clipped output curves, discrete centroid on a uniform grid (0 when the
aggregate is empty). K = 1 + k_op.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import skfuzzy as fuzz

from pose_flc.config import settings
from pose_flc.errors import ConfigurationError, CoverageError

logger = logging.getLogger(__name__)

LABELS: Tuple[str, ...] = ("VS", "S", "M", "L", "VL")

N_PARAMS = 22

INPUT_UNIVERSE = (0.0, 1.0)
OUTPUT_UNIVERSE = (0.0, 100.0)

# Box bounds for k1..k22
PARAM_BOUNDS: Tuple[Tuple[float, float], ...] = (
    # input partition
    (0.0, 0.15),                                    # VS foot
    (0.0, 0.2), (0.0, 0.2), (0.1, 0.2),             # S
    (0.05, 0.2), (0.1, 0.3), (0.1, 0.4),            # M
    (0.1, 0.4), (0.2, 0.8), (0.3, 0.8),             # L
    (0.2, 0.7),                                     # VL foot
    # output partition
    (0.0, 10.0),                                    # VS foot
    (0.0, 10.0), (0.0, 20.0), (5.0, 30.0),          # S
    (5.0, 20.0), (10.0, 50.0), (20.0, 50.0),        # M
    (20.0, 50.0), (20.0, 70.0), (40.0, 90.0),       # L
    (30.0, 70.0),                                   # VL foot
)

# Largest k_op inference can return: VL alone at full strength with its foot at the upper bound
MAX_K_OP = (PARAM_BOUNDS[-1][1] + 2.0 * OUTPUT_UNIVERSE[1]) / 3.0

# 0-based index triples sorted by the repair step
_TRIPLES = ((1, 2, 3), (4, 5, 6), (7, 8, 9), (12, 13, 14), (15, 16, 17), (18, 19, 20))

# Consequents: rows de = VL, L, M, S, VS; columns e = VL, L, M, S, VS
RULE_TABLE: Tuple[Tuple[str, ...], ...] = (
    ("VL", "VL", "VL", "L", "L"),
    ("VL", "VL", "VL", "L", "M"),
    ("VL", "VL", "L", "M", "M"),
    ("VL", "VL", "M", "M", "S"),
    ("VL", "VL", "M", "S", "VS"),
)
_TABLE_ORDER = ("VL", "L", "M", "S", "VS")


def consequent(e_label: str, de_label: str) -> str:
    """Output label of the rule (e is e_label) and (de is de_label)."""
    return RULE_TABLE[_TABLE_ORDER.index(de_label)][_TABLE_ORDER.index(e_label)]


def _rule_index() -> np.ndarray:
    """rule_index[i_de, i_e] -> output label index, all in LABELS order."""
    idx = np.zeros((len(LABELS), len(LABELS)), dtype=int)
    for i_de, de_label in enumerate(LABELS):
        for i_e, e_label in enumerate(LABELS):
            idx[i_de, i_e] = LABELS.index(consequent(e_label, de_label))
    return idx


# [output label, flattened (i_de, i_e) cell] -> that cell fires the label
_RULE_MASK = np.arange(len(LABELS))[:, None] == _rule_index().ravel()[None, :]


# -------------------------
# Membership functions
# -------------------------

@dataclass(frozen=True)
class TriangularMF:
    """Triangle (left foot, peak, right foot)."""
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c):
            raise ValueError(f"Triangular MF needs a <= b <= c, got ({self.a}, {self.b}, {self.c})")

    def curve(self, x) -> np.ndarray:
        return fuzz.trimf(np.atleast_1d(np.asarray(x, dtype=float)), [self.a, self.b, self.c])


def tri_mu(x: float, mf: TriangularMF) -> float:
    """Membership degree of a crisp x; shoulders (a == b or b == c) give 1 at b."""
    return float(mf.curve(x)[0])


def triangle_memberships(x: np.ndarray, feet: np.ndarray) -> np.ndarray:
    """
    Degrees of m crisp points in n triangles at once, same edges as fuzz.trimf.

    Args:
        x: (m,) points
        feet: (3, n) rows of left feet, peaks, right feet

    Returns:
        (m, n) memberships
    """
    a, b, c = feet
    x = np.asarray(x, dtype=float)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        rise = np.where((a < x) & (x < b), (x - a) / (b - a), 0.0)
        fall = np.where((b < x) & (x < c), (c - x) / (c - b), 0.0)
    return np.where(x == b, 1.0, rise + fall)


def grid_centroid(x: np.ndarray, mu: np.ndarray) -> float:
    """Discrete centroid sum(x mu) / sum(mu); 0 for an empty set."""
    area = float(np.sum(mu))
    if area <= 0.0:
        return 0.0
    return float(np.dot(x, mu) / area)


def mf_centroid(mf: TriangularMF, points: Optional[int] = None) -> float:
    """Centroid of one output MF on the output grid."""
    grid = np.linspace(*OUTPUT_UNIVERSE, points or settings.centroid_points)
    return grid_centroid(grid, mf.curve(grid))


# -------------------------
# Parameters
# -------------------------

@dataclass(frozen=True)
class FlcParams:
    """The 22 membership parameters k1..k22."""
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != N_PARAMS:
            raise ConfigurationError(f"FlcParams needs {N_PARAMS} values, got {len(values)}")
        if not all(np.isfinite(values)):
            raise ConfigurationError("FlcParams values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_sequence(cls, values: Iterable[float]) -> FlcParams:
        return cls(tuple(values))

    @classmethod
    def midpoint(cls) -> FlcParams:
        return cls(tuple(0.5 * (lo + hi) for lo, hi in PARAM_BOUNDS))

    def k(self, i: int) -> float:
        """1-based accessor, k(1) .. k(22)."""
        return self.values[i - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def as_mapping(self) -> Dict[str, float]:
        return {f"k{i + 1}": v for i, v in enumerate(self.values)}

    def out_of_bounds(self) -> List[Tuple[str, float, Tuple[float, float]]]:
        """(key, value, bound) for every parameter outside its box."""
        return [
            (f"k{i + 1}", v, PARAM_BOUNDS[i])
            for i, v in enumerate(self.values)
            if not (PARAM_BOUNDS[i][0] <= v <= PARAM_BOUNDS[i][1])
        ]

    def repaired(self) -> FlcParams:
        """Clamp into the boxes, then sort each triangle triple non-decreasing."""
        lo = np.array([b[0] for b in PARAM_BOUNDS])
        hi = np.array([b[1] for b in PARAM_BOUNDS])
        x = np.clip(self.as_array(), lo, hi)
        for triple in _TRIPLES:
            idx = list(triple)
            x[idx] = np.sort(x[idx])
        return FlcParams(tuple(x))


def random_params(rng: np.random.Generator) -> FlcParams:
    """Uniform sample inside the boxes, repaired."""
    lo = np.array([b[0] for b in PARAM_BOUNDS])
    hi = np.array([b[1] for b in PARAM_BOUNDS])
    return FlcParams(tuple(rng.uniform(lo, hi))).repaired()


# -------------------------
# Model
# -------------------------

@dataclass(frozen=True, eq=False)
class FlcModel:
    """Immutable controller built from repaired parameters."""
    params: FlcParams
    input_mfs: Dict[str, TriangularMF]
    output_mfs: Dict[str, TriangularMF]
    rule_index: np.ndarray                              # [i_de, i_e] -> output label index
    output_grid: np.ndarray
    output_curves: np.ndarray                           # (5, grid) in LABELS order
    input_feet: np.ndarray                              # (3, 5) a/b/c rows in LABELS order
    coverage_gaps: Tuple[Tuple[str, float, float], ...] = ()

    def input_memberships(self, x: float) -> np.ndarray:
        return triangle_memberships(np.array([x]), self.input_feet)[0]


def _partition(k: Sequence[float], low: float, high: float) -> Dict[str, TriangularMF]:
    """Five MFs from the 11 values belonging to one universe."""
    return {
        "VS": TriangularMF(low, low, k[0]),
        "S": TriangularMF(k[1], k[2], k[3]),
        "M": TriangularMF(k[4], k[5], k[6]),
        "L": TriangularMF(k[7], k[8], k[9]),
        "VL": TriangularMF(k[10], high, high),
    }


def find_coverage_gaps(mfs: Dict[str, TriangularMF], grid: np.ndarray) -> List[Tuple[float, float]]:
    """Runs of grid points where every MF is 0, as (first, last) x."""
    covered = np.max([mf.curve(grid) for mf in mfs.values()], axis=0) > 0.0
    gaps = []
    start = None
    prev = grid[0]
    for x, ok in zip(grid, covered):
        if not ok and start is None:
            start = x
        elif ok and start is not None:
            gaps.append((float(start), float(prev)))
            start = None
        prev = x
    if start is not None:
        gaps.append((float(start), float(grid[-1])))
    return gaps


def build_model(
    p: FlcParams,
    strict: bool = False,
    grid_points: Optional[int] = None,
    quiet: bool = False,
) -> FlcModel:
    """
    Repair parameters and assemble the controller.

    Args:
        p: raw parameters (any finite values)
        strict: raise CoverageError instead of warning on uncovered intervals
        grid_points: resolution of the coverage check and centroid grid
        quiet: report gaps at DEBUG instead of WARNING

    Returns:
        FlcModel with the fixed rule table attached.
    """
    points = grid_points or settings.centroid_points
    if points < 2:
        raise ConfigurationError(f"centroid grid needs at least 2 points, got {points}")

    repaired = p.repaired()
    k = repaired.values
    input_mfs = _partition(k[:11], *INPUT_UNIVERSE)
    output_mfs = _partition(k[11:], *OUTPUT_UNIVERSE)

    input_grid = np.linspace(*INPUT_UNIVERSE, points)
    output_grid = np.linspace(*OUTPUT_UNIVERSE, points)

    gaps = [("input", lo, hi) for lo, hi in find_coverage_gaps(input_mfs, input_grid)]
    gaps += [("output", lo, hi) for lo, hi in find_coverage_gaps(output_mfs, output_grid)]
    if gaps:
        variable, lo, hi = gaps[0]
        if strict:
            raise CoverageError(variable, (lo, hi))
        log = logger.debug if quiet else logger.warning
        log("FLC partition leaves %d uncovered interval(s), first %s [%.4g, %.4g]",
            len(gaps), variable, lo, hi)

    curves = np.array([output_mfs[label].curve(output_grid) for label in LABELS])
    feet = np.array([[input_mfs[label].a, input_mfs[label].b, input_mfs[label].c] for label in LABELS]).T
    return FlcModel(
        params=repaired,
        input_mfs=input_mfs,
        output_mfs=output_mfs,
        rule_index=_rule_index(),
        output_grid=output_grid,
        output_curves=curves,
        input_feet=feet,
        coverage_gaps=tuple(gaps),
    )


def infer_kop(e: float, de: float, model: FlcModel) -> float:
    """Mamdani min/max inference with centroid defuzzification, k_op in [0, 100]."""
    mu_e, mu_de = triangle_memberships(
        np.array([min(1.0, max(0.0, e)), min(1.0, max(0.0, de))]), model.input_feet
    )

    strengths = np.minimum.outer(mu_de, mu_e).ravel()
    fired = np.max(np.where(_RULE_MASK, strengths, 0.0), axis=1)

    aggregate = np.max(np.minimum(fired[:, None], model.output_curves), axis=0)
    return grid_centroid(model.output_grid, aggregate)


def gain_K(k_op: float) -> float:
    return 1.0 + float(k_op)


def membership_curves(model: FlcModel, variable: str, points: Optional[int] = None):
    """(x, {label: mu}) for the 'input' or 'output' partition."""
    points = points or settings.centroid_points
    if variable == "input":
        x, mfs = np.linspace(*INPUT_UNIVERSE, points), model.input_mfs
    elif variable == "output":
        x, mfs = np.linspace(*OUTPUT_UNIVERSE, points), model.output_mfs
    else:
        raise ValueError(f"unknown variable '{variable}' (expected 'input' or 'output')")
    return x, {label: mfs[label].curve(x) for label in LABELS}


class FuzzyGainScheduler:
    """Gain source backed by an FlcModel."""

    def __init__(self, model: FlcModel):
        self.model = model

    @classmethod
    def from_params(cls, p: FlcParams, strict: bool = False) -> FuzzyGainScheduler:
        return cls(build_model(p, strict=strict))

    def k_op(self, e: float, de: float) -> float:
        return infer_kop(e, de, self.model)
