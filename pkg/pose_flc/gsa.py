"""
GSA - gravitational search over a box-bounded search space.

Each iteration:
1. evaluate every node (optionally in a thread pool)
2. G(t) = G0 exp(-alpha t / T)
3. masses m_j = (C_j - worst) / (best - worst), shares M_j = m_j / sum(m)
4. force from the Kbest heaviest nodes, per dimension:
       F_jk = sum_q rand G M_j M_q / (||(x_j - x_q) / span|| + delta) (x_qk - x_jk)
5. a = F / M_j, v = rand v + a, x = clamp(x + v)

Distances are measured in box-normalized units, which makes the search
equivalent to one on the unit cube: the same G0 works for a box of width
0.15 and one of width 100.

Random draws for node j in iteration t come from default_rng([seed, t + 1, j]),
so serial and parallel evaluation give bit-identical results.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from pose_flc.errors import ConfigurationError, NumericalFailure
from pose_flc.models import GsaConfig

logger = logging.getLogger(__name__)

CostFn = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SearchSpace:
    """Per-dimension box bounds."""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or len(lower) < 1:
            raise ConfigurationError("search space needs matching, non-empty lower/upper bounds")
        for k, (lo, hi) in enumerate(zip(lower, upper)):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ConfigurationError(f"dimension {k}: invalid bounds [{lo}, {hi}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_bounds(cls, bounds: Sequence[Tuple[float, float]]) -> SearchSpace:
        return cls(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds))

    @classmethod
    def cube(cls, lo: float, hi: float, dim: int) -> SearchSpace:
        return cls((lo,) * dim, (hi,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def span(self) -> np.ndarray:
        """Box widths; a zero-width dimension counts as width 1."""
        width = np.asarray(self.upper) - np.asarray(self.lower)
        return np.where(width > 0.0, width, 1.0)

    def clip(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(clamped x, mask of dimensions that were outside)."""
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        clipped = np.clip(x, lo, hi)
        return clipped, clipped != x

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= np.asarray(self.lower)) and np.all(x <= np.asarray(self.upper)))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(np.asarray(self.lower), np.asarray(self.upper), size=(n, self.dim))


@dataclass(eq=False)
class GsaNode:
    """One agent of the swarm."""
    position: np.ndarray
    velocity: np.ndarray
    cost: float = math.inf
    mass: float = 0.0            # normalized mass m_j in [0, 1]
    share: float = 0.0           # M_j = m_j / sum(m)


@dataclass(eq=False)
class GsaSwarm:
    nodes: List[GsaNode]

    @classmethod
    def initialize(cls, space: SearchSpace, n: int, rng: np.random.Generator) -> GsaSwarm:
        positions = space.sample(rng, n)
        return cls([GsaNode(p, np.zeros(space.dim)) for p in positions])

    @property
    def positions(self) -> np.ndarray:
        return np.array([node.position for node in self.nodes])

    @property
    def costs(self) -> np.ndarray:
        return np.array([node.cost for node in self.nodes])

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class GsaResult:
    best_position: np.ndarray
    best_cost: float
    trace: List[float] = field(default_factory=list)       # best-so-far per iteration
    gravity: List[float] = field(default_factory=list)     # G(t) per iteration
    evaluations: int = 0


# -------------------------
# Update rules
# -------------------------

def update_gravity(g0: float, alpha: float, t: float, t_final: float) -> float:
    if t_final <= 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    return g0 * math.exp(-alpha * t / t_final)


def compute_masses(costs: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Normalized masses for minimization.

    Returns:
        (m, shares): best node m=1, worst m=0, shares sum to 1. All-equal
        costs give m=1 and uniform shares.
    """
    costs = np.asarray(costs, dtype=float)
    n = len(costs)
    best = float(np.min(costs))
    worst = float(np.max(costs))
    if best == worst:
        return np.ones(n), np.full(n, 1.0 / n)
    m = (costs - worst) / (best - worst)
    return m, m / np.sum(m)


def kbest_count(n: int, t: int, t_final: int, minimum: int = 1) -> int:
    """Attractor count, linear from n at t=0 down to `minimum`."""
    count = int(round(n - (n - 1) * t / t_final))
    return min(n, max(minimum, count))


def kbest_indices(swarm: GsaSwarm, count: int) -> np.ndarray:
    return np.argsort(swarm.costs, kind="stable")[:count]


def node_force(
    swarm: GsaSwarm,
    j: int,
    G: float,
    attractors: Sequence[int],
    rng,
    delta: float,
    span: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Total force on node j from the attractor set; one rng.random() per attractor q != j.

    `span` divides the displacement per dimension before its norm is taken;
    None measures raw distances.
    """
    node = swarm.nodes[j]
    force = np.zeros_like(node.position)
    for q in attractors:
        if q == j:
            continue
        other = swarm.nodes[q]
        diff = other.position - node.position
        scaled = diff if span is None else diff / span
        dist = math.sqrt(float(scaled @ scaled))
        force += rng.random() * G * (node.share * other.share / (dist + delta)) * diff
    return force


def compute_force(
    swarm: GsaSwarm,
    G: float,
    count: int,
    rngs: Sequence,
    delta: float = 1e-9,
    span: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Forces for every node, shape (N, P); rngs[j] supplies node j's draws."""
    attractors = kbest_indices(swarm, count)
    return np.array([node_force(swarm, j, G, attractors, rngs[j], delta, span) for j in range(len(swarm))])


def update_kinematics(node: GsaNode, force: np.ndarray, rng, space: SearchSpace) -> GsaNode:
    """Velocity and position update; clamped dimensions lose their velocity."""
    accel = force / node.share if node.share > 0.0 else np.zeros_like(force)
    velocity = rng.random() * node.velocity + accel
    position, clamped = space.clip(node.position + velocity)
    velocity = np.where(clamped, 0.0, velocity)
    return GsaNode(position, velocity, node.cost, node.mass, node.share)


# -------------------------
# Driver
# -------------------------

def _evaluate(cost_fn: CostFn, x: np.ndarray) -> float:
    try:
        value = float(cost_fn(x))
    except Exception as e:
        logger.warning("Cost evaluation failed: %s", e)
        return math.nan
    if not math.isfinite(value):
        logger.warning("Cost evaluation returned %r", value)
        return math.nan
    return value


def _assign_failures(costs: np.ndarray) -> np.ndarray:
    """Failed evaluations take the worst cost of the iteration."""
    failed = np.isnan(costs)
    if not failed.any():
        return costs
    if failed.all():
        return np.full_like(costs, math.inf)
    costs = costs.copy()
    costs[failed] = np.max(costs[~failed])
    return costs


def node_rngs(seed: int, iteration: int, n: int) -> List[np.random.Generator]:
    return [np.random.default_rng([seed, iteration + 1, j]) for j in range(n)]


def run_gsa(
    space: SearchSpace,
    cost_fn: CostFn,
    config: Optional[GsaConfig] = None,
    progress: bool = False,
) -> GsaResult:
    """
    Minimize cost_fn over space.

    Args:
        space: box bounds
        cost_fn: position -> cost; must be pure when workers > 1
        config: swarm size, iterations, G schedule, seed, workers
        progress: show a tqdm bar

    Returns:
        GsaResult with the best position found and the per-iteration trace.
    """
    config = config or GsaConfig()
    n, t_final = config.nodes, config.iterations
    swarm = GsaSwarm.initialize(space, n, np.random.default_rng([config.seed, 0]))

    best_position = swarm.nodes[0].position.copy()
    best_cost = math.inf
    result = GsaResult(best_position, best_cost)

    logger.info("GSA start: %d nodes x %d iterations, dim=%d, workers=%d", n, t_final, space.dim, config.workers)

    executor = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for t in tqdm(range(t_final), desc="GSA", disable=not progress):
            positions = [node.position for node in swarm.nodes]
            if executor is not None:
                raw = list(executor.map(lambda x: _evaluate(cost_fn, x), positions))
            else:
                raw = [_evaluate(cost_fn, x) for x in positions]
            result.evaluations += len(raw)
            costs = _assign_failures(np.array(raw, dtype=float))

            j_best = int(np.argmin(costs))
            if costs[j_best] < result.best_cost:
                result.best_cost = float(costs[j_best])
                result.best_position = swarm.nodes[j_best].position.copy()

            G = update_gravity(config.g0, config.alpha, t, t_final)
            result.trace.append(result.best_cost)
            result.gravity.append(G)
            logger.debug("iter %d: G=%.4g best=%.6g", t, G, result.best_cost)

            # last move would never be evaluated
            if t == t_final - 1:
                break

            m, shares = compute_masses(costs)
            for node, c, mj, sj in zip(swarm.nodes, costs, m, shares):
                node.cost, node.mass, node.share = float(c), float(mj), float(sj)

            rngs = node_rngs(config.seed, t, n)
            count = kbest_count(n, t, t_final, config.kbest_min)
            forces = compute_force(swarm, G, count, rngs, config.delta, space.span)
            swarm = GsaSwarm([
                update_kinematics(node, forces[j], rngs[j], space) for j, node in enumerate(swarm.nodes)
            ])
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    if np.any(np.diff(result.trace) > 0):
        raise NumericalFailure("GSA best-so-far trace increased")

    logger.info("GSA done: best cost %.6g after %d evaluations", result.best_cost, result.evaluations)
    return result
