"""Benchmark objectives for sanity-checking the search (all minimized at 0)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from pose_flc.errors import ConfigurationError
from pose_flc.gsa import SearchSpace


def sphere(x: np.ndarray) -> float:
    return float(np.sum(np.asarray(x) ** 2))


def rosenbrock(x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(10.0 * x.shape[0] + np.sum(x ** 2 - 10.0 * np.cos(2.0 * np.pi * x)))


@dataclass(frozen=True)
class Objective:
    name: str
    fn: Callable[[np.ndarray], float]
    lower: float
    upper: float
    min_dim: int = 1

    def space(self, dim: int) -> SearchSpace:
        if dim < self.min_dim:
            raise ConfigurationError(f"{self.name} needs dim >= {self.min_dim}, got {dim}")
        return SearchSpace.cube(self.lower, self.upper, dim)


OBJECTIVES: Dict[str, Objective] = {
    "sphere": Objective("sphere", sphere, -5.0, 5.0),
    "rosenbrock": Objective("rosenbrock", rosenbrock, -5.0, 10.0, min_dim=2),
    "rastrigin": Objective("rastrigin", rastrigin, -5.12, 5.12),
}


def get_objective(name: str) -> Objective:
    if name not in OBJECTIVES:
        raise ConfigurationError(f"unknown function '{name}' (choose from {', '.join(OBJECTIVES)})")
    return OBJECTIVES[name]
