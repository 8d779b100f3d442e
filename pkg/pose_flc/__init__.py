"""
Pose FLC - fuzzy-tuned nonlinear pose filter on SE(3)

This package provides:
- Lie-group primitives for SO(3)/SE(3) (se3_core)
- Rigid-body scenario and sensor simulation (simulator)
- Nonlinear pose filter with bias estimation (pose_filter)
- Mamdani fuzzy gain scheduler (fuzzy_gain)
- Gravitational search algorithm (gsa)
- Episode runner, cost and offline tuning loop (tuning_harness)

Version: 1.0
"""

__version__ = "1.0.1"
__all__ = [
    "se3_core",
    "simulator",
    "pose_filter",
    "fuzzy_gain",
    "gsa",
    "objectives",
    "tuning_harness",
    "persistence",
]
