#!/usr/bin/env python3
"""
Unit tests for pose_flc/gsa.py and pose_flc/objectives.py

Run: python3 -m pytest tests/test_gsa.py
"""

import math
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from pose_flc.errors import ConfigurationError
from pose_flc.gsa import (
    GsaNode,
    GsaSwarm,
    SearchSpace,
    compute_masses,
    kbest_count,
    node_force,
    run_gsa,
    update_gravity,
    update_kinematics,
)
from pose_flc.models import GsaConfig
from pose_flc.objectives import get_objective, rastrigin, rosenbrock, sphere


class FixedRandom:
    """rng stand-in whose random() always returns the same value"""

    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


def _node(x, share=0.0, v=None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.zeros_like(x) if v is None else np.atleast_1d(np.asarray(v, dtype=float))
    return GsaNode(x, v, share=share)


def test_gravity_schedule():
    assert update_gravity(100.0, 20.0, 0, 250) == 100.0
    end = update_gravity(100.0, 20.0, 250, 250)
    assert abs(end - 2.061e-7) < 1e-9, f"G(T) should be about 2.061e-7, got {end}"
    assert update_gravity(100.0, 0.0, 100, 250) == 100.0, "alpha=0 keeps G constant"
    with pytest.raises(ValueError):
        update_gravity(100.0, 20.0, 0, 0)
    print("✓ gravity schedule")


def test_masses_for_minimization():
    m, shares = compute_masses([1.0, 3.0, 5.0])
    assert np.allclose(m, [1.0, 0.5, 0.0])
    assert np.allclose(shares, [2.0 / 3.0, 1.0 / 3.0, 0.0])

    m, shares = compute_masses([4.0, 4.0, 4.0, 4.0])
    assert np.allclose(m, 1.0) and np.allclose(shares, 0.25), "Equal costs give uniform shares"
    print("✓ masses")


def test_kbest_count_shrinks():
    assert kbest_count(100, 0, 250) == 100
    assert kbest_count(100, 50, 250) == 80
    assert kbest_count(100, 250, 250) == 1
    assert kbest_count(100, 249, 250, minimum=5) == 5


def test_pairwise_force():
    swarm = GsaSwarm([_node(0.0, share=0.5), _node(2.0, share=0.5)])
    F = node_force(swarm, 0, 1.0, [0, 1], FixedRandom(1.0), 1e-9)
    assert abs(F[0] - 0.25) < 1e-9, f"Expected F = 0.5*0.5/2 * 2 = 0.25, got {F[0]}"
    F_back = node_force(swarm, 1, 1.0, [0, 1], FixedRandom(1.0), 1e-9)
    assert abs(F_back[0] + 0.25) < 1e-9, "Force on the other node points back"
    print("✓ pairwise force")


def test_force_ignores_non_attractors():
    swarm = GsaSwarm([_node(0.0, share=0.5), _node(2.0, share=0.5), _node(-4.0, share=0.0)])
    F = node_force(swarm, 0, 1.0, [1], FixedRandom(1.0), 1e-9)
    assert abs(F[0] - 0.25) < 1e-9
    assert np.all(node_force(swarm, 1, 1.0, [1], FixedRandom(1.0), 1e-9) == 0.0), "No self attraction"


def test_force_uses_box_normalized_distance():
    """Span 4 turns a distance of 2 into 0.5, so the force is 4x the raw one"""
    swarm = GsaSwarm([_node(0.0, share=0.5), _node(2.0, share=0.5)])
    F = node_force(swarm, 0, 1.0, [0, 1], FixedRandom(1.0), 1e-9, span=np.array([4.0]))
    assert abs(F[0] - 1.0) < 1e-9, f"Expected F = 0.5*0.5/0.5 * 2 = 1.0, got {F[0]}"


def test_search_space_span():
    space = SearchSpace.from_bounds([(0.0, 1.0), (-2.0, 2.0), (3.0, 3.0)])
    assert np.array_equal(space.span, [1.0, 4.0, 1.0]), "Zero-width dimensions count as width 1"
    assert np.allclose(SearchSpace.cube(-5.0, 5.0, 3).span, 10.0)


def test_kinematics_update():
    space = SearchSpace.cube(-1.0, 1.0, 1)

    moved = update_kinematics(_node(0.0, share=0.0, v=2.0), np.array([5.0]), FixedRandom(0.5), space)
    assert moved.position[0] == 1.0 and moved.velocity[0] == 1.0, "Zero share ignores the force"

    clamped = update_kinematics(_node(0.5, share=0.5, v=2.0), np.array([0.5]), FixedRandom(0.5), space)
    assert clamped.position[0] == 1.0
    assert clamped.velocity[0] == 0.0, "A clamped dimension loses its velocity"
    print("✓ kinematics")


def test_search_space_validation():
    with pytest.raises(ConfigurationError):
        SearchSpace((1.0,), (0.0,))
    with pytest.raises(ConfigurationError):
        SearchSpace((), ())
    space = SearchSpace.from_bounds([(0.0, 1.0), (-2.0, 2.0)])
    assert space.dim == 2
    assert space.contains(np.array([0.5, -2.0]))
    assert not space.contains(np.array([1.5, 0.0]))


def test_single_iteration_returns_best_sample():
    space = SearchSpace.cube(-5.0, 5.0, 3)
    config = GsaConfig(nodes=12, iterations=1, seed=9)
    result = run_gsa(space, sphere, config)

    initial = GsaSwarm.initialize(space, 12, np.random.default_rng([9, 0]))
    costs = [sphere(x) for x in initial.positions]
    assert result.best_cost == min(costs)
    assert np.array_equal(result.best_position, initial.positions[int(np.argmin(costs))])
    assert result.trace == [result.best_cost] and result.evaluations == 12
    print("✓ T=1 returns the best initial sample")


def test_constant_cost():
    result = run_gsa(SearchSpace.cube(0.0, 1.0, 2), lambda x: 3.0, GsaConfig(nodes=5, iterations=10))
    assert result.best_cost == 3.0
    assert all(c == 3.0 for c in result.trace)


def test_positions_stay_in_bounds():
    space = SearchSpace.from_bounds([(0.0, 0.15), (5.0, 30.0), (-1.0, 1.0)])
    seen = []

    def cost(x):
        seen.append(x.copy())
        return float(np.sum(x))

    run_gsa(space, cost, GsaConfig(nodes=10, iterations=20, seed=3))
    assert len(seen) == 200
    assert all(space.contains(x) for x in seen), "Every evaluated position lies inside the box"
    print("✓ bounds respected")


def test_deterministic_and_worker_independent():
    space = SearchSpace.cube(-5.12, 5.12, 4)
    serial = run_gsa(space, rastrigin, GsaConfig(nodes=10, iterations=15, seed=4))
    again = run_gsa(space, rastrigin, GsaConfig(nodes=10, iterations=15, seed=4))
    parallel = run_gsa(space, rastrigin, GsaConfig(nodes=10, iterations=15, seed=4, workers=4))
    assert serial.trace == again.trace
    assert serial.trace == parallel.trace, "Thread pool changed the search"
    assert np.array_equal(serial.best_position, parallel.best_position)
    assert all(b <= a for a, b in zip(serial.trace, serial.trace[1:])), "Best-so-far never increases"
    print("✓ deterministic across worker counts")


def test_failing_evaluations_are_tolerated():
    def flaky(x):
        if x[0] > 0.0:
            raise RuntimeError("diverged")
        return sphere(x)

    result = run_gsa(SearchSpace.cube(-1.0, 1.0, 2), flaky, GsaConfig(nodes=10, iterations=5, seed=1))
    assert math.isfinite(result.best_cost)
    assert result.best_position[0] <= 0.0

    def broken(x):
        return float("nan")

    result = run_gsa(SearchSpace.cube(-1.0, 1.0, 2), broken, GsaConfig(nodes=4, iterations=3))
    assert result.best_cost == math.inf


def test_sphere_converges():
    space = get_objective("sphere").space(2)
    result = run_gsa(space, sphere, GsaConfig(nodes=30, iterations=150, seed=0))
    assert result.best_cost < 0.1, f"Sphere best {result.best_cost:.4g}"
    print(f"✓ sphere 2-D best {result.best_cost:.3e}")


def test_sphere_5d_converges_with_default_gravity():
    assert GsaConfig().g0 == 3.0
    space = get_objective("sphere").space(5)
    for seed in range(3):
        result = run_gsa(space, sphere, GsaConfig(nodes=30, iterations=250, seed=seed))
        assert result.best_cost < 1e-2, f"seed {seed}: sphere 5-D best {result.best_cost:.4g}"
    print("✓ sphere 5-D below 1e-2 on seeds 0-2")


def test_objectives():
    assert sphere(np.zeros(4)) == 0.0
    assert rosenbrock(np.ones(3)) == 0.0
    assert abs(rastrigin(np.zeros(5))) < 1e-12
    assert rastrigin(np.ones(2)) == pytest.approx(2.0)
    with pytest.raises(ConfigurationError):
        get_objective("ackley")
    with pytest.raises(ConfigurationError):
        get_objective("rosenbrock").space(1)


if __name__ == "__main__":
    tests = [
        test_gravity_schedule,
        test_masses_for_minimization,
        test_kbest_count_shrinks,
        test_pairwise_force,
        test_force_ignores_non_attractors,
        test_force_uses_box_normalized_distance,
        test_search_space_span,
        test_kinematics_update,
        test_search_space_validation,
        test_single_iteration_returns_best_sample,
        test_constant_cost,
        test_positions_stay_in_bounds,
        test_deterministic_and_worker_independent,
        test_failing_evaluations_are_tolerated,
        test_sphere_converges,
        test_sphere_5d_converges_with_default_gravity,
        test_objectives,
    ]
    failed = 0
    for test in tests:
        try:
            test()
        except Exception as e:
            print(f"FAILED {test.__name__}: {e}")
            failed += 1
    print(f"\nResults: {len(tests) - failed} passed, {failed} failed")
    sys.exit(1 if failed else 0)
