from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from fovtopo.config import ScenarioConfig
from fovtopo.fov import FovSector, RobotSpec
from fovtopo.graph import DirectedGraph

QUARTER = math.pi / 2


@pytest.fixture
def single_edge() -> DirectedGraph:
    return DirectedGraph(n=2, edges=((0, 1),))


@pytest.fixture
def two_cycle() -> DirectedGraph:
    return DirectedGraph(n=2, edges=((0, 1), (1, 0)))


@pytest.fixture
def path3() -> DirectedGraph:
    return DirectedGraph(n=3, edges=((0, 1), (1, 2)))


@pytest.fixture
def chain4() -> DirectedGraph:
    return DirectedGraph(n=4, edges=((0, 1), (1, 2), (2, 3)))


@pytest.fixture
def unstable_tree() -> DirectedGraph:
    return DirectedGraph(n=4, edges=((0, 1), (0, 2), (1, 3)))


@pytest.fixture
def robot() -> RobotSpec:
    """One forward 90 degree sector with a 4 m range."""
    return RobotSpec.single(FovSector(heading=0.0, central_angle=QUARTER, range=4.0))


def all_digraphs(n: int, max_edges: int):
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for k in range(max_edges + 1):
        for edges in itertools.combinations(pairs, k):
            yield DirectedGraph(n=n, edges=edges)


def random_digraph(rng: np.random.Generator, n_max: int, e_max: int) -> DirectedGraph:
    n = int(rng.integers(1, n_max + 1))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    k = int(rng.integers(0, min(e_max, len(pairs)) + 1))
    chosen = rng.permutation(len(pairs))[:k]
    return DirectedGraph(n=n, edges=tuple(pairs[c] for c in chosen))


def random_forest(rng: np.random.Generator, n_max: int) -> DirectedGraph:
    """Random oriented forest with at least one edge."""
    n = int(rng.integers(2, n_max + 1))
    edges = []
    for v in range(1, n):
        if rng.random() < 0.8 or not edges and v == n - 1:
            u = int(rng.integers(0, v))
            edges.append((u, v) if rng.random() < 0.5 else (v, u))
    order = rng.permutation(len(edges))
    return DirectedGraph(n=n, edges=tuple(edges[k] for k in order))


def chain_scenario(
    robot: RobotSpec,
    gaps: list[float],
    angles: list[float] | None = None,
    **overrides,
) -> ScenarioConfig:
    """Leaderless chain ``0 -> 1 -> ...`` with agent ``k+1`` placed ``gaps[k]`` ahead of ``k``."""
    angles = angles or [0.0] * len(gaps)
    positions = [np.array([2.0, 10.0])]
    for gap, angle in zip(gaps, angles):
        positions.append(positions[-1] + gap * np.array([math.cos(angle), math.sin(angle)]))
    n = len(positions)
    data = {
        "agents": [
            {"position": p.tolist(), "heading": 0.0, "robot": robot} for p in positions
        ],
        "graph": {"n": n, "edges": [[k, k + 1] for k in range(n - 1)]},
        "noise": {"sigma_pos": 0.0, "seed": 0},
    }
    data.update(overrides)
    return ScenarioConfig.model_validate(data)
