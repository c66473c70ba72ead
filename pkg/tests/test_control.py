from __future__ import annotations

import math

import numpy as np
import pytest

from fovtopo.config import CollisionConfig, ControlConfig
from fovtopo.control import (
    BarrierPotential,
    agent_control,
    barrier_value_and_gradient,
    build_assignment,
    clamp_speed,
    closed_loop_velocity,
    collision_control,
    edge_terms,
    energy_gradient,
    energy_rate_quadratic,
    fov_controls,
    system_energy,
)
from fovtopo.errors import CollisionError, ConstraintViolation, DegenerateConfigurationError
from fovtopo.fov import FovSector, RobotSpec, default_approximation, rotation_matrix
from fovtopo.graph import DirectedGraph

UPPER = BarrierPotential("upper", 10.0, 8.0, 1.0, (0, 1))
LOWER = BarrierPotential("lower", 1.0, 2.0, 1.0, (0, 1))


def _assignment(graph: DirectedGraph, robot: RobotSpec, config: ControlConfig | None = None):
    robots = [robot] * graph.n
    return build_assignment(graph, [0] * graph.num_edges, robots, config or ControlConfig())


def _chain_positions(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Random chain where every successor sits well inside its predecessor's approximation."""
    headings = rng.uniform(-math.pi, math.pi, size=n)
    positions = [rng.uniform(-5, 5, size=2)]
    for k in range(n - 1):
        r = rng.uniform(0.4, 1.2) if rng.random() < 0.5 else rng.uniform(3.2, 3.9)
        phi = headings[k] + rng.uniform(-0.6, 0.6)
        positions.append(positions[-1] + r * np.array([math.cos(phi), math.sin(phi)]))
    return np.array(positions), headings


def _numeric_gradient(positions, headings, assignment, h=1e-6) -> np.ndarray:
    grad = np.zeros_like(positions)
    for i in range(positions.shape[0]):
        for c in range(2):
            plus, minus = positions.copy(), positions.copy()
            plus[i, c] += h
            minus[i, c] -= h
            grad[i, c] = (
                system_energy(plus, headings, assignment)
                - system_energy(minus, headings, assignment)
            ) / (2.0 * h)
    return grad


def test_barrier_examples() -> None:
    assert barrier_value_and_gradient(UPPER, 8.0) == (0.0, 0.0)
    value, slope = barrier_value_and_gradient(UPPER, 9.0)
    assert value == pytest.approx(1.0)
    assert slope == pytest.approx(3.0)
    value, slope = barrier_value_and_gradient(LOWER, 1.5)
    assert value == pytest.approx(0.5)
    assert slope < 0.0
    assert barrier_value_and_gradient(LOWER, 2.5) == (0.0, 0.0)


def test_barrier_blows_up() -> None:
    d = 10.0 - 1e-6 * (10.0 - 8.0)
    assert barrier_value_and_gradient(UPPER, d)[0] >= 1e6
    d = 1.0 + 1e-6 * (2.0 - 1.0)
    assert barrier_value_and_gradient(LOWER, d)[0] >= 1e6


def test_barrier_is_smooth_at_activation() -> None:
    for b in (UPPER, LOWER):
        for d in (b.d_act - 1e-9, b.d_act + 1e-9):
            value, slope = barrier_value_and_gradient(b, d)
            assert abs(value) <= 1e-15
            assert abs(slope) <= 1e-6


def test_barrier_is_increasing_toward_limit() -> None:
    ds = np.linspace(8.01, 9.99, 50)
    values = [barrier_value_and_gradient(UPPER, d)[0] for d in ds]
    assert np.all(np.diff(values) > 0)
    ds = np.linspace(1.99, 1.01, 50)
    values = [barrier_value_and_gradient(LOWER, d)[0] for d in ds]
    assert np.all(np.diff(values) > 0)


@pytest.mark.parametrize("b, d", [(UPPER, 10.0), (UPPER, 11.0), (LOWER, 1.0), (LOWER, 0.2)])
def test_barrier_violation(b, d) -> None:
    with pytest.raises(ConstraintViolation) as info:
        barrier_value_and_gradient(b, d)
    assert info.value.edge == (0, 1)
    assert info.value.kind == b.kind


def test_barrier_validation() -> None:
    with pytest.raises(ValueError):
        BarrierPotential("upper", 1.0, 2.0)
    with pytest.raises(ValueError):
        BarrierPotential("lower", 2.0, 1.0)
    with pytest.raises(ValueError):
        BarrierPotential("upper", 2.0, 1.0, gain=0.0)
    assert UPPER.is_active(9.0) and not UPPER.is_active(7.0)
    assert UPPER.margin(9.5) == pytest.approx(0.5)
    assert LOWER.margin(1.25) == pytest.approx(0.25)


def test_clamp_speed() -> None:
    u = clamp_speed(np.array([[3.0, 4.0], [0.1, 0.0]]), 1.0)
    np.testing.assert_allclose(u, [[0.6, 0.8], [0.1, 0.0]])
    np.testing.assert_allclose(clamp_speed(np.array([0.0, 5.0]), 2.0), [0.0, 2.0])
    np.testing.assert_array_equal(clamp_speed(np.array([0.3, 0.4]), 2.0), [0.3, 0.4])


def test_assignment_uses_sector_radii(robot) -> None:
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    ep = assignment.edges[0]
    assert ep.upper.limit == 4.0 and ep.upper.d_act == pytest.approx(3.2)
    assert all(b.limit == 4.0 for b in ep.lower)
    assert all(b.d_act == pytest.approx(4.8) for b in ep.lower)
    assert assignment.sectors == (0,)


def test_assignment_uses_exclusion_overrides() -> None:
    sector = FovSector(heading=0.0, central_angle=math.pi / 2, range=10.0)
    narrow = RobotSpec(sectors=[(sector, default_approximation(sector, (2.0, 10.0, 2.0)))])
    ep = _assignment(DirectedGraph(n=2, edges=((0, 1),)), narrow).edges[0]
    assert [b.limit for b in ep.lower] == [2.0, 10.0, 2.0]
    np.testing.assert_allclose([b.d_act for b in ep.lower], [4.0, 12.0, 4.0])
    assert ep.upper.limit == 10.0

    positions = np.array([[0.0, 0.0], [0.0, 5.0]])
    values, _ = edge_terms(positions, [0.0, 0.0], ep)
    # only the rear disk (11.18 m away, active below 12 m) contributes
    assert values[0] == 0.0 and values[1] == 0.0 and values[3] == 0.0
    assert values[2] > 0.0

    uniform = _assignment(DirectedGraph(n=2, edges=((0, 1),)), RobotSpec.single(sector))
    with pytest.raises(ConstraintViolation):
        edge_terms(positions, [0.0, 0.0], uniform.edges[0])


def test_inactive_configuration(robot) -> None:
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    positions = np.array([[0.0, 0.0], [2.0, 0.0]])
    np.testing.assert_array_equal(agent_control(0, positions, [0.0, 0.0], assignment), [0, 0])
    assert system_energy(positions, [0.0, 0.0], assignment) == 0.0
    rate = energy_rate_quadratic(positions, [0.0, 0.0], assignment)
    assert rate.chain_rule == 0.0


def test_upper_barrier_attracts(robot) -> None:
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    positions = np.array([[0.0, 0.0], [3.6, 0.0]])
    u = agent_control(0, positions, [0.0, 0.0], assignment)
    assert u[0] > 0.0
    assert u[1] == pytest.approx(0.0, abs=1e-12)
    # the head of an edge gets no FOV term from it
    np.testing.assert_array_equal(agent_control(1, positions, [0.0, 0.0], assignment), [0, 0])


def test_rear_barrier_pushes_back() -> None:
    robot = RobotSpec(
        sectors=[
            {
                "heading": 0.0,
                "central_angle": math.pi / 2,
                "range": 4.0,
                "approx": {
                    "rho1": 4.0,
                    "rho2": 4.0,
                    "offsets": [[math.pi / 2, 40.0, 0.0], [math.pi, 4.0, 0.0], [-math.pi / 2, 40.0, 0.0]],
                },
            }
        ]
    )
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    positions = np.array([[0.0, 0.0], [0.4, 0.0]])
    u = agent_control(0, positions, [0.0, 0.0], assignment)
    assert u[0] < 0.0
    numeric = _numeric_gradient(positions, [0.0, 0.0], assignment)
    np.testing.assert_allclose(u, -numeric[0], rtol=1e-6, atol=1e-9)
    values, _ = edge_terms(positions, [0.0, 0.0], assignment.edges[0])
    assert values[0] == 0.0 and values[1] > 0.0
    assert values[2] == 0.0 and values[3] == 0.0


def test_coincident_agents_are_rejected(robot) -> None:
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    with pytest.raises(DegenerateConfigurationError):
        agent_control(0, np.array([[1.0, 1.0], [1.0, 1.0]]), [0.0, 0.0], assignment)


def test_broken_link_raises(robot) -> None:
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    with pytest.raises(ConstraintViolation) as info:
        system_energy(np.array([[0.0, 0.0], [4.5, 0.0]]), [0.0, 0.0], assignment)
    assert info.value.edge == (0, 1)
    assert info.value.kind == "upper"


def test_single_edge_energy_example() -> None:
    robot = RobotSpec.single(FovSector(central_angle=math.pi / 2, range=10.0))
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    positions = np.array([[0.0, 0.0], [9.0, 0.0]])
    assert system_energy(positions, [0.0, 0.0], assignment) == pytest.approx(1.0)


def test_gradient_matches_finite_differences(robot) -> None:
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 5))
        graph = DirectedGraph(n=n, edges=tuple((k, k + 1) for k in range(n - 1)))
        assignment = _assignment(graph, robot)
        positions, headings = _chain_positions(rng, n)
        if system_energy(positions, headings, assignment) == 0.0:
            continue
        analytic = energy_gradient(positions, headings, assignment)
        numeric = _numeric_gradient(positions, headings, assignment)
        scale = max(1.0, float(np.max(np.abs(analytic))))
        np.testing.assert_allclose(numeric, analytic, rtol=1e-6, atol=1e-7 * scale)
        checked += 1


def test_fov_controls_are_minus_own_gradient(robot, chain4) -> None:
    rng = np.random.default_rng(6)
    assignment = _assignment(chain4, robot)
    positions, headings = _chain_positions(rng, 4)
    u = fov_controls(positions, headings, assignment)
    for i in range(4):
        np.testing.assert_allclose(u[i], agent_control(i, positions, headings, assignment))


def test_energy_rigid_motion_invariance(robot, chain4) -> None:
    rng = np.random.default_rng(13)
    assignment = _assignment(chain4, robot)
    for _ in range(30):
        positions, headings = _chain_positions(rng, 4)
        angle = rng.uniform(-math.pi, math.pi)
        shift = rng.uniform(-10, 10, size=2)
        moved = positions @ rotation_matrix(angle).T + shift
        before = system_energy(positions, headings, assignment)
        after = system_energy(moved, headings + angle, assignment)
        assert after == pytest.approx(before, rel=1e-9, abs=1e-12)


def test_collision_control() -> None:
    collision = CollisionConfig(r_col=0.5, delta_act=1.0)
    robots = [RobotSpec.single(FovSector(range=4.0))] * 3
    far = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    np.testing.assert_array_equal(collision_control(0, far, robots, collision), [0, 0])

    pair = np.array([[0.0, 0.0], [1.0, 0.0], [20.0, 20.0]])
    du0 = collision_control(0, pair, robots, collision)
    du1 = collision_control(1, pair, robots, collision)
    np.testing.assert_allclose(du0, -du1)
    assert du0[0] < 0.0 and du0[1] == 0.0

    line = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    np.testing.assert_allclose(collision_control(1, line, robots, collision), [0, 0], atol=1e-12)

    with pytest.raises(CollisionError) as info:
        collision_control(1, np.array([[0.0, 0.0], [0.4, 0.0], [5.0, 5.0]]), robots, collision)
    assert info.value.pair == (0, 1)


def test_collision_radius_from_robot() -> None:
    collision = CollisionConfig(r_col=0.2, delta_act=1.0)
    wide = RobotSpec.single(FovSector(range=4.0), collision_radius=0.7)
    plain = RobotSpec.single(FovSector(range=4.0))
    with pytest.raises(CollisionError):
        collision_control(0, np.array([[0.0, 0.0], [0.6, 0.0]]), [plain, wide], collision)


def test_closed_loop_velocity_is_clamped(robot) -> None:
    config = ControlConfig(v_max=0.5)
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot, config)
    positions = np.array([[0.0, 0.0], [3.99, 0.0]])
    u = closed_loop_velocity(positions, [0.0, 0.0], assignment, [robot, robot], config)
    assert np.linalg.norm(u[0]) == pytest.approx(0.5)


def test_energy_rate_forms_agree(robot) -> None:
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 40:
        n = int(rng.integers(2, 5))
        graph = DirectedGraph(n=n, edges=tuple((k, k + 1) for k in range(n - 1)))
        assignment = _assignment(graph, robot)
        positions, headings = _chain_positions(rng, n)
        for P in (1, 4):
            rate = energy_rate_quadratic(positions, headings, assignment, P)
            scale = max(1.0, abs(rate.chain_rule))
            assert rate.edge_form == pytest.approx(rate.chain_rule, abs=1e-9 * scale)
            assert rate.structural_form == pytest.approx(rate.chain_rule, abs=1e-8 * scale)
        checked += 1


def test_energy_rate_without_forest(robot) -> None:
    graph = DirectedGraph(n=2, edges=((0, 1), (1, 0)))
    assignment = _assignment(graph, robot)
    positions = np.array([[0.0, 0.0], [3.5, 0.0]])
    rate = energy_rate_quadratic(positions, [0.0, math.pi], assignment)
    assert rate.structural_form is None
    assert rate.edge_form == pytest.approx(rate.chain_rule)
    with pytest.raises(ValueError):
        energy_rate_quadratic(positions, [0.0, math.pi], assignment, P=2)


def test_single_follower_descends(robot) -> None:
    assignment = _assignment(DirectedGraph(n=2, edges=((0, 1),)), robot)
    positions = np.array([[0.0, 0.0], [3.6, 0.0]])
    headings = [0.0, 0.0]
    rate = energy_rate_quadratic(positions, headings, assignment)
    assert rate.chain_rule < 0.0
    u = fov_controls(positions, headings, assignment)
    dt = 1e-6
    numeric = (
        system_energy(positions + dt * u, headings, assignment)
        - system_energy(positions - dt * u, headings, assignment)
    ) / (2.0 * dt)
    assert numeric == pytest.approx(rate.chain_rule, rel=1e-4)
