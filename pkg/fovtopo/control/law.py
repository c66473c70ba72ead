"""FOV-maintenance control law, collision term and energy bookkeeping.

Every edge ``i -> j`` carries four barriers evaluated at four points of agent
``i``: the agent itself (upper barrier, keeps ``j`` within ``rho1``) and its three
virtual points (lower barriers, keep ``j`` out of the exclusion disks). The
virtual points translate with ``x_i``, so the gradient with respect to a point is
also a gradient with respect to ``x_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..config import CollisionConfig, ControlConfig
from ..errors import CollisionError, DegenerateConfigurationError
from ..extended import build_extended_graph, extended_structural_matrix_canonical
from ..fov import COINCIDENT_DISTANCE, FovApproximation, RobotSpec, place_virtual_points
from ..graph import DirectedGraph, is_forest, outgoing_incidence_matrix, incidence_matrix
from .barrier import BarrierPotential, barrier_value_and_gradient, clamp_speed, distance

POINTS_PER_EDGE = 4


@dataclass(frozen=True)
class EdgePotentials:
    edge: tuple[int, int]
    sector: int
    approx: FovApproximation
    upper: BarrierPotential
    lower: tuple[BarrierPotential, BarrierPotential, BarrierPotential]

    @property
    def barriers(self) -> tuple[BarrierPotential, ...]:
        return (self.upper, *self.lower)


@dataclass(frozen=True)
class PotentialAssignment:
    graph: DirectedGraph
    edges: tuple[EdgePotentials, ...]

    @property
    def sectors(self) -> tuple[int, ...]:
        return tuple(ep.sector for ep in self.edges)


def build_assignment(
    graph: DirectedGraph,
    sectors: Sequence[int],
    robots: Sequence[RobotSpec],
    config: ControlConfig,
) -> PotentialAssignment:
    """Attach one upper and three lower barriers to every edge, using the tail's sector ``k``."""
    if len(sectors) != graph.num_edges:
        raise ValueError("need one sector index per edge")
    edges = []
    for (i, j), k in zip(graph.edges, sectors):
        _sector, approx = robots[i].sectors[k]
        upper = BarrierPotential(
            "upper", approx.rho1, config.upper_act_frac * approx.rho1, config.gain, (i, j)
        )
        lower = tuple(
            BarrierPotential("lower", r2, r2 + config.lower_act_frac * approx.rho1, config.gain, (i, j))
            for r2 in approx.exclusion_radii()
        )
        edges.append(EdgePotentials((i, j), int(k), approx, upper, lower))
    return PotentialAssignment(graph, tuple(edges))


def edge_points(positions: np.ndarray, headings: Sequence[float], ep: EdgePotentials) -> np.ndarray:
    """(4, 2): agent position followed by its three virtual points."""
    i, _ = ep.edge
    x_i = positions[i]
    return np.vstack([x_i, place_virtual_points(x_i, headings[i], ep.approx)])


def edge_terms(
    positions: np.ndarray, headings: Sequence[float], ep: EdgePotentials
) -> tuple[np.ndarray, np.ndarray]:
    """Barrier values (4,) and gradients (4, 2) with respect to each of the four points."""
    i, j = ep.edge
    x_j = positions[j]
    points = edge_points(positions, headings, ep)
    values = np.zeros(POINTS_PER_EDGE)
    grads = np.zeros((POINTS_PER_EDGE, 2))
    for alpha, (p, b) in enumerate(zip(points, ep.barriers)):
        d = distance(p, x_j)
        if alpha == 0 and d < COINCIDENT_DISTANCE:
            raise DegenerateConfigurationError((i, j), d)
        v, slope = barrier_value_and_gradient(b, d)
        values[alpha] = v
        if slope != 0.0:
            grads[alpha] = slope * (p - x_j) / d
    return values, grads


def agent_control(
    i: int, positions: np.ndarray, headings: Sequence[float], assignment: PotentialAssignment
) -> np.ndarray:
    """FOV term of agent ``i``: minus the summed point gradients over its out-edges."""
    positions = np.asarray(positions, dtype=float)
    u = np.zeros(2)
    for ep in assignment.edges:
        if ep.edge[0] == i:
            _, grads = edge_terms(positions, headings, ep)
            u -= grads.sum(axis=0)
    return u


def fov_controls(
    positions: np.ndarray, headings: Sequence[float], assignment: PotentialAssignment
) -> np.ndarray:
    positions = np.asarray(positions, dtype=float)
    u = np.zeros_like(positions)
    for ep in assignment.edges:
        _, grads = edge_terms(positions, headings, ep)
        u[ep.edge[0]] -= grads.sum(axis=0)
    return u


def collision_limit(robots: Sequence[RobotSpec], i: int, j: int, collision: CollisionConfig) -> float:
    radii = [r.collision_radius for r in (robots[i], robots[j]) if r.collision_radius is not None]
    return max(radii) if radii else collision.r_col


def collision_barrier(
    robots: Sequence[RobotSpec], i: int, j: int, collision: CollisionConfig
) -> BarrierPotential:
    limit = collision_limit(robots, i, j, collision)
    return BarrierPotential("lower", limit, limit + collision.delta_act, 1.0, (i, j))


def collision_control(
    i: int, positions: np.ndarray, robots: Sequence[RobotSpec], collision: CollisionConfig
) -> np.ndarray:
    """Repulsive increment for agent ``i`` from every other agent inside its collision band.

    Raises:
        CollisionError: if some pair is at or within its collision radius.
    """
    positions = np.asarray(positions, dtype=float)
    du = np.zeros(2)
    for j in range(len(positions)):
        if j == i:
            continue
        b = collision_barrier(robots, i, j, collision)
        d = distance(positions[i], positions[j])
        if d <= b.limit:
            raise CollisionError((min(i, j), max(i, j)), d, b.limit)
        _, slope = barrier_value_and_gradient(b, d)
        if slope != 0.0:
            du -= slope * (positions[i] - positions[j]) / d
    return du


def closed_loop_velocity(
    positions: np.ndarray,
    headings: Sequence[float],
    assignment: PotentialAssignment,
    robots: Sequence[RobotSpec],
    config: ControlConfig,
) -> np.ndarray:
    """FOV term plus collision term, clamped to ``v_max`` per agent."""
    u = fov_controls(positions, headings, assignment)
    if config.collision.enabled:
        for i in range(len(u)):
            u[i] += collision_control(i, positions, robots, config.collision)
    return clamp_speed(u, config.v_max)


def system_energy(
    positions: np.ndarray, headings: Sequence[float], assignment: PotentialAssignment
) -> float:
    """Sum of every FOV barrier value; collision terms are not part of the energy."""
    positions = np.asarray(positions, dtype=float)
    return float(sum(edge_terms(positions, headings, ep)[0].sum() for ep in assignment.edges))


def energy_gradient(
    positions: np.ndarray, headings: Sequence[float], assignment: PotentialAssignment
) -> np.ndarray:
    """Gradient of :func:`system_energy` with respect to every agent position (headings held)."""
    positions = np.asarray(positions, dtype=float)
    grad = np.zeros_like(positions)
    for ep in assignment.edges:
        i, j = ep.edge
        total = edge_terms(positions, headings, ep)[1].sum(axis=0)
        grad[i] += total
        grad[j] -= total
    return grad


@dataclass(frozen=True)
class EnergyRate:
    chain_rule: float
    edge_form: float
    structural_form: float | None


def energy_rate_quadratic(
    positions: np.ndarray,
    headings: Sequence[float],
    assignment: PotentialAssignment,
    P: int = POINTS_PER_EDGE,
) -> EnergyRate:
    """Energy derivative along the unclamped FOV flow, evaluated three ways.

    ``chain_rule`` is the ground truth ``sum_i grad_i V . u_i``. ``edge_form`` is
    ``-xi^T ((B^T B_+) (x) I) xi`` with ``xi_k`` the total gradient of edge ``k``.
    ``structural_form`` is ``-z^T (Sbar (x) I) z`` on the replicated system, with
    ``z`` the minimum-norm preimage of the replicated gradients; it needs a forest
    and is ``None`` otherwise. ``P = 1`` aggregates the four points of an edge.
    """
    if P not in (1, POINTS_PER_EDGE):
        raise ValueError(f"P must be 1 or {POINTS_PER_EDGE}, got {P}")
    positions = np.asarray(positions, dtype=float)
    g = assignment.graph
    u = fov_controls(positions, headings, assignment)
    chain = float(np.sum(energy_gradient(positions, headings, assignment) * u))
    if g.num_edges == 0:
        return EnergyRate(chain, 0.0, None)

    per_point = np.array([edge_terms(positions, headings, ep)[1] for ep in assignment.edges])
    xi = per_point.sum(axis=1)
    m = incidence_matrix(g).T @ outgoing_incidence_matrix(g)
    edge_form = -float(np.sum(xi * (m @ xi)))

    structural = None
    if is_forest(g):
        ext = build_extended_graph(g, P)
        idx = ext.indexing
        xi_tilde = np.zeros((idx.blocks * idx.E, 2))
        for k in range(idx.E):
            for alpha in range(1, P + 1):
                slot = per_point[k, alpha - 1] if P > 1 else xi[k]
                xi_tilde[idx.edge_column(k, alpha, k)] = slot
        b_bar = ext.B_bar.astype(float)
        z = b_bar @ np.linalg.solve(b_bar.T @ b_bar, xi_tilde)
        s_bar = extended_structural_matrix_canonical(ext)
        structural = -float(np.sum(z * (s_bar @ z)))
    return EnergyRate(chain, edge_form, structural)
