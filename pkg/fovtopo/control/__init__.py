from .barrier import BarrierPotential, barrier_value_and_gradient, clamp_speed
from .law import (
    POINTS_PER_EDGE,
    EdgePotentials,
    EnergyRate,
    PotentialAssignment,
    agent_control,
    build_assignment,
    closed_loop_velocity,
    collision_barrier,
    collision_control,
    collision_limit,
    edge_points,
    edge_terms,
    energy_gradient,
    energy_rate_quadratic,
    fov_controls,
    system_energy,
)

__all__ = [
    "POINTS_PER_EDGE",
    "BarrierPotential",
    "EdgePotentials",
    "EnergyRate",
    "PotentialAssignment",
    "agent_control",
    "barrier_value_and_gradient",
    "build_assignment",
    "clamp_speed",
    "closed_loop_velocity",
    "collision_barrier",
    "collision_control",
    "collision_limit",
    "edge_points",
    "edge_terms",
    "energy_gradient",
    "energy_rate_quadratic",
    "fov_controls",
    "system_energy",
]
