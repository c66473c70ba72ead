"""Closed-loop integration of a scenario with margin-aware RK4 substepping."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..config import ScenarioConfig
from ..control import (
    PotentialAssignment,
    build_assignment,
    closed_loop_velocity,
    collision_barrier,
    edge_points,
    edge_terms,
    system_energy,
)
from ..control.barrier import distance
from ..errors import (
    CollisionError,
    CollisionEvent,
    ConfigError,
    ConstraintViolation,
    DegenerateConfigurationError,
    FovTopoError,
    LinkBreak,
    SubstepExhausted,
    TerminalEvent,
)
from ..fov import RobotSpec, check_separation, select_sector, sensing_graph, wrap_angle
from ..utils.paths import seed_dir
from .logs import EventLog, TrajectoryLog, write_events_jsonl, write_summary, write_trajectory_csv
from .profiles import leader_velocity

logger = logging.getLogger(__name__)

_BREAKS = (ConstraintViolation, CollisionError, DegenerateConfigurationError)


@dataclass(frozen=True)
class SimState:
    t: float
    positions: np.ndarray
    headings: np.ndarray


@dataclass(frozen=True)
class ScenarioModel:
    """A validated scenario with its barrier assignment resolved."""

    config: ScenarioConfig
    robots: tuple[RobotSpec, ...]
    assignment: PotentialAssignment
    leaders: np.ndarray
    initial_headings: np.ndarray

    @property
    def n(self) -> int:
        return len(self.robots)

    def initial_state(self) -> SimState:
        positions = np.array([a.position for a in self.config.agents], dtype=float)
        return SimState(0.0, positions, self.initial_headings.copy())


def prepare(config: ScenarioConfig) -> ScenarioModel:
    """Resolve sector assignment and check that every link starts intact.

    Raises:
        ConfigError: if a link is broken at t = 0, agents start inside a
            collision radius, or the leader profile is unknown.
        DegenerateConfigurationError: if two agents coincide.
    """
    robots = tuple(a.robot for a in config.agents)
    positions = np.array([a.position for a in config.agents], dtype=float)
    headings = np.array([a.heading for a in config.agents], dtype=float)
    leaders = np.array([a.role == "leader" for a in config.agents])
    check_separation(positions)
    if leaders.any():
        leader_velocity(config.leader_profile, 0.0)

    sectors = config.assignment
    if sectors is None:
        resolved = []
        for i, j in config.graph.edges:
            k = select_sector(positions[i], headings[i], robots[i], positions[j])
            if k is None:
                raise ConfigError(
                    f"initial link ({i}, {j}) is broken: {j} is outside every sector of {i}"
                )
            resolved.append(k)
        sectors = tuple(resolved)
    assignment = build_assignment(config.graph, sectors, robots, config.potentials)

    for ep in assignment.edges:
        try:
            edge_terms(positions, headings, ep)
        except ConstraintViolation as exc:
            raise ConfigError(f"initial link {ep.edge} is broken: {exc}") from exc
    if config.potentials.collision.enabled:
        for i in range(len(robots)):
            for j in range(i + 1, len(robots)):
                limit = collision_barrier(robots, i, j, config.potentials.collision).limit
                d = distance(positions[i], positions[j])
                if d <= limit:
                    raise ConfigError(f"agents {i} and {j} start within collision radius ({d:.6g} m)")
    return ScenarioModel(config, robots, assignment, leaders, headings)


def link_margins(
    positions: np.ndarray, headings: Sequence[float], assignment: PotentialAssignment
) -> np.ndarray:
    """(E, 2) per-edge margins: ``rho1 - |x_i - x_j|`` and ``min_tau(|x_i^tau - x_j| - rho2_tau)``."""
    positions = np.asarray(positions, dtype=float)
    out = np.zeros((len(assignment.edges), 2))
    for e, ep in enumerate(assignment.edges):
        points = edge_points(positions, headings, ep)
        d = np.linalg.norm(points - positions[ep.edge[1]], axis=1)
        out[e, 0] = ep.upper.limit - d[0]
        out[e, 1] = float(np.min(d[1:] - ep.approx.exclusion_radii()))
    return out


def agent_margins(model: ScenarioModel, positions: np.ndarray, headings: np.ndarray) -> np.ndarray:
    """Smallest active-barrier margin touching each agent, as owner or target; inf if none."""
    out = np.full(model.n, math.inf)
    for ep in model.assignment.edges:
        i, j = ep.edge
        for p, b in zip(edge_points(positions, headings, ep), ep.barriers):
            d = distance(p, positions[j])
            if b.is_active(d):
                m = b.margin(d)
                out[i] = min(out[i], m)
                out[j] = min(out[j], m)
    collision = model.config.potentials.collision
    if collision.enabled:
        for i in range(model.n):
            for j in range(i + 1, model.n):
                b = collision_barrier(model.robots, i, j, collision)
                d = distance(positions[i], positions[j])
                if b.is_active(d):
                    out[i] = min(out[i], b.margin(d))
                    out[j] = min(out[j], b.margin(d))
    return out


def velocity_field(
    model: ScenarioModel,
    positions: np.ndarray,
    headings: np.ndarray,
    t: float,
    offset: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Agent velocities and heading rates at time ``t``.

    ``offset`` is a measurement error the followers' controller sees; leaders
    follow their profile regardless.
    """
    cfg = model.config
    sensed = positions if offset is None else positions + offset
    u = closed_loop_velocity(sensed, headings, model.assignment, model.robots, cfg.potentials)
    for i in np.flatnonzero(model.leaders):
        u[i] = leader_velocity(cfg.leader_profile, t, model.initial_headings[i])

    rates = np.zeros(model.n)
    if cfg.heading_policy.mode == "face-target":
        steered: set[int] = set()
        for ep in model.assignment.edges:
            i, j = ep.edge
            if model.leaders[i] or i in steered:
                continue
            steered.add(i)
            sector = model.robots[i].sectors[ep.sector][0]
            d = sensed[j] - sensed[i]
            target = math.atan2(d[1], d[0]) - sector.heading
            rates[i] = wrap_angle(target - headings[i]) / cfg.heading_policy.time_constant
    return u, rates


def _rk4(
    model: ScenarioModel,
    positions: np.ndarray,
    headings: np.ndarray,
    t: float,
    h: float,
    offset: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    k1, w1 = velocity_field(model, positions, headings, t, offset)
    half = 0.5 * h
    k2, w2 = velocity_field(model, positions + half * k1, headings + half * w1, t + half, offset)
    k3, w3 = velocity_field(model, positions + half * k2, headings + half * w2, t + half, offset)
    k4, w4 = velocity_field(model, positions + h * k3, headings + h * w3, t + h, offset)
    new_positions = positions + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    new_headings = headings + h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
    return new_positions, new_headings


def _check_state(model: ScenarioModel, positions: np.ndarray, headings: np.ndarray) -> None:
    for ep in model.assignment.edges:
        edge_terms(positions, headings, ep)
    collision = model.config.potentials.collision
    if collision.enabled:
        for i in range(model.n):
            for j in range(i + 1, model.n):
                limit = collision_barrier(model.robots, i, j, collision).limit
                d = distance(positions[i], positions[j])
                if d <= limit:
                    raise CollisionError((i, j), d, limit)


def _as_terminal(exc: FovTopoError, t: float) -> TerminalEvent:
    if isinstance(exc, ConstraintViolation):
        return LinkBreak(t, exc.edge, exc.kind)
    return CollisionEvent(t, exc.pair)


def _exhausted(
    model: ScenarioModel,
    positions: np.ndarray,
    headings: np.ndarray,
    t: float,
    failure: FovTopoError | None,
) -> TerminalEvent:
    """Classify a halving-limit stop: a barrier that broke, a collapsed link, or neither."""
    if failure is not None:
        return _as_terminal(failure, t)
    margins = link_margins(positions, headings, model.assignment)
    if margins.size:
        e, col = np.unravel_index(int(np.argmin(margins)), margins.shape)
        if margins[e, col] < model.config.link_margin_threshold:
            edge = model.assignment.edges[e].edge
            return LinkBreak(t, edge, "upper" if col == 0 else "lower")
    return SubstepExhausted(t)


def step(model: ScenarioModel, state: SimState, offset: np.ndarray | None = None) -> SimState:
    """Advance ``state`` by one ``dt`` with RK4 and adaptive substeps.

    A substep halves when an agent would move more than ``margin_fraction`` of
    its smallest active barrier margin, or when any stage or the result breaks
    a barrier. After an accepted substep the size doubles again, capped by
    the time left. Virtual points are never integrated: they are recomputed
    from position and heading at every evaluation.

    Raises:
        LinkBreak, CollisionEvent: the halving limit was hit after a barrier
            broke within this dt, or with a link margin below
            ``link_margin_threshold``.
        SubstepExhausted: the halving limit was hit on the margin rule alone.
    """
    integ = model.config.integrator
    dt = model.config.dt
    h_min = dt / 2.0**integ.max_halvings
    positions, headings = state.positions, state.headings
    t, remaining, h = state.t, dt, dt
    broke: FovTopoError | None = None

    while remaining > 1e-12 * dt:
        h = min(h, remaining)
        failure: FovTopoError | None = None
        try:
            new_positions, new_headings = _rk4(model, positions, headings, t, h, offset)
            _check_state(model, new_positions, new_headings)
            margins = agent_margins(model, positions, headings)
            moved = np.linalg.norm(new_positions - positions, axis=1)
            accept = bool(np.all(moved <= integ.margin_fraction * margins))
        except _BREAKS as exc:
            failure, broke, accept = exc, exc, False

        if accept:
            positions, headings = new_positions, new_headings
            t += h
            remaining -= h
            h = 2.0 * h
            continue
        if h / 2.0 < h_min * (1.0 - 1e-9):
            raise _exhausted(model, positions, headings, t, failure or broke)
        h = h / 2.0
        logger.debug("t=%.6g: substep halved to %.3e (%s)", t, h, failure or "margin rule")

    if model.config.heading_policy.mode != "fixed":
        headings = np.asarray(wrap_angle(headings), dtype=float)
    return SimState(state.t + dt, positions, headings)


def _terminal_fields(exc: TerminalEvent) -> dict[str, Any]:
    if isinstance(exc, LinkBreak):
        return {"edge": list(exc.edge) if exc.edge else None, "barrier": exc.barrier}
    if isinstance(exc, CollisionEvent):
        return {"pair": list(exc.pair)}
    return {}


def _pairwise_min(positions: np.ndarray) -> float:
    n = len(positions)
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            best = min(best, distance(positions[i], positions[j]))
    return best


def _finite_or_none(v: float) -> float | None:
    return v if math.isfinite(v) else None


def run_scenario(config: ScenarioConfig) -> tuple[TrajectoryLog, EventLog, dict[str, Any]]:
    """Integrate ``config`` until its duration or the first terminal event.

    Measurements add seeded Gaussian noise to the logged positions; the
    controller sees them only when ``noise.control_uses_measurements`` is set.
    The summary's ``topology_maintained`` checks that the sensing graph
    contains the configured graph at every logged step and that no link broke.
    """
    model = prepare(config)
    n, dt = model.n, config.dt
    noise = config.noise
    noisy_control = noise.control_uses_measurements and noise.sigma_pos > 0.0
    rng = np.random.default_rng(noise.seed)
    log = TrajectoryLog(n, config.graph.edges, bool(model.leaders.any()), noisy_control)
    events = EventLog()
    collision = config.potentials.collision

    state = model.initial_state()
    topology_ok = True
    min_distance = math.inf
    below: set[int] = set()
    in_band: set[tuple[int, int]] = set()
    terminal: TerminalEvent | None = None
    logger.info("run %s: n=%d |E|=%d steps=%d seed=%d", config.name, n, config.graph.num_edges,
                config.steps, noise.seed)

    for k in range(config.steps + 1):
        t = k * dt
        error = rng.normal(0.0, noise.sigma_pos, size=(n, 2))
        offset = error if noisy_control else None
        positions, headings = state.positions, state.headings

        try:
            controls, _ = velocity_field(model, positions, headings, t, offset)
        except _BREAKS:
            controls, _ = velocity_field(model, positions, headings, t)
        margins = link_margins(positions, headings, model.assignment)
        log.append(t, positions, headings, controls, positions + error,
                   system_energy(positions, headings, model.assignment), margins)

        try:
            observed = sensing_graph(positions, headings, model.robots).graph
            topology_ok = topology_ok and observed.contains(config.graph)
        except DegenerateConfigurationError:
            topology_ok = False
        min_distance = min(min_distance, _pairwise_min(positions))

        for e, edge in enumerate(config.graph.edges):
            margin = float(margins[e].min())
            if margin < config.link_margin_threshold and e not in below:
                below.add(e)
                events.add(t, "link-margin-below-threshold", edge=list(edge), margin=margin)
            elif margin >= config.link_margin_threshold:
                below.discard(e)
        if collision.enabled:
            for i in range(n):
                for j in range(i + 1, n):
                    b = collision_barrier(model.robots, i, j, collision)
                    d = distance(positions[i], positions[j])
                    inside = b.is_active(d)
                    if inside and (i, j) not in in_band:
                        in_band.add((i, j))
                        events.add(t, "collision-band-entry", pair=[i, j], distance=d)
                    elif not inside and (i, j) in in_band:
                        in_band.discard((i, j))
                        events.add(t, "collision-band-exit", pair=[i, j], distance=d)

        if k == config.steps:
            break
        try:
            state = step(model, state, offset)
        except TerminalEvent as exc:
            logger.warning("run %s stopped: %s", config.name, exc)
            events.add(exc.t, exc.kind, **_terminal_fields(exc))
            terminal = exc
            break

    all_positions = np.array(log.positions)
    width, height = config.arena
    within = bool(
        np.all(all_positions[..., 0] >= 0.0) and np.all(all_positions[..., 0] <= width)
        and np.all(all_positions[..., 1] >= 0.0) and np.all(all_positions[..., 1] <= height)
    )
    all_margins = np.array(log.margins)
    summary = {
        "scenario": config.name,
        "seed": noise.seed,
        "completed": terminal is None,
        "terminal_event": terminal.kind if terminal else None,
        "final_time": log.times[-1],
        "steps": len(log) - 1,
        "topology_maintained": topology_ok and not isinstance(terminal, LinkBreak),
        "min_link_margin": float(all_margins.min()) if all_margins.size else None,
        "min_pairwise_distance": _finite_or_none(min_distance),
        "max_energy": float(max(log.energy)),
        "within_arena": within,
        "link_break_events": len(events.of_kind("link-break")),
        "collision_band_entries": len(events.of_kind("collision-band-entry")),
    }
    logger.info("run %s finished: %s", config.name, summary)
    return log, events, summary


def run_to_directory(config: ScenarioConfig, out_dir: Path) -> dict[str, Any]:
    """Run and write ``trajectory.csv``, ``events.jsonl`` and ``summary.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log, events, summary = run_scenario(config)
    write_trajectory_csv(log, out_dir / "trajectory.csv")
    write_events_jsonl(events, out_dir / "events.jsonl")
    write_summary(summary, out_dir / "summary.json")
    return summary


def _sweep_worker(config: ScenarioConfig, seed: int, out_dir: Path) -> dict[str, Any]:
    return run_to_directory(config.with_seed(seed), seed_dir(out_dir, seed))


def run_sweep(
    config: ScenarioConfig, seeds: Sequence[int], out_dir: Path, workers: int | None = None
) -> list[dict[str, Any]]:
    """Run independent seeds in parallel, each into ``out_dir/seed_<s>``."""
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_worker, config, s, Path(out_dir)) for s in seeds]
        return [f.result() for f in futures]
