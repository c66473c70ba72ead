from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import DegenerateConfigurationError
from ..graph import DirectedGraph
from .sector import FovApproximation, FovSector, approx_contains, default_approximation, wrap_angle

# Agents closer than this have no defined bearing
COINCIDENT_DISTANCE = 1e-9


class RobotSpec(BaseModel):
    """Sensing hardware of one robot: mounted sectors plus communication/collision radii.

    ``sectors`` accepts JSON objects ``{"heading", "central_angle", "range", "approx"?}``;
    a missing ``approx`` is filled with :func:`default_approximation`.
    """

    model_config = ConfigDict(frozen=True)

    sectors: tuple[tuple[FovSector, FovApproximation], ...] = Field(min_length=1)
    comm_radius: float = Field(default=20.0, gt=0.0)
    collision_radius: float | None = Field(default=None, ge=0.0)

    @field_validator("sectors", mode="before")
    @classmethod
    def _expand_sectors(cls, value: Any) -> Any:
        if not isinstance(value, (list, tuple)):
            return value
        pairs = []
        for item in value:
            if isinstance(item, FovSector):
                pairs.append((item, default_approximation(item)))
            elif isinstance(item, dict):
                fields = {k: v for k, v in item.items() if k != "approx"}
                sector = FovSector.model_validate(fields)
                approx = item.get("approx")
                if approx is None:
                    approx = default_approximation(sector)
                pairs.append((sector, approx))
            else:
                pairs.append(item)
        return pairs

    @model_validator(mode="after")
    def _check(self) -> "RobotSpec":
        headings = [s.heading for s, _ in self.sectors]
        if len(set(headings)) != len(headings):
            raise ValueError("sector headings must be distinct")
        for s, a in self.sectors:
            if a.rho1 > s.range:
                raise ValueError(f"rho1={a.rho1} exceeds sector range {s.range}")
        return self

    @classmethod
    def single(cls, sector: FovSector, **kwargs: Any) -> "RobotSpec":
        return cls(sectors=((sector, default_approximation(sector)),), **kwargs)


@dataclass(frozen=True)
class SensingGraph:
    """Directed sensing graph with the sector index each edge was assigned."""

    graph: DirectedGraph
    sectors: tuple[int, ...]

    def sector_of(self, tail: int, head: int) -> int:
        return self.sectors[self.graph.edge_index(tail, head)]


def bearing_deviation(x_robot: np.ndarray, theta: float, s: FovSector, x_j: np.ndarray) -> float:
    d = np.asarray(x_j, dtype=float) - np.asarray(x_robot, dtype=float)
    return abs(float(wrap_angle(math.atan2(d[1], d[0]) - (theta + s.heading))))


def select_sector(
    x_robot: np.ndarray, theta: float, robot: RobotSpec, x_j: np.ndarray
) -> int | None:
    """Index of the approximated sector that best sees ``x_j``, or ``None``.

    Among containing sectors the smallest boresight deviation wins; ties go to
    the lowest index.
    """
    best: int | None = None
    best_dev = math.inf
    for k, (sector, approx) in enumerate(robot.sectors):
        if not approx_contains(x_j, x_robot, theta, approx):
            continue
        dev = bearing_deviation(x_robot, theta, sector, x_j)
        if dev < best_dev:
            best, best_dev = k, dev
    return best


def check_separation(positions: np.ndarray, minimum: float = COINCIDENT_DISTANCE) -> None:
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    for i in range(n):
        for j in range(i + 1, n):
            d = float(np.linalg.norm(positions[i] - positions[j]))
            if d < minimum:
                raise DegenerateConfigurationError((i, j), d)


def sensing_graph(
    positions: np.ndarray, headings: Sequence[float], robots: Sequence[RobotSpec]
) -> SensingGraph:
    """Build the FOV sensing graph: edge ``i -> j`` iff ``j`` lies in some approximated sector of ``i``.

    Edges are ordered lexicographically by ``(i, j)``.
    """
    positions = np.asarray(positions, dtype=float)
    if not (len(positions) == len(headings) == len(robots)):
        raise ValueError("positions, headings and robots must have the same length")
    check_separation(positions)
    edges: list[tuple[int, int]] = []
    sectors: list[int] = []
    n = len(positions)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            k = select_sector(positions[i], headings[i], robots[i], positions[j])
            if k is not None:
                edges.append((i, j))
                sectors.append(k)
    return SensingGraph(DirectedGraph(n=n, edges=tuple(edges)), tuple(sectors))
