from __future__ import annotations

import math
from functools import lru_cache
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import UnsupportedGeometryError

# Virtual point order: left, rear, right
VIRTUAL_POINTS = ("left", "rear", "right")


def wrap_angle(a: float | np.ndarray) -> float | np.ndarray:
    """Wrap an angle into [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


class FovSector(BaseModel):
    """Circular sensing sector mounted on a robot.

    ``heading`` is the mounting angle relative to the robot's body heading, so
    the boresight in the world frame is ``theta + heading``.
    """

    model_config = ConfigDict(frozen=True)

    heading: float = 0.0
    central_angle: float = Field(default=math.pi / 2, gt=0.0)
    range: float = Field(default=10.0, gt=0.0)

    @field_validator("heading")
    @classmethod
    def _normalize_heading(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("heading must be finite")
        if -math.pi < v <= math.pi:
            return v
        w = float(wrap_angle(v))
        # (-pi, pi]
        return math.pi if w == -math.pi else w

    @field_validator("range")
    @classmethod
    def _finite_range(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("range must be finite")
        return v

    @model_validator(mode="after")
    def _convex_enough(self) -> "FovSector":
        if self.central_angle >= math.pi:
            raise UnsupportedGeometryError(
                f"central angle {self.central_angle:.6g} rad must be below pi"
            )
        return self


class FovApproximation(BaseModel):
    """Disk-intersection approximation of a sector.

    A point is inside when it is within ``rho1`` of the robot and at least the
    exclusion radius away from each of the three virtual points. Each offset
    ``(phi, tx, ty)`` places a virtual point at ``R(phi) @ (tx, ty)`` in the body
    frame. ``rho2_overrides`` gives per-point exclusion radii when set.
    """

    model_config = ConfigDict(frozen=True)

    rho1: float = Field(gt=0.0)
    rho2: float = Field(gt=0.0)
    offsets: tuple[
        tuple[float, float, float], tuple[float, float, float], tuple[float, float, float]
    ]
    rho2_overrides: tuple[float, float, float] | None = None

    @model_validator(mode="after")
    def _check(self) -> "FovApproximation":
        for phi, tx, ty in self.offsets:
            if not all(math.isfinite(v) for v in (phi, tx, ty)):
                raise ValueError("offsets must be finite")
            if math.hypot(tx, ty) <= 0.0:
                raise ValueError("virtual points must sit away from the robot origin")
        if self.rho2_overrides is not None and min(self.rho2_overrides) <= 0.0:
            raise ValueError("exclusion radii must be positive")
        return self

    def body_offsets(self) -> np.ndarray:
        """(3, 2) virtual-point positions in the body frame (read-only)."""
        return _body_offsets(self.offsets)

    def exclusion_radii(self) -> np.ndarray:
        if self.rho2_overrides is not None:
            return np.array(self.rho2_overrides, dtype=float)
        return np.full(3, self.rho2)

    def to_json_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "rho1": self.rho1,
            "rho2": self.rho2,
            "offsets": [list(o) for o in self.offsets],
        }
        if self.rho2_overrides is not None:
            data["rho2_overrides"] = list(self.rho2_overrides)
        return data


@lru_cache(maxsize=1024)
def _body_offsets(offsets: tuple[tuple[float, float, float], ...]) -> np.ndarray:
    out = np.array([rotation_matrix(phi) @ np.array([tx, ty]) for phi, tx, ty in offsets])
    out.flags.writeable = False
    return out


def place_virtual_points(x: np.ndarray, theta: float, approx: FovApproximation) -> np.ndarray:
    """World positions (3, 2) of the virtual points of a robot at ``x`` with heading ``theta``."""
    x = np.asarray(x, dtype=float)
    return x + approx.body_offsets() @ rotation_matrix(theta).T


def sector_contains(
    x_query: np.ndarray, x_robot: np.ndarray, theta: float, s: FovSector
) -> bool:
    d = np.asarray(x_query, dtype=float) - np.asarray(x_robot, dtype=float)
    r = math.hypot(d[0], d[1])
    if r == 0.0:
        return True
    if r > s.range:
        return False
    deviation = wrap_angle(math.atan2(d[1], d[0]) - (theta + s.heading))
    return abs(deviation) <= 0.5 * s.central_angle


def approx_contains(
    x_query: np.ndarray, x_robot: np.ndarray, theta: float, approx: FovApproximation
) -> bool:
    x_query = np.asarray(x_query, dtype=float)
    if np.linalg.norm(x_query - np.asarray(x_robot, dtype=float)) > approx.rho1:
        return False
    points = place_virtual_points(x_robot, theta, approx)
    dist = np.linalg.norm(points - x_query, axis=1)
    return bool(np.all(dist >= approx.exclusion_radii()))


def sector_mask(points: np.ndarray, s: FovSector) -> np.ndarray:
    """Vectorized :func:`sector_contains` for a robot at the origin with heading 0."""
    r = np.hypot(points[:, 0], points[:, 1])
    deviation = np.abs(wrap_angle(np.arctan2(points[:, 1], points[:, 0]) - s.heading))
    return (r == 0.0) | ((r <= s.range) & (deviation <= 0.5 * s.central_angle))


def approx_mask(points: np.ndarray, approx: FovApproximation) -> np.ndarray:
    """Vectorized :func:`approx_contains` for a robot at the origin with heading 0."""
    inside = np.hypot(points[:, 0], points[:, 1]) <= approx.rho1
    for center, radius in zip(approx.body_offsets(), approx.exclusion_radii()):
        inside &= np.hypot(points[:, 0] - center[0], points[:, 1] - center[1]) >= radius
    return inside


def default_approximation(
    s: FovSector, rho2_overrides: tuple[float, float, float] | None = None
) -> FovApproximation:
    """Default placement: three exclusion disks of radius ``rho_s`` through the apex.

    The rear disk sits straight behind; the lateral disks sit at
    ``+-(pi/2 + beta/2)`` from the boresight so that each is tangent to one
    bounding ray at the apex.
    """
    if s.central_angle >= math.pi:
        raise UnsupportedGeometryError(f"central angle {s.central_angle:.6g} rad must be below pi")
    rho = s.range
    lateral = 0.5 * math.pi + 0.5 * s.central_angle
    return FovApproximation(
        rho1=rho,
        rho2=rho,
        offsets=(
            (s.heading + lateral, rho, 0.0),
            (s.heading + math.pi, rho, 0.0),
            (s.heading - lateral, rho, 0.0),
        ),
        rho2_overrides=rho2_overrides,
    )
