from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..errors import ConstraintViolation


@dataclass(frozen=True)
class BarrierPotential:
    """One-sided barrier on a distance ``d``.

    ``upper`` keeps ``d < limit`` and is active on ``(d_act, limit)``;
    ``lower`` keeps ``d > limit`` and is active on ``(limit, d_act)``. Both are
    zero, with zero slope, outside the band and diverge at the limit.
    """

    kind: Literal["upper", "lower"]
    limit: float
    d_act: float
    gain: float = 1.0
    edge: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.gain <= 0.0:
            raise ValueError(f"barrier gain must be positive, got {self.gain}")
        if self.kind == "upper" and not self.d_act < self.limit:
            raise ValueError(f"upper barrier needs d_act < limit ({self.d_act} >= {self.limit})")
        if self.kind == "lower" and not self.d_act > self.limit:
            raise ValueError(f"lower barrier needs d_act > limit ({self.d_act} <= {self.limit})")
        if self.kind not in ("upper", "lower"):
            raise ValueError(f"unknown barrier kind {self.kind!r}")

    def is_active(self, d: float) -> bool:
        if self.kind == "upper":
            return d > self.d_act
        return d < self.d_act

    def margin(self, d: float) -> float:
        """Distance to the limit; positive on the allowed side."""
        return self.limit - d if self.kind == "upper" else d - self.limit


def barrier_value_and_gradient(b: BarrierPotential, d: float) -> tuple[float, float]:
    """Return ``(V(d), dV/dd)``.

    upper: ``V = g (d - a)^2 / (rho - d)``; lower: ``V = g (a - d)^2 / (d - rho)``.

    Raises:
        ConstraintViolation: if ``d`` is at or past the limit.
    """
    if b.kind == "upper":
        if not d < b.limit:
            raise ConstraintViolation(b.edge, b.kind, d, b.limit)
        if d <= b.d_act:
            return 0.0, 0.0
        x, y = d - b.d_act, b.limit - d
        return b.gain * x * x / y, b.gain * (2.0 * x * y + x * x) / (y * y)
    if not d > b.limit:
        raise ConstraintViolation(b.edge, b.kind, d, b.limit)
    if d >= b.d_act:
        return 0.0, 0.0
    x, y = b.d_act - d, d - b.limit
    return b.gain * x * x / y, -b.gain * (2.0 * x * y + x * x) / (y * y)


def clamp_speed(u: np.ndarray, v_max: float) -> np.ndarray:
    """Scale rows of ``u`` down to norm ``v_max``; slower rows pass unchanged."""
    u = np.array(u, dtype=float)
    if u.ndim == 1:
        norm = float(np.linalg.norm(u))
        return u * (v_max / norm) if norm > v_max else u
    norms = np.linalg.norm(u, axis=1)
    too_fast = norms > v_max
    u[too_fast] *= (v_max / norms[too_fast])[:, None]
    return u


def distance(a: np.ndarray, b: np.ndarray) -> float:
    return math.hypot(float(a[0] - b[0]), float(a[1] - b[1]))
