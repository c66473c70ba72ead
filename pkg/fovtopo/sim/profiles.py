from __future__ import annotations

import math

import numpy as np

from ..config import LeaderProfileConfig
from ..errors import ConfigError
from ..fov import rotation_matrix


def leader_velocity(profile: LeaderProfileConfig, t: float, heading: float = 0.0) -> np.ndarray:
    """Prescribed leader velocity at time ``t``.

    ``cosine`` is ``(v_fwd, A cos(2 pi t / period))`` in the frame of the
    leader's initial heading; ``constant`` is ``profile.velocity`` in the world
    frame; ``zero`` stands still.
    """
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t}")
    if profile.name == "cosine":
        omega = 2.0 * math.pi / profile.period
        local = np.array([profile.v_fwd, profile.amplitude * math.cos(omega * t)])
        return rotation_matrix(heading) @ local
    elif profile.name == "constant":
        return np.array(profile.velocity, dtype=float)
    elif profile.name == "zero":
        return np.zeros(2)
    else:
        raise ConfigError(f"Unknown leader profile: {profile.name}")
