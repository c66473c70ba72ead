from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .fov import RobotSpec
from .graph import DirectedGraph


class CollisionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    r_col: float = Field(default=0.5, ge=0.0)
    delta_act: float = Field(default=1.0, gt=0.0)  # band width above r_col
    enabled: bool = True


class ControlConfig(BaseModel):
    """Barrier gains, activation bands and the speed clamp."""

    model_config = ConfigDict(frozen=True)

    gain: float = Field(default=1.0, gt=0.0)
    upper_act_frac: float = Field(default=0.8, gt=0.0, lt=1.0)  # upper d_act = frac * rho1
    lower_act_frac: float = Field(default=0.2, gt=0.0)  # lower d_act = rho2 + frac * rho1
    v_max: float = Field(default=2.0, gt=0.0)
    collision: CollisionConfig = Field(default_factory=CollisionConfig)


class LeaderProfileConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    # Validated at use so that an unknown name surfaces as ConfigError
    name: str = "cosine"
    v_fwd: float = 0.3  # m/s along the leader's initial heading
    amplitude: float = 0.2  # m/s, lateral
    period: float = Field(default=20.0, gt=0.0)  # s
    velocity: tuple[float, float] = (0.0, 0.0)  # "constant" profile, world frame


class NoiseConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma_pos: float = Field(default=0.1, ge=0.0)
    seed: int = 0
    control_uses_measurements: bool = False


class IntegratorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    margin_fraction: float = Field(default=0.1, gt=0.0, le=1.0)
    max_halvings: int = Field(default=12, ge=0)


class HeadingPolicyConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["fixed", "face-target"] = "fixed"
    time_constant: float = Field(default=1.0, gt=0.0)  # s, face-target lag


class AgentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    position: tuple[float, float]
    heading: float = 0.0
    robot: RobotSpec
    role: Literal["follower", "leader"] = "follower"


class ScenarioConfig(BaseModel):
    """A full simulation run. ``graph`` is the preselected topology to maintain.

    ``assignment`` gives the sector index used on each edge (graph order); when
    omitted it is taken from the sensing graph at t = 0.
    """

    model_config = ConfigDict(frozen=True)

    name: str = "scenario"
    d: Literal[2] = 2
    agents: tuple[AgentConfig, ...] = Field(min_length=1)
    graph: DirectedGraph
    assignment: tuple[int, ...] | None = None
    potentials: ControlConfig = Field(default_factory=ControlConfig)
    leader_profile: LeaderProfileConfig = Field(default_factory=LeaderProfileConfig)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    heading_policy: HeadingPolicyConfig = Field(default_factory=HeadingPolicyConfig)
    dt: float = Field(default=0.05, gt=0.0)
    duration: float = Field(default=120.0, ge=0.0)
    arena: tuple[float, float] = (30.0, 20.0)  # logging only
    link_margin_threshold: float = Field(default=0.1, ge=0.0)

    @model_validator(mode="after")
    def _check(self) -> "ScenarioConfig":
        if self.graph.n != len(self.agents):
            raise ValueError(f"graph has {self.graph.n} vertices but {len(self.agents)} agents")
        if self.assignment is not None:
            if len(self.assignment) != self.graph.num_edges:
                raise ValueError("assignment needs one sector index per edge")
            for (tail, _), k in zip(self.graph.edges, self.assignment):
                if not 0 <= k < len(self.agents[tail].robot.sectors):
                    raise ValueError(f"agent {tail} has no sector {k}")
        for a in self.agents:
            if not all(math.isfinite(v) for v in (*a.position, a.heading)):
                raise ValueError("agent positions and headings must be finite")
        return self

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return self.model_copy(update={"noise": self.noise.model_copy(update={"seed": seed})})


def _read_json(path: Path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"No such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Malformed JSON in {path}: {exc}") from exc


def load_graph(path: Path) -> DirectedGraph:
    data = _read_json(path)
    try:
        return DirectedGraph.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid graph file {path}: {exc}") from exc


def load_scenario(path: Path) -> ScenarioConfig:
    data = _read_json(path)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid scenario file {path}: {exc}") from exc
