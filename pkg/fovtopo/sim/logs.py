from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

CSV_HEADER = "t,agent,x,y,heading,ux,uy,meas_x,meas_y,energy"
_CSV_FMT = ["%.17g", "%d"] + ["%.17g"] * 8

TERMINAL_KINDS = ("link-break", "collision", "integration-substep-exhaustion")


@dataclass
class TrajectoryLog:
    """Snapshots at ``t = k * dt``; arrays grow along the first axis."""

    n: int
    edges: tuple[tuple[int, int], ...]
    has_leader: bool = False
    noisy_control: bool = False
    times: list[float] = field(default_factory=list)
    positions: list[np.ndarray] = field(default_factory=list)
    headings: list[np.ndarray] = field(default_factory=list)
    controls: list[np.ndarray] = field(default_factory=list)
    measurements: list[np.ndarray] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    margins: list[np.ndarray] = field(default_factory=list)  # (E, 2): upper, lower

    def append(
        self,
        t: float,
        positions: np.ndarray,
        headings: np.ndarray,
        controls: np.ndarray,
        measurements: np.ndarray,
        energy: float,
        margins: np.ndarray,
    ) -> None:
        self.times.append(float(t))
        self.positions.append(np.array(positions, dtype=float))
        self.headings.append(np.array(headings, dtype=float))
        self.controls.append(np.array(controls, dtype=float))
        self.measurements.append(np.array(measurements, dtype=float))
        self.energy.append(float(energy))
        self.margins.append(np.array(margins, dtype=float).reshape(len(self.edges), 2))

    def __len__(self) -> int:
        return len(self.times)

    def rows(self) -> np.ndarray:
        """One row per (snapshot, agent) in CSV column order."""
        out = np.empty((len(self) * self.n, 10))
        for k, t in enumerate(self.times):
            block = out[k * self.n : (k + 1) * self.n]
            block[:, 0] = t
            block[:, 1] = np.arange(self.n)
            block[:, 2:4] = self.positions[k]
            block[:, 4] = self.headings[k]
            block[:, 5:7] = self.controls[k]
            block[:, 7:9] = self.measurements[k]
            block[:, 9] = self.energy[k]
        return out


@dataclass
class EventLog:
    events: list[dict[str, Any]] = field(default_factory=list)

    def add(self, t: float, kind: str, **fields: Any) -> dict[str, Any]:
        if self.events and t < self.events[-1]["t"]:
            raise ValueError("events must be appended in time order")
        event = {"t": float(t), "kind": kind, **fields}
        self.events.append(event)
        return event

    def of_kind(self, kind: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e["kind"] == kind]

    @property
    def terminal(self) -> dict[str, Any] | None:
        for e in self.events:
            if e["kind"] in TERMINAL_KINDS:
                return e
        return None


@dataclass(frozen=True)
class EnergyTrace:
    times: np.ndarray
    energy: np.ndarray
    max_energy: float
    finite: bool
    max_increment: float | None  # only for leaderless runs with noise-free control

    @property
    def monotone(self) -> bool | None:
        if self.max_increment is None:
            return None
        return self.max_increment <= 1e-9


def energy_trace(log: TrajectoryLog) -> EnergyTrace:
    energy = np.asarray(log.energy, dtype=float)
    finite = bool(np.all(np.isfinite(energy)))
    max_energy = float(np.max(energy)) if energy.size else 0.0
    increment = None
    if not log.has_leader and not log.noisy_control:
        steps = np.diff(energy)
        increment = float(max(0.0, steps.max())) if steps.size else 0.0
    return EnergyTrace(np.asarray(log.times), energy, max_energy, finite, increment)


def write_trajectory_csv(log: TrajectoryLog, path: Path) -> None:
    np.savetxt(path, log.rows(), fmt=_CSV_FMT, delimiter=",", header=CSV_HEADER, comments="")


def write_events_jsonl(events: EventLog, path: Path) -> None:
    with Path(path).open("w") as fh:
        for event in events.events:
            fh.write(json.dumps(event) + "\n")


def write_summary(summary: dict[str, Any], path: Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2) + "\n")
