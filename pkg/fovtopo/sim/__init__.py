from .engine import (
    ScenarioModel,
    SimState,
    agent_margins,
    link_margins,
    prepare,
    run_scenario,
    run_sweep,
    run_to_directory,
    step,
    velocity_field,
)
from .logs import (
    CSV_HEADER,
    EnergyTrace,
    EventLog,
    TrajectoryLog,
    energy_trace,
    write_events_jsonl,
    write_summary,
    write_trajectory_csv,
)
from .profiles import leader_velocity

__all__ = [
    "CSV_HEADER",
    "EnergyTrace",
    "EventLog",
    "ScenarioModel",
    "SimState",
    "TrajectoryLog",
    "agent_margins",
    "energy_trace",
    "leader_velocity",
    "link_margins",
    "prepare",
    "run_scenario",
    "run_sweep",
    "run_to_directory",
    "step",
    "velocity_field",
    "write_events_jsonl",
    "write_summary",
    "write_trajectory_csv",
]
