"""Joint scheduling and power control for vehicular broadcast under adjacent-channel interference.

Library layout:

- :mod:`v2vsched.scenario` — convoy geometry, channel gains, ACIR masks
- :mod:`v2vsched.linkmodel` — the physical SINR/link-success oracle and metrics
- :mod:`v2vsched.milp` — generic mixed-boolean LP model, simplex, branch and bound
- :mod:`v2vsched.formulations` — optimization models for every problem variant
- :mod:`v2vsched.colgen` — column-generation approximation over timeslots
- :mod:`v2vsched.cutplane` — sensitivity-removing cutting-plane scheduler
- :mod:`v2vsched.experiments` — Monte-Carlo sweeps, fairness tables, greedy baseline
- :mod:`v2vsched.cli` — command-line driver
"""

from .scenario import (
    AcirProfile,
    RadioParams,
    Scenario,
    acir_lookup,
    build_scenario,
    channel_gain,
    generate_positions,
    scenario_from_positions,
)
from .linkmodel import LinkOutcome, PowerAllocation, Schedule, evaluate, metrics, sinr

__version__ = "0.1.0"

__all__ = [
    "AcirProfile",
    "LinkOutcome",
    "PowerAllocation",
    "RadioParams",
    "Scenario",
    "Schedule",
    "acir_lookup",
    "build_scenario",
    "channel_gain",
    "evaluate",
    "generate_positions",
    "metrics",
    "scenario_from_positions",
    "sinr",
    "__version__",
]
