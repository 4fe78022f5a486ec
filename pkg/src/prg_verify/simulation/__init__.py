"""t-simulation search, checking and law suites."""
from __future__ import annotations

from prg_verify.simulation.search import (
    SimulationCheck,
    SimulationResult,
    TSimulation,
    check_t_simulation,
    compose_simulations,
    find_t_simulation,
    is_weakly_maximal,
    simulation_equivalent,
)
from prg_verify.simulation.laws import check_law_suite, check_rely_laws, rely_star

__all__ = [
    "SimulationCheck",
    "SimulationResult",
    "TSimulation",
    "check_law_suite",
    "check_rely_laws",
    "check_t_simulation",
    "compose_simulations",
    "find_t_simulation",
    "is_weakly_maximal",
    "rely_star",
    "simulation_equivalent",
]
