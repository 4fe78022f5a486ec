"""Schedulers, runs and the semantics map."""
from __future__ import annotations

from prg_verify.scheduling.policy import (
    Run,
    SchedulerPolicy,
    build_run,
    describe_policy,
    extremal_policies,
    options,
    run_policy,
)
from prg_verify.scheduling.semantics import (
    SemanticsEvaluator,
    refines_seq,
    semantics,
    semantics_program,
    uniform_policy_distribution,
)
from prg_verify.scheduling.monte_carlo import MonteCarloOracle, MonteCarloResult

__all__ = [
    "MonteCarloOracle",
    "MonteCarloResult",
    "Run",
    "SchedulerPolicy",
    "SemanticsEvaluator",
    "build_run",
    "describe_policy",
    "extremal_policies",
    "options",
    "refines_seq",
    "run_policy",
    "semantics",
    "semantics_program",
    "uniform_policy_distribution",
]
