"""Event structures: construction, traces and validation."""
from __future__ import annotations

from prg_verify.events.builders import (
    EventSupply,
    atomic,
    choice,
    fresh_copy,
    par,
    par_all,
    rename,
    seq,
    seq_all,
    star_unfold,
    unit,
    zero,
)
from prg_verify.events.traces import (
    FeasibilityGap,
    configurations,
    equal_up_to_renaming,
    feasibility_gap,
    is_feasible,
    is_maximal,
    maximal_traces,
    restrict,
    traces,
)
from prg_verify.events.validation import ValidationReport, Violation, ViolationKind, validate

__all__ = [
    "EventSupply",
    "FeasibilityGap",
    "ValidationReport",
    "Violation",
    "ViolationKind",
    "atomic",
    "choice",
    "configurations",
    "equal_up_to_renaming",
    "feasibility_gap",
    "fresh_copy",
    "is_feasible",
    "is_maximal",
    "maximal_traces",
    "par",
    "par_all",
    "rename",
    "restrict",
    "seq",
    "seq_all",
    "star_unfold",
    "traces",
    "unit",
    "validate",
    "zero",
]
