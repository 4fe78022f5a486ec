"""Domain models: state spaces, distributions, convex sets, programs, event structures."""
from __future__ import annotations

from prg_verify.models.state_space import StateSpace
from prg_verify.models.distribution import Distribution, SubDistribution
from prg_verify.models.convex import ConvexSet, Halfspace, SetForm
from prg_verify.models.program import ConvexProgram, ProgramKind
from prg_verify.models.reports import LawCheck, LawReport
from prg_verify.models.event_structure import (
    Bundle,
    Configuration,
    Event,
    IpBes,
    Shape,
    ShapeKind,
    Trace,
)

__all__ = [
    "StateSpace",
    "Distribution",
    "SubDistribution",
    "ConvexSet",
    "Halfspace",
    "SetForm",
    "ConvexProgram",
    "ProgramKind",
    "LawCheck",
    "LawReport",
    "Bundle",
    "Configuration",
    "Event",
    "IpBes",
    "Shape",
    "ShapeKind",
    "Trace",
]
