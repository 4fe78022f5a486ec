"""Error hierarchy with module-qualified codes."""
from __future__ import annotations

from typing import Any


class PrgError(ValueError):
    """Base class for every toolkit error.

    ``code`` names the owning module and the failure, e.g. ``ipbes.explosion``.
    The CLI prints it and exits with status 2.
    """

    code = "prg.error"


# core-prob


class StateSpaceError(PrgError):
    code = "core-prob.state-space"


class DomainError(PrgError):
    code = "core-prob.domain"


class EmptySetError(PrgError):
    code = "core-prob.empty-set"


class DimensionError(PrgError):
    code = "core-prob.dimension"


# seq-semantics


class ProgramKindError(PrgError):
    code = "seq-semantics.kind"


class CompositionError(PrgError):
    code = "seq-semantics.composition-undefined"


class FeasibilityError(PrgError):
    code = "seq-semantics.feasibility"


class NonTerminationError(PrgError):
    """Kleene iteration did not stabilize within the allowed bound."""

    code = "seq-semantics.non-termination"

    def __init__(self, message: str, last_iterate: Any = None):
        super().__init__(message)
        self.last_iterate = last_iterate


# ipbes


class StructureError(PrgError):
    code = "ipbes.structure"


class TraceExplosionError(PrgError):
    """An enumeration exceeded its cap."""

    code = "ipbes.explosion"

    def __init__(self, message: str, partial_count: int = 0):
        super().__init__(message)
        self.partial_count = partial_count


# scheduler-semantics


class PolicyError(PrgError):
    code = "scheduler-semantics.policy"


class TerminationError(PrgError):
    code = "scheduler-semantics.termination"


class SamplingError(PrgError):
    code = "scheduler-semantics.sampling"


# rg-engine


class RuleApplicabilityError(PrgError):
    code = "rg-engine.rule-applicability"


class SideConditionError(PrgError):
    code = "rg-engine.side-condition"


class PremiseError(PrgError):
    code = "rg-engine.premise"


class GuaranteeError(PrgError):
    code = "rg-engine.zero-guarantee"


class InfeasibleRelyError(PrgError):
    code = "rg-engine.infeasible-rely"


class CrossCheckError(PrgError):
    code = "rg-engine.cross-check"


# dsl-cli


class ParseError(PrgError):
    """Syntax or name-resolution error with a source position."""

    code = "dsl-cli.syntax"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        location = f"{line}:{column}: " if line else ""
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column


class AtomicityError(PrgError):
    code = "dsl-cli.atomicity"


class ElaborationError(PrgError):
    code = "dsl-cli.elaboration"


class JobError(PrgError):
    code = "dsl-cli.job"
