"""Well-formedness checks for event structures."""
from __future__ import annotations

import logging
from enum import Enum
from itertools import combinations

from pydantic import BaseModel, Field

from prg_verify.models.event_structure import IpBes

logger = logging.getLogger(__name__)


class ViolationKind(str, Enum):
    """Which well-formedness clause failed."""

    REFLEXIVE_CONFLICT = "reflexive_conflict"
    ASYMMETRIC_CONFLICT = "asymmetric_conflict"
    BUNDLE_NOT_CONFLICTING = "bundle_not_conflicting"
    FINAL_NOT_CONFLICTING = "final_not_conflicting"
    LABEL_SPACE_MISMATCH = "label_space_mismatch"
    UNKNOWN_EVENT = "unknown_event"
    CYCLIC_BUNDLES = "cyclic_bundles"


class Violation(BaseModel):
    """One failed clause with the events involved."""

    kind: ViolationKind
    events: list[int] = Field(default_factory=list)
    message: str = ""


class ValidationReport(BaseModel):
    """Outcome of ``validate``."""

    events: int = 0
    violations: list[Violation] = Field(default_factory=list)

    @property
    def valid(self) -> bool:
        """True when no clause failed."""
        return not self.violations

    def add(self, kind: ViolationKind, events: list[int], message: str) -> None:
        self.violations.append(Violation(kind=kind, events=sorted(events), message=message))


def validate(es: IpBes) -> ValidationReport:
    """
    Check conflict irreflexivity and symmetry, pairwise conflict inside
    bundle sources and final sets, a shared state space, references to
    known events only, and an acyclic bundle graph.
    """
    report = ValidationReport(events=len(es.events))
    known = set(es.events)

    referenced = {e for pair in es.conflict for e in pair}
    referenced |= {e for bundle in es.bundles for e in bundle.sources | {bundle.target}}
    referenced |= {e for xs in es.finals for e in xs}
    unknown = referenced - known
    if unknown:
        report.add(ViolationKind.UNKNOWN_EVENT, list(unknown), "Events referenced but not declared")
    if set(es.labels) != known:
        missing = known ^ set(es.labels)
        report.add(
            ViolationKind.UNKNOWN_EVENT,
            list(missing),
            "Events without a label (or labels without an event)",
        )

    for a, b in sorted(es.conflict):
        if a == b:
            report.add(ViolationKind.REFLEXIVE_CONFLICT, [a], f"Event {a} conflicts with itself")
        elif (b, a) not in es.conflict:
            report.add(ViolationKind.ASYMMETRIC_CONFLICT, [a, b], f"{a} # {b} without {b} # {a}")

    for bundle in sorted(es.bundles, key=lambda x: (x.target, sorted(x.sources))):
        for x, y in combinations(sorted(bundle.sources), 2):
            if (x, y) not in es.conflict:
                report.add(
                    ViolationKind.BUNDLE_NOT_CONFLICTING,
                    [x, y, bundle.target],
                    f"Bundle source of {bundle.target} has concurrent members {x} and {y}",
                )

    for final in sorted(es.finals, key=sorted):
        for x, y in combinations(sorted(final), 2):
            if (x, y) not in es.conflict:
                report.add(
                    ViolationKind.FINAL_NOT_CONFLICTING,
                    [x, y],
                    f"Final set {sorted(final)} has concurrent members {x} and {y}",
                )

    for event, label in sorted(es.labels.items()):
        if label.space != es.space:
            message = f"Label of {event} lives over another Ω"
            report.add(ViolationKind.LABEL_SPACE_MISMATCH, [event], message)

    cycle = _bundle_cycle(es)
    if cycle:
        report.add(ViolationKind.CYCLIC_BUNDLES, cycle, "Bundle graph has a cycle")

    if not report.valid:
        logger.warning(f"{es!r} failed validation with {len(report.violations)} violations")
    return report


def _bundle_cycle(es: IpBes) -> list[int]:
    """Events on some cycle of the source → target graph, or []."""
    successors: dict[int, set[int]] = {}
    for bundle in es.bundles:
        for source in bundle.sources:
            successors.setdefault(source, set()).add(bundle.target)

    state: dict[int, int] = {}
    stack: list[int] = []

    def visit(node: int) -> list[int]:
        state[node] = 1
        stack.append(node)
        for nxt in sorted(successors.get(node, ())):
            if state.get(nxt) == 1:
                return stack[stack.index(nxt) :]
            if nxt not in state:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        state[node] = 2
        return []

    for node in sorted(successors):
        if node not in state:
            found = visit(node)
            if found:
                return found
    return []
