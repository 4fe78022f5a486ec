"""Trace enumeration, feasibility and structure comparison."""
from __future__ import annotations

import logging
from collections import deque
from typing import Iterable, NamedTuple

from prg_verify.config import settings
from prg_verify.errors import TraceExplosionError
from prg_verify.models.event_structure import Bundle, Configuration, Event, IpBes, Trace

logger = logging.getLogger(__name__)


class FeasibilityGap(NamedTuple):
    """A reachable non-maximal configuration whose enabled labels miss some states."""

    configuration: Configuration
    missing: tuple[int, ...]


def traces(es: IpBes, cap: int | None = None) -> list[Trace]:
    """
    All finite traces in canonical order (depth-first, ascending event id).

    Raises:
        TraceExplosionError: more than ``cap`` traces
    """
    limit = cap or settings.cap
    found: list[Trace] = []

    def visit(trace: Trace, configuration: Configuration) -> None:
        if len(found) >= limit:
            raise TraceExplosionError(
                f"Trace enumeration exceeded cap {limit}", partial_count=len(found)
            )
        found.append(trace)
        for event in es.enabled(configuration):
            visit(trace + (event,), configuration | {event})

    visit((), frozenset())
    logger.debug(f"Enumerated {len(found)} traces of {es!r}")
    return found


def is_maximal(es: IpBes, trace: Trace) -> bool:
    return not es.enabled(frozenset(trace))


def maximal_traces(es: IpBes, cap: int | None = None) -> list[Trace]:
    """Traces with no enabled extension, in canonical order."""
    return [t for t in traces(es, cap) if is_maximal(es, t)]


def configurations(es: IpBes, cap: int | None = None) -> list[Configuration]:
    """Event sets of all traces, breadth-first."""
    limit = cap or settings.cap
    start: Configuration = frozenset()
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        configuration = queue.popleft()
        for event in es.enabled(configuration):
            extended = configuration | {event}
            if extended not in seen:
                if len(seen) >= limit:
                    raise TraceExplosionError(
                        f"Configuration enumeration exceeded cap {limit}", partial_count=len(seen)
                    )
                seen.add(extended)
                order.append(extended)
                queue.append(extended)
    return order


def feasibility_gap(es: IpBes) -> FeasibilityGap | None:
    """
    First non-maximal configuration at which no enabled label is defined for
    some state, or None when ``es`` is feasible.

    The enabled events after a trace depend only on its event set, so the
    check runs over configurations instead of traces.
    """
    everything = set(es.space.indices())
    for configuration in configurations(es):
        enabled = es.enabled(configuration)
        if not enabled:
            continue
        covered: set[int] = set()
        for event in enabled:
            label = es.labels[event]
            if label.is_total:
                covered = everything
                break
            covered |= label.domain()
            if len(covered) == len(everything):
                break
        if len(covered) != len(everything):
            return FeasibilityGap(configuration, tuple(sorted(everything - covered)))
    return None


def is_feasible(es: IpBes) -> bool:
    return feasibility_gap(es) is None


def restrict(trace: Trace, events: Iterable[Event]) -> Trace:
    """α|_E: the subsequence of ``trace`` made of ``events``."""
    keep = set(events)
    return tuple(e for e in trace if e in keep)


def equal_up_to_renaming(a: IpBes, b: IpBes) -> dict[Event, Event] | None:
    """
    An isomorphism a → b preserving labels, conflicts, bundles and final
    sets, or None when there is none.
    """
    if len(a.events) != len(b.events) or len(a.bundles) != len(b.bundles):
        return None
    if len(a.conflict) != len(b.conflict) or len(a.finals) != len(b.finals):
        return None

    def signature(es: IpBes, e: Event) -> tuple[int, int, int, bool]:
        outgoing = sum(1 for bundle in es.bundles if e in bundle.sources)
        conflicts = len(es.conflicts_of.get(e, ()))
        return (conflicts, len(es.bundles_into.get(e, ())), outgoing, e in es.initial_events)

    a_sig = {e: signature(a, e) for e in a.events}
    b_sig = {e: signature(b, e) for e in b.events}
    order = sorted(a.events, key=lambda e: (len(a.conflicts_of.get(e, ())), e), reverse=True)
    mapping: dict[Event, Event] = {}
    used: set[Event] = set()

    def consistent(e: Event, f: Event) -> bool:
        for other, image in mapping.items():
            if a.in_conflict(e, other) != b.in_conflict(f, image):
                return False
        return True

    def complete() -> bool:
        conflicts = frozenset((mapping[x], mapping[y]) for x, y in a.conflict)
        bundles = frozenset(
            Bundle(frozenset(mapping[x] for x in bundle.sources), mapping[bundle.target])
            for bundle in a.bundles
        )
        finals = frozenset(frozenset(mapping[x] for x in xs) for xs in a.finals)
        return conflicts == b.conflict and bundles == b.bundles and finals == b.finals

    def extend(position: int) -> bool:
        if position == len(order):
            return complete()
        e = order[position]
        for f in b.events:
            if f in used or a_sig[e] != b_sig[f] or a.labels[e] != b.labels[f]:
                continue
            if not consistent(e, f):
                continue
            mapping[e] = f
            used.add(f)
            if extend(position + 1):
                return True
            del mapping[e]
            used.discard(f)
        return False

    return dict(mapping) if extend(0) else None
