"""
Regular operations on event structures: 1, 0, atomic, +, ·, ‖ and bounded star.

Every binary operation needs disjoint event sets. When the operands
overlap, the right operand is replaced by a fresh copy drawn from the
event supply, so structures can be reused freely as building blocks.
"""
from __future__ import annotations

import logging
from itertools import count
from typing import Iterator, Mapping

from prg_verify.errors import DomainError, StructureError
from prg_verify.models.event_structure import Bundle, Event, IpBes, Shape, ShapeKind
from prg_verify.models.program import ConvexProgram
from prg_verify.models.state_space import StateSpace

logger = logging.getLogger(__name__)


class EventSupply:
    """Monotone source of fresh event identifiers."""

    def __init__(self, start: int = 0):
        self._counter: Iterator[int] = count(start)

    def fresh(self) -> Event:
        return next(self._counter)


default_supply = EventSupply()


def _supply(supply: EventSupply | None) -> EventSupply:
    return supply if supply is not None else default_supply


def unit(space: StateSpace, supply: EventSupply | None = None) -> IpBes:
    """1: a single event labelled δ."""
    event = _supply(supply).fresh()
    return IpBes(
        space=space,
        events=(event,),
        conflict=frozenset(),
        bundles=frozenset(),
        labels={event: ConvexProgram.identity(space)},
        finals=frozenset({frozenset({event})}),
        shape=Shape(ShapeKind.UNIT, event),
    )


def zero(space: StateSpace) -> IpBes:
    """0: the empty structure."""
    return IpBes(
        space=space,
        events=(),
        conflict=frozenset(),
        bundles=frozenset(),
        labels={},
        finals=frozenset(),
        shape=Shape(ShapeKind.ZERO),
    )


def atomic(r: ConvexProgram, name: str = "", supply: EventSupply | None = None) -> IpBes:
    """A single event labelled ``r``."""
    event = _supply(supply).fresh()
    label = r.renamed(name) if name else r
    return IpBes(
        space=r.space,
        events=(event,),
        conflict=frozenset(),
        bundles=frozenset(),
        labels={event: label},
        finals=frozenset({frozenset({event})}),
        shape=Shape(ShapeKind.ATOM, event),
    )


def rename(es: IpBes, mapping: Mapping[Event, Event]) -> IpBes:
    """Apply an injective event renaming."""
    if len(set(mapping[e] for e in es.events)) != len(es.events):
        raise StructureError("Event renaming is not injective")
    return IpBes(
        space=es.space,
        events=tuple(sorted(mapping[e] for e in es.events)),
        conflict=frozenset((mapping[a], mapping[b]) for a, b in es.conflict),
        bundles=frozenset(
            Bundle(frozenset(mapping[x] for x in bundle.sources), mapping[bundle.target])
            for bundle in es.bundles
        ),
        labels={mapping[e]: label for e, label in es.labels.items()},
        finals=frozenset(frozenset(mapping[e] for e in x) for x in es.finals),
        shape=es.shape.renamed(mapping) if es.shape is not None else None,
    )


def fresh_copy(es: IpBes, supply: EventSupply | None = None) -> IpBes:
    """Isomorphic copy with fresh events."""
    source = _supply(supply)
    return rename(es, {e: source.fresh() for e in es.events})


def _disjoint(a: IpBes, b: IpBes, supply: EventSupply | None) -> IpBes:
    a.space.check_same(b.space)
    if set(a.events) & set(b.events):
        b = fresh_copy(b, supply)
        if set(a.events) & set(b.events):
            raise StructureError("Event identifiers still overlap after renaming")
    return b


def _symmetric(pairs: set[tuple[Event, Event]]) -> frozenset[tuple[Event, Event]]:
    return frozenset(pairs | {(y, x) for x, y in pairs})


def choice(a: IpBes, b: IpBes, supply: EventSupply | None = None) -> IpBes:
    """
    E + F: nondeterministic choice.

    Initial events of both sides conflict, and so do members of final sets
    from opposite sides; the final sets are the pairwise unions.
    """
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    b = _disjoint(a, b, supply)

    added: set[tuple[Event, Event]] = {(x, y) for x in a.initial_events for y in b.initial_events}
    for xs in a.finals:
        for ys in b.finals:
            added.update((x, y) for x in xs for y in ys)
    return IpBes(
        space=a.space,
        events=tuple(sorted(a.events + b.events)),
        conflict=a.conflict | b.conflict | _symmetric(added),
        bundles=a.bundles | b.bundles,
        labels={**a.labels, **b.labels},
        finals=frozenset(x | y for x in a.finals for y in b.finals),
        shape=_combined(ShapeKind.SUM, a, b),
    )


def seq(a: IpBes, b: IpBes, supply: EventSupply | None = None) -> IpBes:
    """E·F: every initial event of F waits for each final set of E."""
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    b = _disjoint(a, b, supply)

    links = frozenset(Bundle(x, e) for e in b.initial_events for x in a.finals)
    return IpBes(
        space=a.space,
        events=tuple(sorted(a.events + b.events)),
        conflict=a.conflict | b.conflict,
        bundles=a.bundles | b.bundles | links,
        labels={**a.labels, **b.labels},
        finals=b.finals,
        shape=_combined(ShapeKind.SEQ, a, b),
    )


def par(a: IpBes, b: IpBes, supply: EventSupply | None = None) -> IpBes:
    """E‖F: component-wise union."""
    b = _disjoint(a, b, supply)
    return IpBes(
        space=a.space,
        events=tuple(sorted(a.events + b.events)),
        conflict=a.conflict | b.conflict,
        bundles=a.bundles | b.bundles,
        labels={**a.labels, **b.labels},
        finals=a.finals | b.finals,
        shape=_combined(ShapeKind.PAR, a, b),
    )


def star_unfold(a: IpBes, b: IpBes, depth: int, supply: EventSupply | None = None) -> IpBes:
    """
    Element ``depth`` of the chain F, F + E·F, F + E·(F + E·F), …

    Each occurrence of E and F in the result is a fresh copy.
    """
    if depth < 0:
        raise DomainError(f"Unfolding depth must be non-negative, got {depth}")
    a.space.check_same(b.space)
    current = b
    for _ in range(depth):
        current = choice(fresh_copy(b, supply), seq(fresh_copy(a, supply), current, supply), supply)
    logger.debug(f"Star unfolded to depth {depth}: {len(current.events)} events")
    return current


def seq_all(parts: list[IpBes], supply: EventSupply | None = None) -> IpBes:
    """Left-to-right sequential composition of ``parts``."""
    if not parts:
        raise DomainError("seq_all needs at least one part")
    result = parts[0]
    for part in parts[1:]:
        result = seq(result, part, supply)
    return result


def par_all(parts: list[IpBes], supply: EventSupply | None = None) -> IpBes:
    if not parts:
        raise DomainError("par_all needs at least one part")
    result = parts[0]
    for part in parts[1:]:
        result = par(result, part, supply)
    return result


def _combined(kind: ShapeKind, a: IpBes, b: IpBes) -> Shape | None:
    if a.shape is None or b.shape is None:
        return None
    return Shape(kind, None, (a.shape, b.shape))
