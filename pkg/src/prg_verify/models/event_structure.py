"""Bundle event structures with internal probability."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from prg_verify.models.program import ConvexProgram
from prg_verify.models.state_space import StateSpace

Event = int
Trace = tuple[Event, ...]
Configuration = frozenset[Event]


class ShapeKind(str, Enum):
    """Constructor that produced a structure."""

    ZERO = "zero"
    UNIT = "unit"
    ATOM = "atom"
    SUM = "sum"
    SEQ = "seq"
    PAR = "par"


@dataclass(frozen=True)
class Shape:
    """Provenance tree of an inductively built structure."""

    kind: ShapeKind
    event: Event | None = None
    children: tuple[Shape, ...] = ()

    def renamed(self, mapping: Mapping[Event, Event]) -> Shape:
        event = mapping[self.event] if self.event is not None else None
        return Shape(self.kind, event, tuple(c.renamed(mapping) for c in self.children))


@dataclass(frozen=True)
class Bundle:
    """x ↦ e: ``target`` is enabled once some member of ``sources`` occurred."""

    sources: frozenset[Event]
    target: Event


@dataclass(frozen=True, eq=False)
class IpBes:
    """
    Bundle event structure with internal probability (E, ↦, #, λ, Φ).

    ``conflict`` holds ordered pairs; builders insert both directions.
    ``shape`` is None for structures assembled by hand.
    """

    space: StateSpace
    events: tuple[Event, ...]
    conflict: frozenset[tuple[Event, Event]]
    bundles: frozenset[Bundle]
    labels: Mapping[Event, ConvexProgram]
    finals: frozenset[frozenset[Event]]
    shape: Shape | None = field(default=None, compare=False)

    @classmethod
    def build(
        cls,
        space: StateSpace,
        labels: Mapping[Event, ConvexProgram],
        conflicts: Iterable[tuple[Event, Event]] = (),
        bundles: Iterable[tuple[Iterable[Event], Event]] = (),
        finals: Iterable[Iterable[Event]] = (),
        symmetric: bool = True,
    ) -> IpBes:
        """Assemble a structure from plain collections (no validation)."""
        pairs = set(conflicts)
        if symmetric:
            pairs |= {(b, a) for a, b in pairs}
        return cls(
            space=space,
            events=tuple(sorted(labels)),
            conflict=frozenset(pairs),
            bundles=frozenset(Bundle(frozenset(x), e) for x, e in bundles),
            labels=dict(labels),
            finals=frozenset(frozenset(x) for x in finals),
        )

    @property
    def is_zero(self) -> bool:
        return not self.events

    @cached_property
    def conflicts_of(self) -> dict[Event, frozenset[Event]]:
        table: dict[Event, set[Event]] = {e: set() for e in self.events}
        for a, b in self.conflict:
            table.setdefault(a, set()).add(b)
            table.setdefault(b, set()).add(a)
        return {e: frozenset(s) for e, s in table.items()}

    @cached_property
    def bundles_into(self) -> dict[Event, tuple[frozenset[Event], ...]]:
        table: dict[Event, list[frozenset[Event]]] = {e: [] for e in self.events}
        for bundle in self.bundles:
            table.setdefault(bundle.target, []).append(bundle.sources)
        return {e: tuple(sorted(xs, key=sorted)) for e, xs in table.items()}

    @cached_property
    def initial_events(self) -> tuple[Event, ...]:
        """in(E): events that are the target of no bundle."""
        return tuple(e for e in self.events if not self.bundles_into.get(e))

    def in_conflict(self, a: Event, b: Event) -> bool:
        return b in self.conflicts_of.get(a, frozenset())

    def enabled(self, configuration: Configuration) -> tuple[Event, ...]:
        """Events that may extend any trace whose event set is ``configuration``."""
        result = []
        for e in self.events:
            if e in configuration:
                continue
            if self.conflicts_of[e] & configuration:
                continue
            if all(x & configuration for x in self.bundles_into[e]):
                result.append(e)
        return tuple(result)

    def label_name(self, event: Event) -> str:
        return self.labels[event].name or f"e{event}"

    def __repr__(self) -> str:
        names = ", ".join(f"{e}:{self.label_name(e)}" for e in self.events)
        return f"IpBes({names})"
