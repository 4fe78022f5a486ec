"""
Extremal schedulers and their runs.

An extremal policy resolves every (trace, state) pair that carries mass to
one enabled event and one vertex of that event's label. Randomized
schedulers are convex combinations of these and are never materialized.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

from prg_verify.config import settings
from prg_verify.errors import PolicyError, TerminationError, TraceExplosionError
from prg_verify.models.distribution import Distribution, SubDistribution, entries_from_dict
from prg_verify.models.event_structure import Event, IpBes, Trace
from prg_verify.utils.rationals import format_rational

logger = logging.getLogger(__name__)

Decision = tuple[Event, Distribution]
DecisionKey = tuple[Trace, int]


class SchedulerPolicy:
    """
    Deterministic scheduler: (trace, state index) → (event, label vertex).

    Decisions come from an explicit table, a rule, or both (the table wins).
    """

    def __init__(
        self,
        decisions: dict[DecisionKey, Decision] | None = None,
        rule: Optional[Callable[[Trace, int], Decision]] = None,
        name: str = "",
    ):
        self.decisions = dict(decisions or {})
        self.rule = rule
        self.name = name

    def decide(self, trace: Trace, state: int) -> Decision:
        decision = self.decisions.get((trace, state))
        if decision is not None:
            return decision
        if self.rule is not None:
            return self.rule(trace, state)
        raise PolicyError(
            f"Policy {self.name or ''} has no decision for trace {trace} at state {state}"
        )

    def __repr__(self) -> str:
        return f"SchedulerPolicy({self.name or len(self.decisions)})"


@dataclass
class Run:
    """Complete run φ: the subdistribution reached along every trace."""

    initial: int
    values: dict[Trace, SubDistribution] = field(default_factory=dict)
    maximal: set[Trace] = field(default_factory=set)

    def outcome(self) -> SubDistribution:
        """σ_s(E): the sum of φ over maximal traces."""
        combined: dict[int, Fraction] = {}
        for trace in self.maximal:
            for i, w in self.values[trace].entries:
                combined[i] = combined.get(i, Fraction(0)) + w
        space = self.values[()].space
        return SubDistribution(space, entries_from_dict(combined))

    def frontier_masses(self) -> list[Fraction]:
        """
        Mass at each depth n: traces of length n plus maximal traces that
        are shorter. Every entry equals 1 for a terminating policy.
        """
        depth = max(len(t) for t in self.values)
        masses = []
        for n in range(depth + 1):
            total = Fraction(0)
            for trace, value in self.values.items():
                if len(trace) == n or (len(trace) < n and trace in self.maximal):
                    total += value.mass()
            masses.append(total)
        return masses


def options(es: IpBes, trace: Trace, state: int) -> list[Decision]:
    """Every extremal choice at (trace, state), in canonical order."""
    choices: list[Decision] = []
    for event in es.enabled(frozenset(trace)):
        entry = es.labels[event].at(state)
        if entry is None:
            continue
        for vertex in entry.vertex_form(settings.cap).vertices:
            choices.append((event, vertex))
    return choices


def build_run(es: IpBes, policy: SchedulerPolicy, initial: int) -> Run:
    """
    Run ``policy`` from state index ``initial``.

    Raises:
        PolicyError: a decision is missing, names a disabled event, picks an
            event whose label is EMPTY at that state, or a point outside it
    """
    space = es.space
    run = Run(initial=initial)
    run.values[()] = Distribution.point_at(space, initial)
    stack: list[Trace] = [()]
    while stack:
        trace = stack.pop()
        value = run.values[trace]
        enabled = es.enabled(frozenset(trace))
        if not enabled:
            run.maximal.add(trace)
            continue
        children: dict[Trace, dict[int, Fraction]] = {}
        for state, weight in value.entries:
            event, mu = policy.decide(trace, state)
            if event not in enabled:
                raise PolicyError(f"Event {event} is not enabled after {trace}")
            entry = es.labels[event].at(state)
            if entry is None:
                raise PolicyError(
                    f"Label of event {event} is EMPTY at state {space.state(state)!r}"
                )
            if not entry.contains(mu):
                raise PolicyError(
                    f"Chosen distribution {mu!r} is not in λ({event})({space.state(state)!r})"
                )
            target = children.setdefault(trace + (event,), {})
            for i, w in mu.entries:
                target[i] = target.get(i, Fraction(0)) + weight * w
        for child, weights in sorted(children.items(), reverse=True):
            run.values[child] = SubDistribution(space, entries_from_dict(weights))
            stack.append(child)
    return run


def run_policy(es: IpBes, policy: SchedulerPolicy, initial: int) -> SubDistribution:
    """σ_s(E) for ``policy`` from state index ``initial``."""
    return build_run(es, policy, initial).outcome()


def extremal_policies(es: IpBes, initial: int, cap: int | None = None) -> Iterator[SchedulerPolicy]:
    """
    Every extremal policy, restricted to the (trace, state) pairs it reaches.

    Raises:
        TerminationError: some reachable state has no defined enabled label
        TraceExplosionError: more than ``cap`` policies
    """
    limit = cap or settings.cap
    space = es.space
    produced = 0

    def explore(
        pending: list[tuple[Trace, SubDistribution]], decisions: dict[DecisionKey, Decision]
    ) -> Iterator[dict[DecisionKey, Decision]]:
        if not pending:
            yield decisions
            return
        trace, value = pending[-1]
        rest = pending[:-1]
        if not es.enabled(frozenset(trace)):
            yield from explore(rest, decisions)
            return

        states = [i for i, _ in value.entries]
        per_state = []
        for state in states:
            choices = options(es, trace, state)
            if not choices:
                raise TerminationError(
                    f"No enabled event is defined at state {space.state(state)!r} "
                    f"after trace {trace}"
                )
            per_state.append(choices)

        def assign(
            position: int, chosen: dict[DecisionKey, Decision]
        ) -> Iterator[dict[DecisionKey, Decision]]:
            if position == len(states):
                children: dict[Trace, dict[int, Fraction]] = {}
                for (state, weight) in value.entries:
                    event, mu = chosen[(trace, state)]
                    target = children.setdefault(trace + (event,), {})
                    for i, w in mu.entries:
                        target[i] = target.get(i, Fraction(0)) + weight * w
                successors = [
                    (child, SubDistribution(space, entries_from_dict(weights)))
                    for child, weights in sorted(children.items(), reverse=True)
                ]
                yield from explore(rest + successors, chosen)
                return
            state = states[position]
            for decision in per_state[position]:
                extended = dict(chosen)
                extended[(trace, state)] = decision
                yield from assign(position + 1, extended)

        yield from assign(0, decisions)

    start = Distribution.point_at(space, initial)
    for decisions in explore([((), start)], {}):
        produced += 1
        if produced > limit:
            raise TraceExplosionError(
                f"Policy enumeration exceeded cap {limit}", partial_count=limit
            )
        yield SchedulerPolicy(decisions, name=f"extremal-{produced}")
    logger.debug(f"Enumerated {produced} extremal policies from state {space.state(initial)!r}")


def describe_policy(policy: SchedulerPolicy, es: IpBes) -> list[str]:
    """Readable decision lines: ``trace @ state -> event : distribution``."""
    lines = []
    for (trace, state), (event, mu) in sorted(policy.decisions.items()):
        weights = ", ".join(f"{es.space.state(i)!r}: {format_rational(w)}" for i, w in mu.entries)
        path = " ".join(es.label_name(e) for e in trace) or "ε"
        at = es.space.state(state)
        lines.append(f"{path} @ {at!r} -> {es.label_name(event)} : {{{weights}}}")
    return lines
