"""The semantics map from event structures to convex programs."""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Hashable

from prg_verify.config import settings
from prg_verify.errors import TerminationError
from prg_verify.geometry.hull import weighted_sum
from prg_verify.models.convex import ConvexSet, SetForm, extreme_points
from prg_verify.models.distribution import Distribution, entries_from_dict
from prg_verify.models.event_structure import Configuration, IpBes
from prg_verify.models.program import ConvexProgram
from prg_verify.scheduling.policy import extremal_policies, run_policy
from prg_verify.semantics.operations import refines_H

logger = logging.getLogger(__name__)


class SemanticsEvaluator:
    """
    Memoized outcome sets of an event structure.

    The outcomes reachable after a trace depend only on its event set and
    the current state, so ``outcomes`` is computed once per (configuration,
    state) and shared by every history that reaches it. Independent choices
    at distinct successor states combine as a Minkowski mixture, which is
    exactly what a history-dependent extremal scheduler can realize.
    """

    def __init__(self, es: IpBes):
        self.es = es
        self._memo: dict[tuple[Configuration, int], tuple[Distribution, ...]] = {}

    def outcomes(self, configuration: Configuration, state: int) -> tuple[Distribution, ...]:
        key = (configuration, state)
        cached = self._memo.get(key)
        if cached is not None:
            return cached

        es = self.es
        enabled = es.enabled(configuration)
        if not enabled:
            result: tuple[Distribution, ...] = (Distribution.point_at(es.space, state),)
        else:
            points: list[Distribution] = []
            for event in enabled:
                entry = es.labels[event].at(state)
                if entry is None:
                    continue
                after = configuration | {event}
                for mu in entry.vertex_form(settings.cap).vertices:
                    if len(mu.entries) == 1:
                        points.extend(self.outcomes(after, mu.entries[0][0]))
                    else:
                        parts = [(w, self.outcomes(after, t)) for t, w in mu.entries]
                        points.extend(weighted_sum(parts))
            if not points:
                raise TerminationError(
                    f"No enabled event of {es!r} is defined at state "
                    f"{es.space.state(state)!r} after {sorted(configuration)}"
                )
            result = extreme_points(points)
        self._memo[key] = result
        return result


def semantics(
    es: IpBes,
    initial: Hashable,
    exhaustive: bool = False,
    evaluator: SemanticsEvaluator | None = None,
) -> ConvexSet:
    """
    ⟦E⟧(s): the convex hull of all scheduler outcomes from ``initial``.

    Args:
        es: Feasible, terminating structure
        initial: Initial state identifier
        exhaustive: Enumerate every extremal policy and run it, instead of
            the memoized recursion (cross-check path)
        evaluator: Shared memo for repeated queries on the same structure

    Raises:
        TerminationError: a policy loses mass or reaches a state where no
            enabled label is defined
    """
    index = es.space.index(initial)
    if not exhaustive:
        evaluator = evaluator or SemanticsEvaluator(es)
        return ConvexSet(es.space, SetForm.VERTEX, evaluator.outcomes(frozenset(), index))

    points: list[Distribution] = []
    for policy in extremal_policies(es, index):
        outcome = run_policy(es, policy, index)
        if outcome.mass() != 1:
            raise TerminationError(f"{policy!r} is not terminating: mass {outcome.mass()}")
        points.append(Distribution(es.space, outcome.entries))
    logger.debug(f"Exhaustive semantics from {initial!r}: {len(points)} policy outcomes")
    return ConvexSet.from_points(es.space, points)


def semantics_program(es: IpBes, exhaustive: bool = False) -> ConvexProgram:
    """The program s ↦ ⟦E⟧(s)."""
    evaluator = SemanticsEvaluator(es)
    entries = [
        semantics(es, es.space.state(i), exhaustive=exhaustive, evaluator=evaluator)
        for i in es.space.indices()
    ]
    return ConvexProgram(es.space, entries, name=f"⟦{es!r}⟧" if len(es.events) < 6 else "")


def refines_seq(a: IpBes, b: IpBes) -> bool:
    """E ⊑ F: ⟦E⟧ ⊑_H ⟦F⟧."""
    return refines_H(semantics_program(a), semantics_program(b))


def uniform_policy_distribution(es: IpBes, initial: Hashable) -> Distribution:
    """
    Exact outcome of the scheduler that picks uniformly among enabled
    defined events and uniformly among label vertices at every step.
    """
    space = es.space
    memo: dict[tuple[Configuration, int], dict[int, Fraction]] = {}

    def value(configuration: Configuration, state: int) -> dict[int, Fraction]:
        key = (configuration, state)
        if key in memo:
            return memo[key]
        enabled = es.enabled(configuration)
        if not enabled:
            memo[key] = {state: Fraction(1)}
            return memo[key]
        choices = []
        for event in enabled:
            entry = es.labels[event].at(state)
            if entry is not None:
                choices.append((event, entry.vertex_form(settings.cap).vertices))
        if not choices:
            raise TerminationError(f"No enabled event is defined at state {space.state(state)!r}")
        combined: dict[int, Fraction] = {}
        event_weight = Fraction(1, len(choices))
        for event, vertices in choices:
            vertex_weight = event_weight / len(vertices)
            after = configuration | {event}
            for mu in vertices:
                for t, w in mu.entries:
                    for u, x in value(after, t).items():
                        combined[u] = combined.get(u, Fraction(0)) + vertex_weight * w * x
        memo[key] = combined
        return combined

    return Distribution(space, entries_from_dict(value(frozenset(), space.index(initial))))
