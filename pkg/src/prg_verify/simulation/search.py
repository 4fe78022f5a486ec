"""
t-simulation search between event structures.

A t-simulation maps every trace of E to a trace of F. Each step of E is
either absorbed (its label refines δ and the image stays put) or matched
by one step of F with a label it refines, and the image of a maximal
trace must be weakly maximal in F.

The search is an AND-OR problem over pairs of configurations: whether the
traces below α can be mapped once α ↦ β is fixed depends only on the event
sets of α and β. Pairs are memoized, so every candidate is examined at most
once and a negative answer certifies that no simulation exists.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

from prg_verify.config import settings
from prg_verify.errors import TraceExplosionError
from prg_verify.events.traces import traces
from prg_verify.models.event_structure import Configuration, Event, IpBes, Trace
from prg_verify.models.program import ConvexProgram
from prg_verify.semantics.operations import refines_H

logger = logging.getLogger(__name__)

TSimulation = dict[Trace, Trace]
# Witness per enabled event: None to absorb it, or the matching event of F.
StepChoice = Optional[Event]
_FAIL = object()


@dataclass
class SimulationResult:
    """Outcome of ``find_t_simulation``."""

    mapping: TSimulation | None
    explored: int
    exhausted: bool = False

    @property
    def found(self) -> bool:
        return self.mapping is not None


@dataclass
class SimulationCheck:
    """Clause-by-clause verdict of ``check_t_simulation``."""

    problems: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.problems


class _LabelOrder:
    """Cached label refinements between two structures."""

    def __init__(self, a: IpBes, b: IpBes):
        self.a = a
        self.b = b
        self._identity = ConvexProgram.identity(a.space)
        self._pairs: dict[tuple[Event, Event], bool] = {}
        self._stutter: dict[Event, bool] = {}
        self._skippable: dict[Event, bool] = {}

    def refines(self, e: Event, f: Event) -> bool:
        """λ_a(e) ⊑_H λ_b(f)."""
        key = (e, f)
        if key not in self._pairs:
            self._pairs[key] = refines_H(self.a.labels[e], self.b.labels[f])
        return self._pairs[key]

    def stutters(self, e: Event) -> bool:
        """λ_a(e) ⊑_H δ."""
        if e not in self._stutter:
            self._stutter[e] = refines_H(self.a.labels[e], self._identity)
        return self._stutter[e]

    def skippable(self, f: Event) -> bool:
        """δ ⊑_H λ_b(f)."""
        if f not in self._skippable:
            self._skippable[f] = refines_H(self._identity, self.b.labels[f])
        return self._skippable[f]


def _weakly_maximal(
    es: IpBes,
    configuration: Configuration,
    skippable: Callable[[Event], bool],
    memo: dict[Configuration, bool],
) -> bool:
    known = memo.get(configuration)
    if known is not None:
        return known
    enabled = es.enabled(configuration)
    result = not enabled or any(
        skippable(f) and _weakly_maximal(es, configuration | {f}, skippable, memo) for f in enabled
    )
    memo[configuration] = result
    return result


def is_weakly_maximal(beta: Trace, es: IpBes) -> bool:
    """
    True when ``beta`` is maximal, or extends to a maximal trace using only
    events whose labels are refined by δ.
    """
    identity = ConvexProgram.identity(es.space)
    cache: dict[Event, bool] = {}

    def skippable(f: Event) -> bool:
        if f not in cache:
            cache[f] = refines_H(identity, es.labels[f])
        return cache[f]

    return _weakly_maximal(es, frozenset(beta), skippable, {})


def find_t_simulation(a: IpBes, b: IpBes, cap: int | None = None) -> SimulationResult:
    """
    Search for a t-simulation from ``a`` to ``b``.

    Candidates are tried in ascending event order, absorption last, so the
    witness is reproducible.

    Raises:
        TraceExplosionError: more than ``cap`` configuration pairs explored
    """
    a.space.check_same(b.space)
    limit = cap or settings.cap
    order = _LabelOrder(a, b)
    memo: dict[tuple[Configuration, Configuration], dict[Event, StepChoice] | None] = {}
    weak: dict[Configuration, bool] = {}

    def solve(ca: Configuration, cb: Configuration) -> dict[Event, StepChoice] | None:
        key = (ca, cb)
        if key in memo:
            return memo[key]
        if len(memo) >= limit:
            raise TraceExplosionError(
                f"Simulation search exceeded cap {limit}", partial_count=len(memo)
            )
        memo[key] = None  # provisional; configurations only grow, so no cycles
        witness: dict[Event, StepChoice] = {}
        enabled_b = b.enabled(cb)
        for e in a.enabled(ca):
            after = ca | {e}
            maximal = not a.enabled(after)
            choice = _match(e, after, maximal, cb, enabled_b)
            if choice is _FAIL:
                return None
            witness[e] = choice  # type: ignore[assignment]
        memo[key] = witness
        return witness

    def _match(
        e: Event,
        after: Configuration,
        maximal: bool,
        cb: Configuration,
        enabled_b: tuple[Event, ...],
    ) -> object:
        for f in enabled_b:
            if not order.refines(e, f):
                continue
            target = cb | {f}
            if maximal:
                if _weakly_maximal(b, target, order.skippable, weak):
                    return f
            elif solve(after, target) is not None:
                return f
        if not maximal and order.stutters(e) and solve(after, cb) is not None:
            return None
        return _FAIL

    root = solve(frozenset(), frozenset())
    if root is None:
        logger.debug(f"No t-simulation from {a!r} to {b!r} ({len(memo)} pairs explored)")
        return SimulationResult(None, explored=len(memo), exhausted=True)

    mapping: TSimulation = {(): ()}
    stack: list[Trace] = [()]
    while stack:
        alpha = stack.pop()
        beta = mapping[alpha]
        witness = memo[(frozenset(alpha), frozenset(beta))]
        assert witness is not None
        for e, f in witness.items():
            child = alpha + (e,)
            mapping[child] = beta if f is None else beta + (f,)
            stack.append(child)
    logger.debug(f"t-simulation from {a!r} to {b!r} found over {len(mapping)} traces")
    return SimulationResult(mapping, explored=len(memo))


def check_t_simulation(a: IpBes, b: IpBes, mapping: TSimulation) -> SimulationCheck:
    """Re-check every clause of the definition for ``mapping``, trace by trace."""
    report = SimulationCheck()
    b_traces = set(traces(b))
    identity = ConvexProgram.identity(a.space)

    if mapping.get(()) != ():
        report.problems.append("f(ε) ≠ ε")
    for alpha in traces(a):
        if alpha not in mapping:
            report.problems.append(f"f undefined on {alpha}")
            continue
        beta = mapping[alpha]
        if beta not in b_traces:
            report.problems.append(f"f({alpha}) = {beta} is not a trace of the target")
        if not alpha:
            continue
        prefix, e = alpha[:-1], alpha[-1]
        if prefix not in mapping:
            continue
        before = mapping[prefix]
        maximal = not a.enabled(frozenset(alpha))
        if beta == before:
            if maximal:
                report.problems.append(f"maximal trace {alpha} is absorbed")
            elif not refines_H(a.labels[e], identity):
                report.problems.append(f"{alpha}: absorbed event {e} does not refine δ")
        elif len(beta) == len(before) + 1 and beta[:-1] == before:
            if not refines_H(a.labels[e], b.labels[beta[-1]]):
                report.problems.append(f"{alpha}: label of {e} does not refine label of {beta[-1]}")
            if maximal and not is_weakly_maximal(beta, b):
                report.problems.append(f"{alpha} is maximal but {beta} is not weakly maximal")
        else:
            report.problems.append(
                f"{alpha}: image {beta} does not extend {before} by at most one event"
            )
    return report


def compose_simulations(f: TSimulation, g: TSimulation) -> TSimulation:
    """g ∘ f."""
    return {alpha: g[beta] for alpha, beta in f.items()}


def simulation_equivalent(a: IpBes, b: IpBes, cap: int | None = None) -> bool:
    """a ≡sim b, read as simulations in both directions."""
    return find_t_simulation(a, b, cap).found and find_t_simulation(b, a, cap).found
