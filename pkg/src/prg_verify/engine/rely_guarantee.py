"""
Rely/guarantee conditions and quintuple checking.

A quintuple ⦃P R⦄ E ⦃G Q⦄ holds when P·(R‖E) ⊑ Q and every action of E is
allowed by G. The first half is discharged by threading the rely through
the structure of E (atomic, prefix and conditional rules, with loops
unfolded), which yields a sequential upper bound r*·u₁·r*·u₂·…·r*.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Sequence

from prg_verify.errors import (
    EmptySetError,
    FeasibilityError,
    GuaranteeError,
    InfeasibleRelyError,
    RuleApplicabilityError,
    SideConditionError,
)
from prg_verify.events.builders import EventSupply, par
from prg_verify.events.traces import equal_up_to_renaming
from prg_verify.geometry.hull import intersect, set_refines
from prg_verify.models.convex import Halfspace
from prg_verify.models.distribution import Distribution
from prg_verify.models.event_structure import IpBes, Shape, ShapeKind
from prg_verify.models.program import ConvexProgram, Entry
from prg_verify.models.state_space import StateSpace
from prg_verify.scheduling.semantics import SemanticsEvaluator, semantics
from prg_verify.semantics.operations import is_transitive, kleene_star, ndet_choice, refines_H
from prg_verify.semantics.terms import Atom, Choice, ProgramTerm, Seq, term_refinement_failure
from prg_verify.simulation.laws import rely_star
from prg_verify.simulation.search import find_t_simulation

logger = logging.getLogger(__name__)


class RelyCondition:
    """
    r* for an atomic program r.

    ``realized`` is the sequential program r* itself: δ + r when r is
    transitive, otherwise the stabilized Kleene star.
    """

    def __init__(self, base: ConvexProgram, name: str = ""):
        base.require_program("RelyCondition")
        self.base = base
        self.name = name or base.name or "r"

    @classmethod
    def trivial(cls, space: StateSpace) -> RelyCondition:
        """The δ rely: an environment that only stutters."""
        return cls(ConvexProgram.identity(space), name="δ")

    @cached_property
    def transitive(self) -> bool:
        return is_transitive(self.base)

    @cached_property
    def realized(self) -> ConvexProgram:
        identity = ConvexProgram.identity(self.base.space)
        if self.base == identity:
            return identity
        if self.transitive:
            return ndet_choice(identity, self.base).renamed(f"{self.name}*")
        return kleene_star(self.base, identity)

    def star_structure(self, depth: int, supply: EventSupply | None = None) -> IpBes:
        """r* unfolded to ``depth`` as an event structure."""
        return rely_star(self.base, depth, supply)

    def __repr__(self) -> str:
        return f"RelyCondition({self.name})"


@dataclass(frozen=True)
class Quintuple:
    """⦃pre rely⦄ component ⦃guar post⦄."""

    pre: ConvexProgram
    rely: RelyCondition
    component: IpBes
    guar: RelyCondition
    post: ConvexProgram
    name: str = ""


@dataclass(frozen=True)
class Verdict:
    """Outcome of ``check_quintuple``."""

    valid: bool
    refinement_holds: bool
    guarantee_holds: bool
    bound: ProgramTerm
    failing_state: Hashable | None = None
    violated: Halfspace | None = None
    minimum: Fraction | None = None
    failing_vertex: Distribution | None = None

    def describe(self) -> str:
        if self.valid:
            return "VALID"
        reasons = []
        if not self.refinement_holds:
            detail = f"post fails at state {self.failing_state!r}"
            if self.violated is not None:
                detail += f": {self.violated!r} has minimum {self.minimum}"
            elif self.failing_vertex is not None:
                detail += f": {self.failing_vertex!r} lies outside"
            reasons.append(detail)
        if not self.guarantee_holds:
            reasons.append("an action is outside the guarantee")
        return "INVALID (" + "; ".join(reasons) + ")"


def guarantee_of(es: IpBes) -> ConvexProgram:
    """
    Strongest guarantee: the nondeterministic choice of every label in ``es``.

    Raises:
        GuaranteeError: ``es`` has no events
    """
    if es.is_zero:
        raise GuaranteeError("The empty structure has no guarantee")
    distinct: list[ConvexProgram] = []
    for event in es.events:
        label = es.labels[event]
        if not any(label == seen for seen in distinct):
            distinct.append(label)
    result = distinct[0]
    for label in distinct[1:]:
        result = ndet_choice(result, label)
    return result


def check_guarantee(es: IpBes, g: ConvexProgram) -> bool:
    """Every label of ``es`` refines ``g`` or stutters (refines δ)."""
    identity = ConvexProgram.identity(es.space)
    checked: list[ConvexProgram] = []
    for event in es.events:
        label = es.labels[event]
        if any(label is seen for seen in checked):
            continue
        if not (refines_H(label, g) or refines_H(label, identity)):
            logger.debug(f"Label {es.label_name(event)} is outside guarantee {g.name or g!r}")
            return False
        checked.append(label)
    return True


def _initial_events(shape: Shape) -> list[int]:
    if shape.kind in (ShapeKind.ATOM, ShapeKind.UNIT):
        assert shape.event is not None
        return [shape.event]
    if shape.kind == ShapeKind.SEQ:
        return _initial_events(shape.children[0])
    return [e for child in shape.children for e in _initial_events(child)]


def interleave_rely(rely: RelyCondition, es: IpBes) -> ProgramTerm:
    """
    Sequential upper bound of r*‖E for a sequential component E.

    Each action u becomes u·r*, sequencing concatenates, and a choice
    b·E + c·F becomes b·(r*…) + c·(r*…), all behind one leading r*.

    Raises:
        RuleApplicabilityError: E contains ‖, is empty, or was assembled by hand
        FeasibilityError: the first actions of a choice leave some state undefined
    """
    if es.is_zero:
        raise RuleApplicabilityError("No rule applies to the empty structure")
    if es.shape is None:
        raise RuleApplicabilityError(
            "Structure has no constructor shape; build it with the regular operations"
        )

    space = es.space
    identity = ConvexProgram.identity(space)
    star = Atom(rely.realized)

    def body(shape: Shape) -> list[ProgramTerm]:
        if shape.kind == ShapeKind.UNIT:
            return []
        if shape.kind == ShapeKind.ATOM:
            assert shape.event is not None
            label = es.labels[shape.event]
            if label == identity:
                return []
            return [Atom(label), star]
        if shape.kind == ShapeKind.SEQ:
            return body(shape.children[0]) + body(shape.children[1])
        if shape.kind == ShapeKind.SUM:
            covered: set[int] = set()
            for event in _initial_events(shape):
                covered |= es.labels[event].domain()
            if len(covered) < len(space):
                missing = [space.state(i) for i in space.indices() if i not in covered]
                raise FeasibilityError(f"Choice guards do not cover states {missing}")
            options = [Seq.of(*(body(child) or [star])) for child in shape.children]
            return [Choice(*options)]
        raise RuleApplicabilityError(f"No sequential rule applies to a {shape.kind.value} node")

    parts = body(es.shape)
    term = Seq.of(star, *parts)
    logger.debug(f"Interleaved {rely!r} through {len(parts)} steps of {es!r}")
    return term


def check_quintuple(q: Quintuple, threads: Sequence[Quintuple] = ()) -> Verdict:
    """
    Decide ⦃P R⦄ E ⦃G Q⦄.

    A sequential component is checked through ``interleave_rely``. A
    component built with ‖ needs its per-thread quintuples in ``threads``;
    they are checked one by one and combined with ``compose_concurrent``.
    """
    if q.component.shape is not None and q.component.shape.kind == ShapeKind.PAR:
        if not threads:
            raise RuleApplicabilityError("Concurrent component needs per-thread quintuples")
        return _check_concurrent(q, threads)

    pre = q.pre
    bound = Seq(Atom(pre), interleave_rely(q.rely, q.component))
    failure = term_refinement_failure(bound, q.post, sorted(pre.domain()))
    guarantee_holds = check_guarantee(q.component, q.guar.base)
    verdict = Verdict(
        valid=failure is None and guarantee_holds,
        refinement_holds=failure is None,
        guarantee_holds=guarantee_holds,
        bound=bound,
    )
    if failure is not None:
        verdict = replace(
            verdict,
            failing_state=pre.space.state(failure.state),
            violated=failure.halfspace,
            minimum=failure.minimum,
            failing_vertex=failure.vertex,
        )
    logger.info(f"Quintuple {q.name or q.component!r}: {verdict.describe()}")
    return verdict


def _check_concurrent(q: Quintuple, threads: Sequence[Quintuple]) -> Verdict:
    combined = threads[0]
    for thread in threads[1:]:
        combined = compose_concurrent(combined, thread)
    if equal_up_to_renaming(q.component, combined.component) is None:
        raise RuleApplicabilityError(
            "The component is not the parallel composition of the thread components"
        )
    if not (q.pre is combined.pre or q.pre == combined.pre):
        raise RuleApplicabilityError("The pre-condition is not the threads' shared pre-condition")
    verdicts = [check_quintuple(t) for t in threads]
    matching = [i for i, t in enumerate(threads) if t.post is q.post or t.post == q.post]
    if not matching:
        raise RuleApplicabilityError("The post-condition is not the post of any thread quintuple")
    chosen = verdicts[matching[0]]
    rely_ok = refines_H(q.rely.base, combined.rely.base)
    guarantee_holds = all(v.guarantee_holds for v in verdicts) and refines_H(
        combined.guar.base, q.guar.base
    )
    refinement_holds = all(v.refinement_holds for v in verdicts) and rely_ok
    return replace(
        chosen,
        valid=refinement_holds and guarantee_holds,
        refinement_holds=refinement_holds,
        guarantee_holds=guarantee_holds,
    )


def rely_intersection(r1: ConvexProgram, r2: ConvexProgram) -> ConvexProgram:
    """
    Pointwise intersection r1 ∩ r2.

    States where the sets are disjoint become EMPTY and are logged.

    Raises:
        EmptySetError: the intersection is empty at every state
    """
    r1.require_program("rely_intersection")
    r2.require_program("rely_intersection")
    r1.space.check_same(r2.space)
    if r1 is r2:
        return r1
    entries: list[Entry] = []
    for index in r1.space.indices():
        left, right = r1.at(index), r2.at(index)
        assert left is not None and right is not None
        entries.append(intersect(left, right))
    empty = [r1.space.state(i) for i, e in enumerate(entries) if e is None]
    if len(empty) == len(entries):
        raise EmptySetError("Rely intersection is empty at every state")
    if empty:
        logger.warning(f"Rely intersection is empty at states {empty}")
    name = f"{r1.name}∩{r2.name}" if r1.name and r2.name else ""
    return ConvexProgram(r1.space, entries, name=name)


def compose_concurrent(
    q1: Quintuple,
    q2: Quintuple,
    rely: RelyCondition | None = None,
    symmetric: bool = False,
    depth: int = 2,
) -> Quintuple:
    """
    ⦃P r₁*⦄ E₁ ⦃g₁* Q₁⦄ and ⦃P r₂*⦄ E₂ ⦃g₂* Q₂⦄ give
    ⦃P (r₁∩r₂)*⦄ E₁‖E₂ ⦃(g₁+g₂)* Q₁⦄, provided g₁ ⊑ r₂ and g₂ ⊑ r₁.

    Args:
        q1: First thread quintuple
        q2: Second thread quintuple
        rely: Explicit combined rely R″ instead of the intersection; R″* must
            be simulated by both r₁* and r₂* (checked at ``depth``)
        symmetric: Post Q₂ instead of Q₁
        depth: Unfolding depth for the simulation side conditions of ``rely``

    Raises:
        SideConditionError: a guarantee is not below the other rely, or R″
            fails its simulation side conditions
        InfeasibleRelyError: r₁ ∩ r₂ is empty at some state
    """
    if not refines_H(q1.guar.base, q2.rely.base):
        raise SideConditionError(
            f"Side condition g₁ ⊑ r₂ fails: {q1.guar!r} is not below {q2.rely!r}"
        )
    if not refines_H(q2.guar.base, q1.rely.base):
        raise SideConditionError(
            f"Side condition g₂ ⊑ r₁ fails: {q2.guar!r} is not below {q1.rely!r}"
        )
    if not (q1.pre is q2.pre or q1.pre == q2.pre):
        raise SideConditionError("Thread quintuples must share their pre-condition")

    if rely is None:
        try:
            base = rely_intersection(q1.rely.base, q2.rely.base)
        except EmptySetError as exc:
            raise InfeasibleRelyError(str(exc)) from exc
        if not base.is_total:
            empty = [base.space.state(i) for i in base.space.indices() if base.at(i) is None]
            raise InfeasibleRelyError(f"r₁ ∩ r₂ is empty at states {empty}")
        if base is q1.rely.base:
            combined_rely = q1.rely
        else:
            combined_rely = RelyCondition(base, name=f"{q1.rely.name}∩{q2.rely.name}")
    else:
        supply = EventSupply(start=90_000)
        for side in (q1.rely, q2.rely):
            lower = rely.star_structure(depth, supply)
            upper = side.star_structure(depth, supply)
            if not find_t_simulation(lower, upper).found:
                raise SideConditionError(
                    f"R″ = {rely!r} is not simulated by {side!r} at depth {depth}"
                )
        combined_rely = rely

    guar_base = ndet_choice(q1.guar.base, q2.guar.base)
    combined_guar = q1.guar if guar_base is q1.guar.base else RelyCondition(guar_base)
    component = par(q1.component, q2.component)
    post = q2.post if symmetric else q1.post
    logger.info(f"Composed {q1.name or 'q1'} ‖ {q2.name or 'q2'} under {combined_rely!r}")
    return Quintuple(
        pre=q1.pre,
        rely=combined_rely,
        component=component,
        guar=combined_guar,
        post=post,
        name=f"{q1.name}‖{q2.name}" if q1.name and q2.name else "",
    )


def check_by_semantics(q: Quintuple, depth: int) -> bool:
    """
    Independent check of P·(R‖E) ⊑ Q: the full semantics of the bounded
    structure r*‖E (rely unfolded to ``depth``) at every state where the
    test P holds. Only for small instances.
    """
    if not q.pre.is_subidentity:
        raise RuleApplicabilityError("Semantic cross-check needs a test pre-condition")
    structure = par(q.rely.star_structure(depth), q.component)
    evaluator = SemanticsEvaluator(structure)
    for index in sorted(q.pre.domain()):
        state = q.pre.space.state(index)
        outer = q.post.at(index)
        if outer is None:
            return False
        if not set_refines(semantics(structure, state, evaluator=evaluator), outer):
            logger.debug(f"Bounded semantics escapes the post at {state!r}")
            return False
    return True
