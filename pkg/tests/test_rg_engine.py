"""Tests for rely/guarantee conditions and quintuple checking."""
from fractions import Fraction

import pytest

from prg_verify.engine.rely_guarantee import (
    Quintuple,
    RelyCondition,
    check_by_semantics,
    check_guarantee,
    check_quintuple,
    compose_concurrent,
    guarantee_of,
    interleave_rely,
    rely_intersection,
)
from prg_verify.errors import (
    FeasibilityError,
    GuaranteeError,
    InfeasibleRelyError,
    RuleApplicabilityError,
    SideConditionError,
)
from prg_verify.events.builders import atomic, choice, par, seq, zero
from prg_verify.models.convex import ConvexSet, Halfspace
from prg_verify.models.program import ConvexProgram
from prg_verify.semantics.operations import ndet_choice, refines_H
from prg_verify.semantics.terms import Atom


def post_at_least(space, states, bound):
    """μ(states) ≥ bound at every state."""
    entry = ConvexSet.from_halfspaces(space, [Halfspace.at_least(space, states, bound)])
    return ConvexProgram(space, [entry] * len(space), name="post")


def quintuple(component, guar, post, rely=None, pre=None):
    """Quintuple with the δ rely and the δ pre-condition unless given."""
    space = component.space
    return Quintuple(
        pre if pre is not None else ConvexProgram.identity(space),
        rely if rely is not None else RelyCondition.trivial(space),
        component,
        RelyCondition(guar),
        post,
    )


@pytest.fixture
def either(to_zero, to_one):
    return ndet_choice(to_zero, to_one)


@pytest.fixture
def skip(space):
    return ConvexProgram.identity(space)


class TestRelyCondition:
    """Tests for r*."""

    def test_trivial(self, space, skip):
        assert RelyCondition.trivial(space).realized == skip

    def test_transitive_rely(self, up, skip):
        rely = RelyCondition(up, "up")
        assert rely.transitive
        assert refines_H(rely.realized, up) and refines_H(up, rely.realized)

    def test_star_of_step(self, point, step):
        """step* reaches every later state."""
        rely = RelyCondition(step, "step")
        assert not rely.transitive
        assert all(rely.realized.at(0).contains(point(s)) for s in (0, 1, 2))
        assert not rely.realized.at(2).contains(point(0))

    def test_star_structure(self, up, supply):
        structure = RelyCondition(up).star_structure(1, supply)
        assert len(structure.events) == 3


class TestGuarantee:
    """Tests for guarantee extraction and checking."""

    def test_guarantee_of(self, point, a, b):
        g = guarantee_of(seq(a, b))
        assert g.at(2).contains(point(0)) and g.at(2).contains(point(1))
        assert not g.at(2).contains(point(2))

    def test_guarantee_of_empty(self, space):
        with pytest.raises(GuaranteeError):
            guarantee_of(zero(space))

    def test_check_guarantee(self, a, b, to_zero):
        both = seq(a, b)
        assert check_guarantee(both, guarantee_of(both))
        assert not check_guarantee(both, to_zero)

    def test_stutter_allowed(self, skip, to_zero, supply):
        assert check_guarantee(atomic(skip, supply=supply), to_zero)


class TestInterleaveRely:
    """Tests for the sequential bound of r*‖E."""

    def test_trivial_rely(self, space, point, a, b):
        term = interleave_rely(RelyCondition.trivial(space), seq(a, b))
        assert term.evaluate().at(0).vertices == (point(1),)

    def test_rely_after_action(self, point, up, a):
        term = interleave_rely(RelyCondition(up), a)
        assert set(term.evaluate().at(0).vertices) == {point(0), point(1), point(2)}

    def test_parallel_rejected(self, space, a, b):
        with pytest.raises(RuleApplicabilityError):
            interleave_rely(RelyCondition.trivial(space), par(a, b))

    def test_empty_rejected(self, space):
        with pytest.raises(RuleApplicabilityError):
            interleave_rely(RelyCondition.trivial(space), zero(space))

    def test_uncovered_guards(self, space, guard_zero, supply):
        both = choice(atomic(guard_zero, supply=supply), atomic(guard_zero, supply=supply), supply)
        with pytest.raises(FeasibilityError):
            interleave_rely(RelyCondition.trivial(space), both)


class TestCheckQuintuple:
    """Tests for deciding ⦃P R⦄ E ⦃G Q⦄."""

    def test_valid(self, space, to_zero, a):
        verdict = check_quintuple(quintuple(a, to_zero, post_at_least(space, [0], 1)))
        assert verdict.valid
        assert verdict.describe() == "VALID"

    def test_interfering_rely(self, space, up, to_zero, a):
        q = quintuple(a, to_zero, post_at_least(space, [0], 1), rely=RelyCondition(up))
        verdict = check_quintuple(q)
        assert not verdict.refinement_holds
        assert verdict.guarantee_holds
        assert verdict.failing_state == 0
        assert verdict.minimum == 0
        assert verdict.describe().startswith("INVALID")

    def test_guarantee_violated(self, space, to_one, a):
        verdict = check_quintuple(quintuple(a, to_one, post_at_least(space, [0], 1)))
        assert verdict.refinement_holds
        assert not verdict.guarantee_holds
        assert "guarantee" in verdict.describe()

    def test_pre_restricts_states(self, space, guard_zero, step, supply):
        component = atomic(step, supply=supply)
        post = post_at_least(space, [1], 1)
        assert check_quintuple(quintuple(component, step, post, pre=guard_zero)).valid
        assert check_quintuple(quintuple(component, step, post)).failing_state == 1

    def test_probabilistic_post(self, space, coin, supply):
        component = atomic(coin, supply=supply)
        half = quintuple(component, coin, post_at_least(space, [0], Fraction(1, 2)))
        assert check_quintuple(half).valid
        more = quintuple(component, coin, post_at_least(space, [0], Fraction(3, 4)))
        verdict = check_quintuple(more)
        assert not verdict.valid
        assert verdict.minimum == Fraction(1, 2)

    def test_bound_starts_with_pre(self, space, to_zero, a):
        bound = check_quintuple(quintuple(a, to_zero, post_at_least(space, [0], 1))).bound
        assert isinstance(bound.first, Atom)

    def test_concurrent_needs_threads(self, space, a, b, to_zero):
        q = quintuple(par(a, b), to_zero, post_at_least(space, [0], 1))
        with pytest.raises(RuleApplicabilityError):
            check_quintuple(q)

    def test_concurrent_with_threads(self, space, skip, either, to_zero, to_one, a, b, supply):
        rely = RelyCondition(either, "either")
        post = post_at_least(space, [0, 1], 1)
        first = Quintuple(skip, rely, a, RelyCondition(to_zero), post, name="first")
        second = Quintuple(skip, rely, b, RelyCondition(to_one), post, name="second")
        whole = Quintuple(skip, rely, par(a, b, supply), RelyCondition(either), post)
        assert check_quintuple(whole, threads=[first, second]).valid

    def test_concurrent_component_mismatch(
        self, space, skip, either, to_zero, to_one, to_two, a, b, supply
    ):
        """The component must be the parallel composition of the thread components."""
        rely = RelyCondition(either, "either")
        post = post_at_least(space, [0, 1], 1)
        first = Quintuple(skip, rely, a, RelyCondition(to_zero), post, name="first")
        second = Quintuple(skip, rely, b, RelyCondition(to_one), post, name="second")
        other = par(atomic(to_two, supply=supply), atomic(to_two, supply=supply), supply)
        whole = Quintuple(skip, rely, other, RelyCondition(either), post)
        with pytest.raises(RuleApplicabilityError):
            check_quintuple(whole, threads=[first, second])

    def test_concurrent_pre_mismatch(
        self, space, skip, either, guard_zero, to_zero, to_one, a, b, supply
    ):
        rely = RelyCondition(either, "either")
        post = post_at_least(space, [0, 1], 1)
        first = Quintuple(skip, rely, a, RelyCondition(to_zero), post, name="first")
        second = Quintuple(skip, rely, b, RelyCondition(to_one), post, name="second")
        whole = Quintuple(guard_zero, rely, par(a, b, supply), RelyCondition(either), post)
        with pytest.raises(RuleApplicabilityError):
            check_quintuple(whole, threads=[first, second])

    def test_concurrent_failing_thread(self, space, skip, either, to_zero, to_one, a, b, supply):
        """A thread that misses the shared post makes the whole quintuple invalid."""
        rely = RelyCondition(either, "either")
        post = post_at_least(space, [0], 1)
        first = Quintuple(skip, rely, a, RelyCondition(to_zero), post, name="first")
        second = Quintuple(skip, rely, b, RelyCondition(to_one), post, name="second")
        assert not check_quintuple(second).valid
        whole = Quintuple(skip, rely, par(a, b, supply), RelyCondition(either), post)
        assert not check_quintuple(whole, threads=[first, second]).valid

    def test_concurrent_unknown_post(self, space, skip, either, to_zero, to_one, a, b, supply):
        rely = RelyCondition(either, "either")
        post = post_at_least(space, [0, 1], 1)
        first = Quintuple(skip, rely, a, RelyCondition(to_zero), post, name="first")
        second = Quintuple(skip, rely, b, RelyCondition(to_one), post, name="second")
        elsewhere = post_at_least(space, [1, 2], 1)
        whole = Quintuple(skip, rely, par(a, b, supply), RelyCondition(either), elsewhere)
        with pytest.raises(RuleApplicabilityError):
            check_quintuple(whole, threads=[first, second])


class TestComposeConcurrent:
    """Tests for the concurrency rule and its side conditions."""

    def test_compose(self, space, skip, either, to_zero, to_one, a, b):
        rely = RelyCondition(either, "either")
        post = post_at_least(space, [0, 1], 1)
        first = Quintuple(skip, rely, a, RelyCondition(to_zero), post, name="first")
        second = Quintuple(skip, rely, b, RelyCondition(to_one), post, name="second")
        composed = compose_concurrent(first, second)
        assert composed.rely is rely
        assert composed.guar.base == either
        assert composed.post is post
        assert composed.name == "first‖second"
        assert len(composed.component.events) == 2

    def test_symmetric_post(self, space, skip, either, to_zero, to_one, a, b):
        rely = RelyCondition(either)
        q1 = Quintuple(skip, rely, a, RelyCondition(to_zero), post_at_least(space, [0, 1], 1))
        q2 = Quintuple(skip, rely, b, RelyCondition(to_one), post_at_least(space, [0], 0))
        assert compose_concurrent(q1, q2, symmetric=True).post is q2.post

    def test_guarantee_above_rely(self, space, skip, either, to_two, to_one, a, b):
        rely = RelyCondition(either)
        post = post_at_least(space, [0], 0)
        q1 = Quintuple(skip, rely, a, RelyCondition(to_two), post)
        q2 = Quintuple(skip, rely, b, RelyCondition(to_one), post)
        with pytest.raises(SideConditionError):
            compose_concurrent(q1, q2)

    def test_pre_mismatch(self, space, skip, guard_zero, either, to_zero, to_one, a, b):
        rely = RelyCondition(either)
        post = post_at_least(space, [0], 0)
        q1 = Quintuple(skip, rely, a, RelyCondition(to_zero), post)
        q2 = Quintuple(guard_zero, rely, b, RelyCondition(to_one), post)
        with pytest.raises(SideConditionError):
            compose_concurrent(q1, q2)

    def test_disjoint_relies(self, space, skip, to_zero, to_one, a, b):
        post = post_at_least(space, [0], 0)
        q1 = Quintuple(skip, RelyCondition(to_zero), a, RelyCondition(to_one), post)
        q2 = Quintuple(skip, RelyCondition(to_one), b, RelyCondition(to_zero), post)
        with pytest.raises(InfeasibleRelyError):
            compose_concurrent(q1, q2)

    def test_explicit_rely_simulated(self, space, skip, either, to_zero, to_one, a, b):
        rely = RelyCondition(either)
        post = post_at_least(space, [0], 0)
        q1 = Quintuple(skip, rely, a, RelyCondition(to_zero), post)
        q2 = Quintuple(skip, rely, b, RelyCondition(to_one), post)
        narrower = RelyCondition(to_zero, "zero")
        assert compose_concurrent(q1, q2, rely=narrower, depth=1).rely is narrower

    def test_explicit_rely_too_wide(self, space, skip, up, either, to_zero, to_one, a, b):
        rely = RelyCondition(either)
        post = post_at_least(space, [0], 0)
        q1 = Quintuple(skip, rely, a, RelyCondition(to_zero), post)
        q2 = Quintuple(skip, rely, b, RelyCondition(to_one), post)
        with pytest.raises(SideConditionError):
            compose_concurrent(q1, q2, rely=RelyCondition(up), depth=1)


class TestRelyIntersection:
    """Tests for r₁ ∩ r₂."""

    def test_partial_intersection(self, point, up, to_zero):
        meet = rely_intersection(up, to_zero)
        assert meet.at(0).vertices == (point(0),)
        assert meet.at(1) is None
        assert not meet.is_total

    def test_same_rely(self, up):
        assert rely_intersection(up, up) is up

    def test_wide_meets_narrow(self, up, either, point):
        meet = rely_intersection(up, either)
        assert set(meet.at(0).vertices) == {point(0), point(1)}
        assert meet.at(1).vertices == (point(1),)


class TestSemanticCrossCheck:
    """Tests for the bounded semantic check of a quintuple."""

    def test_agrees_with_rule(self, space, either, to_zero, a):
        q = quintuple(a, to_zero, post_at_least(space, [0, 1], 1), rely=RelyCondition(either))
        assert check_quintuple(q).valid
        assert check_by_semantics(q, depth=1)

    def test_detects_interference(self, space, up, to_zero, a):
        q = quintuple(a, to_zero, post_at_least(space, [0], 1), rely=RelyCondition(up))
        assert not check_by_semantics(q, depth=1)

    def test_needs_test_pre(self, space, step, to_zero, a):
        q = quintuple(a, to_zero, post_at_least(space, [0], 1), pre=step)
        with pytest.raises(RuleApplicabilityError):
            check_by_semantics(q, depth=1)
