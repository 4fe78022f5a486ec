"""Tests for event-structure construction, traces and validation."""
import pytest

from prg_verify.errors import DomainError, TraceExplosionError
from prg_verify.events.builders import (
    atomic,
    choice,
    fresh_copy,
    par,
    par_all,
    seq,
    seq_all,
    star_unfold,
    unit,
    zero,
)
from prg_verify.events.traces import (
    configurations,
    equal_up_to_renaming,
    feasibility_gap,
    is_feasible,
    maximal_traces,
    restrict,
    traces,
)
from prg_verify.events.validation import ViolationKind, validate
from prg_verify.models.event_structure import IpBes, ShapeKind
from prg_verify.semantics.operations import negate_test


def only(es):
    (event,) = es.events
    return event


class TestBuilders:
    """Tests for the regular operations."""

    def test_seq_orders_events(self, a, b):
        both = seq(a, b)
        assert maximal_traces(both) == [(only(a), only(b))]
        assert both.shape.kind == ShapeKind.SEQ

    def test_choice_conflicts(self, a, b):
        either = choice(a, b)
        assert sorted(maximal_traces(either)) == [(only(a),), (only(b),)]
        assert either.in_conflict(only(a), only(b))

    def test_par_interleaves(self, a, b):
        both = par(a, b)
        assert sorted(maximal_traces(both)) == [(only(a), only(b)), (only(b), only(a))]
        assert not both.conflict

    def test_zero_is_unit(self, space, a):
        assert seq(zero(space), a) is a
        assert choice(a, zero(space)) is a
        assert zero(space).is_zero

    def test_overlapping_operands_renamed(self, a, supply):
        """Reusing a structure on both sides draws a fresh copy."""
        doubled = seq(a, a, supply)
        assert len(doubled.events) == 2
        assert len(maximal_traces(doubled)) == 1

    def test_fresh_copy_is_isomorphic(self, a, b, supply):
        original = seq(a, choice(b, fresh_copy(a, supply), supply), supply)
        copy = fresh_copy(original, supply)
        assert not set(copy.events) & set(original.events)
        assert equal_up_to_renaming(original, copy) is not None

    def test_star_unfold(self, space, a, supply):
        """Depth 2 of F, F + E·F, … has traces F, E·F and E·E·F."""
        loop = star_unfold(a, unit(space, supply), 2, supply)
        assert len(loop.events) == 5
        assert sorted(len(t) for t in maximal_traces(loop)) == [1, 2, 3]

    def test_star_depth_checked(self, space, a, supply):
        with pytest.raises(DomainError):
            star_unfold(a, unit(space, supply), -1, supply)

    def test_seq_all_and_par_all(self, to_zero, supply):
        parts = [atomic(to_zero, f"u{k}", supply) for k in range(3)]
        assert len(maximal_traces(seq_all(parts, supply))) == 1
        assert len(maximal_traces(par_all(parts, supply))) == 6
        with pytest.raises(DomainError):
            par_all([], supply)

    def test_labels_named(self, a):
        assert a.label_name(only(a)) == "a"


class TestTraces:
    """Tests for trace enumeration."""

    def test_prefix_closed(self, a, b):
        found = traces(seq(a, b))
        assert found == [(), (only(a),), (only(a), only(b))]

    def test_configurations(self, a, b):
        assert len(configurations(par(a, b))) == 4

    def test_restrict(self):
        assert restrict((1, 2, 3, 4), [2, 4]) == (2, 4)

    def test_cap(self, to_zero, supply):
        many = par_all([atomic(to_zero, supply=supply) for _ in range(6)], supply)
        with pytest.raises(TraceExplosionError) as info:
            traces(many, cap=100)
        assert info.value.partial_count == 100

    def test_feasibility_gap(self, a, guard_zero, supply):
        """A lone guard leaves the states where it fails uncovered."""
        guarded = seq(a, atomic(guard_zero, "zero", supply), supply)
        gap = feasibility_gap(guarded)
        assert gap is not None
        assert gap.missing == (1, 2)
        assert not is_feasible(guarded)

    def test_guard_pair_feasible(self, guard_zero, supply):
        negated = atomic(negate_test(guard_zero), supply=supply)
        branches = choice(atomic(guard_zero, supply=supply), negated, supply)
        assert is_feasible(branches)


class TestValidation:
    """Tests for well-formedness checks."""

    def test_built_structures_are_valid(self, a, b, supply):
        for es in (seq(a, b), choice(a, b), par(a, b), star_unfold(a, b, 2, supply)):
            assert validate(es).valid

    def test_asymmetric_conflict(self, space, to_zero, to_one):
        es = IpBes.build(space, {0: to_zero, 1: to_one}, conflicts=[(0, 1)], symmetric=False)
        report = validate(es)
        assert not report.valid
        assert report.violations[0].kind == ViolationKind.ASYMMETRIC_CONFLICT

    def test_concurrent_bundle_sources(self, space, to_zero, to_one):
        es = IpBes.build(space, {0: to_zero, 1: to_zero, 2: to_one}, bundles=[([0, 1], 2)])
        kinds = {v.kind for v in validate(es).violations}
        assert ViolationKind.BUNDLE_NOT_CONFLICTING in kinds

    def test_bundle_cycle(self, space, to_zero):
        es = IpBes.build(space, {0: to_zero, 1: to_zero}, bundles=[([0], 1), ([1], 0)])
        report = validate(es)
        assert ViolationKind.CYCLIC_BUNDLES in {v.kind for v in report.violations}

    def test_unknown_event(self, space, to_zero):
        es = IpBes.build(space, {0: to_zero}, finals=[[0, 9]])
        assert ViolationKind.UNKNOWN_EVENT in {v.kind for v in validate(es).violations}

    def test_report_serializes(self, a, b):
        dumped = validate(par(a, b)).model_dump(mode="json")
        assert dumped == {"events": 2, "violations": []}


class TestRenaming:
    """Tests for structural equality up to renaming."""

    def test_commutative_par(self, a, b, supply):
        assert equal_up_to_renaming(par(a, b, supply), par(b, a, supply)) is not None

    def test_different_shapes(self, a, b, supply):
        assert equal_up_to_renaming(seq(a, b, supply), par(a, b, supply)) is None

    def test_labels_matter(self, a, b, supply):
        assert equal_up_to_renaming(seq(a, b, supply), seq(b, a, supply)) is None
