"""Property tests for the algebraic laws of convex programs."""
import pytest
from hypothesis import given, settings, strategies as st

from prg_verify.models.program import ConvexProgram
from prg_verify.semantics.axioms import ProgramSampler, axiom_suite, transitive_closure
from prg_verify.semantics.operations import (
    is_transitive,
    kleene_star,
    ndet_choice,
    refines_H,
    seq_compose,
)

seeds = st.integers(min_value=0, max_value=100_000)


def triple(seed):
    return next(ProgramSampler(seed).triples(1, max_states=3))


class TestSemiringLaws:
    """Laws every sampled triple must satisfy."""

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_choice_laws(self, seed):
        x, y, z = triple(seed)
        assert ndet_choice(x, x) == x
        assert ndet_choice(x, y) == ndet_choice(y, x)
        assert ndet_choice(ndet_choice(x, y), z) == ndet_choice(x, ndet_choice(y, z))

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_composition_laws(self, seed):
        x, y, z = triple(seed)
        delta = ConvexProgram.identity(x.space)
        assert seq_compose(seq_compose(x, y), z) == seq_compose(x, seq_compose(y, z))
        assert seq_compose(delta, x) == x
        assert seq_compose(x, delta) == x

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_distributivity(self, seed):
        """Right distributivity holds exactly; left distributivity only as ⊑."""
        x, y, z = triple(seed)
        right = ndet_choice(seq_compose(x, z), seq_compose(y, z))
        assert seq_compose(ndet_choice(x, y), z) == right
        left = ndet_choice(seq_compose(x, y), seq_compose(x, z))
        assert refines_H(left, seq_compose(x, ndet_choice(y, z)))

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_star_unfolds(self, seed):
        sampler = ProgramSampler(seed)
        space = sampler.space(3)
        walk = sampler.relation_closure(space)
        y = sampler.program(space)
        star = kleene_star(walk, y)
        assert star == ndet_choice(y, seq_compose(walk, star))

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_transitive_closure_star(self, seed):
        sampler = ProgramSampler(seed)
        space = sampler.space(3)
        closure = sampler.transitive_closure(space)
        delta = ConvexProgram.identity(space)
        assert is_transitive(closure)
        assert kleene_star(closure, delta) == ndet_choice(delta, closure)


class TestTransitiveClosure:
    """Tests for the relation helper."""

    def test_closure_adds_paths(self):
        assert transitive_closure({(0, 1), (1, 2)}) == {(0, 1), (1, 2), (0, 2)}

    def test_closure_idempotent(self):
        closed = transitive_closure({(0, 1), (1, 0)})
        assert transitive_closure(closed) == closed


class TestAxiomSuite:
    """Tests for the packaged law report."""

    def test_small_suite_passes(self):
        report = axiom_suite(samples=20, seed=3)
        assert report.passed, [c.law for c in report.failures()]
        assert report.samples == 20
        assert "sub-distributivity" in {c.law for c in report.checks}

    def test_suite_is_reproducible(self):
        first = axiom_suite(samples=10, seed=11)
        second = axiom_suite(samples=10, seed=11)
        assert first.strict_subdistributivity == second.strict_subdistributivity

    @pytest.mark.slow
    def test_full_suite(self):
        report = axiom_suite(samples=500, seed=0)
        assert report.passed
        assert all(check.checked == 500 for check in report.checks)
