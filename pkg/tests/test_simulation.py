"""Tests for t-simulation search and the simulation laws."""
import pytest

from prg_verify.events.builders import atomic, choice, fresh_copy, par, seq, unit
from prg_verify.events.traces import maximal_traces, traces
from prg_verify.models.program import ConvexProgram
from prg_verify.simulation.laws import check_law_suite, check_rely_laws, rely_star
from prg_verify.simulation.search import (
    check_t_simulation,
    compose_simulations,
    find_t_simulation,
    is_weakly_maximal,
    simulation_equivalent,
)


class TestFindSimulation:
    """Tests for the simulation search."""

    def test_into_wider_choice(self, a, b, supply):
        wider = choice(fresh_copy(a, supply), b, supply)
        result = find_t_simulation(a, wider)
        assert result.found
        assert check_t_simulation(a, wider, result.mapping).valid
        assert set(result.mapping) == set(traces(a))

    def test_no_simulation_into_narrower(self, a, b, supply):
        result = find_t_simulation(choice(a, b, supply), fresh_copy(a, supply))
        assert not result.found
        assert result.exhausted

    def test_stutter_absorbed(self, space, a, supply):
        """A δ step before a is absorbed by the image."""
        stuttering = seq(atomic(ConvexProgram.identity(space), supply=supply), a, supply)
        target = fresh_copy(a, supply)
        result = find_t_simulation(stuttering, target)
        assert result.found
        first = stuttering.initial_events[0]
        assert result.mapping[(first,)] == ()

    def test_label_refinement_required(self, a, b, supply):
        assert not find_t_simulation(a, b).found

    def test_choice_label_simulated(self, space, to_zero, to_one, supply):
        """An atom whose label refines the other's label is simulated by it."""
        narrow = atomic(to_zero, supply=supply)
        either = ConvexProgram.from_mapping(
            space, {s: [*to_zero[s].vertices, *to_one[s].vertices] for s in space}
        )
        wide = atomic(either, supply=supply)
        assert find_t_simulation(narrow, wide).found
        assert not find_t_simulation(wide, narrow).found

    def test_par_commutes(self, a, b, supply):
        swapped = par(fresh_copy(b, supply), fresh_copy(a, supply), supply)
        assert simulation_equivalent(par(a, b, supply), swapped)

    def test_composition(self, a, b, supply):
        wider = choice(fresh_copy(a, supply), b, supply)
        widest = choice(wider, atomic(ConvexProgram.identity(a.space), supply=supply), supply)
        first = find_t_simulation(a, wider).mapping
        second = find_t_simulation(wider, widest).mapping
        composed = compose_simulations(first, second)
        assert check_t_simulation(a, widest, composed).valid

    def test_broken_mapping_detected(self, a, b, supply):
        wider = choice(fresh_copy(a, supply), b, supply)
        check = check_t_simulation(a, wider, {(): ()})
        assert not check.valid

    def test_weak_maximality(self, space, a, supply):
        """A trailing δ step may be skipped."""
        padded = seq(a, unit(space, supply), supply)
        (first,) = a.events
        assert is_weakly_maximal((first,), padded)
        assert not is_weakly_maximal((), padded)


class TestLawSuites:
    """Tests for the packaged law suites."""

    def test_structural_laws(self):
        report = check_law_suite(samples=5, seed=2)
        assert report.passed, [c.law for c in report.failures()]
        assert "E‖F ≅ F‖E" in {c.law for c in report.checks}

    def test_rely_star_shape(self, space, up):
        star = rely_star(up, 2)
        assert sorted(len(t) for t in maximal_traces(star)) == [1, 2, 3]

    @pytest.mark.slow
    def test_rely_laws(self, space, up, to_zero, supply):
        component = atomic(to_zero, "e", supply)
        report = check_rely_laws(up, to_zero, component, depth=1)
        assert report.passed, [c.law for c in report.failures()]

    @pytest.mark.slow
    def test_structural_laws_full(self):
        assert check_law_suite(samples=50, seed=0).passed
