"""Law suites for t-simulation: congruence, unfolding and rely interleaving."""
from __future__ import annotations

import logging

from prg_verify.events.builders import (
    EventSupply,
    atomic,
    choice,
    fresh_copy,
    par,
    seq,
    star_unfold,
    unit,
)
from prg_verify.events.sampling import StructureSampler
from prg_verify.events.traces import equal_up_to_renaming, is_feasible
from prg_verify.models.event_structure import IpBes
from prg_verify.models.program import ConvexProgram
from prg_verify.models.reports import LawReport
from prg_verify.scheduling.semantics import refines_seq
from prg_verify.semantics.operations import negate_test
from prg_verify.simulation.search import (
    check_t_simulation,
    compose_simulations,
    find_t_simulation,
)

logger = logging.getLogger(__name__)


def _sound(report: LawReport, law: str, lhs: IpBes, rhs: IpBes, tag: str) -> bool:
    """Record the simulation, its re-check and the refinement it implies."""
    result = find_t_simulation(lhs, rhs)
    report.check(f"{law} [simulation]").record(result.found, tag)
    if result.mapping is None:
        return False
    recheck = check_t_simulation(lhs, rhs, result.mapping)
    report.check(f"{law} [witness re-check]").record(recheck.valid, tag)
    if is_feasible(lhs) and is_feasible(rhs):
        report.check(f"{law} [refinement]").record(refines_seq(lhs, rhs), tag)
    return True


def check_law_suite(samples: int = 50, seed: int = 0, max_states: int = 2) -> LawReport:
    """
    Structural laws (commutativity, associativity, unfolding) up to renaming,
    and the congruence of simulation under ·, + and ‖ contexts.

    Simulating pairs are drawn as (E, E) and (E, E + H). Every witness found
    is re-checked independently, and its refinement consequence verified.
    """
    sampler = StructureSampler(seed, max_vertices=2)
    supply = sampler.supply
    report = LawReport()

    for number in range(samples):
        space = sampler.space(max_states)
        e = sampler.structure(space, 3)
        f = sampler.structure(space, 2)
        g = sampler.structure(space, 2)
        tag = f"sample {number}"

        report.check("E‖F ≅ F‖E").record(
            equal_up_to_renaming(par(e, f, supply), par(f, e, supply)) is not None, tag
        )
        left_nested = par(par(e, f, supply), g, supply)
        right_nested = par(e, par(f, g, supply), supply)
        report.check("(E‖F)‖G ≅ E‖(F‖G)").record(
            equal_up_to_renaming(left_nested, right_nested) is not None, tag
        )
        report.check("E+F ≅ F+E").record(
            equal_up_to_renaming(choice(e, f, supply), choice(f, e, supply)) is not None, tag
        )
        for depth in (1, 2):
            unfolded = star_unfold(e, f, depth + 1, supply)
            expanded = choice(f, seq(e, star_unfold(e, f, depth, supply), supply), supply)
            report.check("unfold").record(
                equal_up_to_renaming(unfolded, expanded) is not None, f"{tag}, depth {depth}"
            )

        wider = choice(e, f, supply)
        for lhs, rhs in ((e, fresh_copy(e, supply)), (e, wider)):
            if not _sound(report, "E ≼ F", lhs, rhs, tag):
                continue
            _sound(report, "G·E ≼ G·F", seq(g, lhs, supply), seq(g, rhs, supply), tag)
            _sound(report, "G+E ≼ G+F", choice(g, lhs, supply), choice(g, rhs, supply), tag)
            _sound(report, "E‖G ≼ F‖G", par(lhs, g, supply), par(rhs, g, supply), tag)

        widest = choice(wider, g, supply)
        first = find_t_simulation(e, wider).mapping
        second = find_t_simulation(wider, widest).mapping
        if first is not None and second is not None:
            composed = compose_simulations(first, second)
            report.check("≼ transitive").record(check_t_simulation(e, widest, composed).valid, tag)

    logger.info(f"Simulation law suite: {samples} samples, {len(report.failures())} failing laws")
    return report


def rely_star(r: ConvexProgram, depth: int, supply: EventSupply | None = None) -> IpBes:
    """r* at bounded depth: the unfolding of r*·1."""
    return star_unfold(atomic(r, supply=supply), unit(r.space, supply), depth, supply)


def check_rely_laws(
    r: ConvexProgram,
    r2: ConvexProgram,
    e: IpBes,
    depth: int,
    guard: ConvexProgram | None = None,
) -> LawReport:
    """
    Rely interleaving laws at bounded depth, each checked by simulation
    search left to right and by the refinement that simulation implies.

    Args:
        r: Rely action
        r2: Environment-independent atomic action r′
        e: Component for the conditional and prefix forms
        depth: Star unfolding depth on the left (the right side uses enough
            depth to absorb every interleaving)
        guard: Test b of the conditional form; defaults to "state is the first of Ω"
    """
    r.require_program("check_rely_laws")
    r2.require_program("check_rely_laws")
    supply = EventSupply(start=50_000)
    space = r.space
    report = LawReport()
    tag = f"depth {depth}"

    def star(d: int) -> IpBes:
        return rely_star(r, d, supply)

    def star_then(continuation: IpBes) -> IpBes:
        return star_unfold(atomic(r, supply=supply), continuation, depth, supply)

    _sound(report, "r*‖r* ≼ r*", par(star(depth), star(depth), supply), star(2 * depth), tag)

    _sound(
        report,
        "r*‖r′ ≼ r*(r′·r*)",
        par(star(depth), atomic(r2, supply=supply), supply),
        star_then(seq(atomic(r2, supply=supply), star(depth), supply)),
        tag,
    )

    b = guard if guard is not None else ConvexProgram.test(space, [space.state(0)], name="b")
    c = negate_test(b)
    e1, e2 = fresh_copy(e, supply), fresh_copy(e, supply)
    branches = choice(
        seq(atomic(b, supply=supply), e1, supply), seq(atomic(c, supply=supply), e2, supply), supply
    )
    guarded = choice(
        seq(atomic(b, supply=supply), par(star(depth), fresh_copy(e, supply), supply), supply),
        seq(atomic(c, supply=supply), par(star(depth), fresh_copy(e, supply), supply), supply),
        supply,
    )
    _sound(
        report,
        "r*‖(b·E + c·F) ≼ r*(b·(r*‖E) + c·(r*‖F))",
        par(star(depth), branches, supply),
        star_then(guarded),
        tag,
    )

    _sound(
        report,
        "r*‖(r′·E) ≼ r*(r′·(r*‖E))",
        par(star(depth), seq(atomic(r2, supply=supply), fresh_copy(e, supply), supply), supply),
        star_then(
            seq(atomic(r2, supply=supply), par(star(depth), fresh_copy(e, supply), supply), supply)
        ),
        tag,
    )

    logger.info(f"Rely laws at depth {depth}: {len(report.failures())} failing checks")
    return report
