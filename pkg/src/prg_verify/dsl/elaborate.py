"""
Elaboration of parsed terms into event structures.

Each constructor maps to the matching regular operation on ipBES. A
probabilistic choice is only accepted between atomic operands, where it
becomes one event labelled with the mixed program.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping

from prg_verify.dsl.ast import (
    AbortTerm,
    AtomTerm,
    ChoiceTerm,
    IfTerm,
    Module,
    ParTerm,
    PChoiceTerm,
    SeqTerm,
    SkipTerm,
    StarTerm,
    Term,
)
from prg_verify.errors import AtomicityError, ElaborationError, FeasibilityError
from prg_verify.events.builders import (
    EventSupply,
    atomic,
    choice,
    par,
    seq,
    star_unfold,
    unit,
    zero,
)
from prg_verify.events.traces import feasibility_gap
from prg_verify.models.convex import ConvexSet
from prg_verify.models.distribution import Distribution
from prg_verify.models.event_structure import IpBes
from prg_verify.models.program import ConvexProgram, Entry
from prg_verify.models.state_space import StateSpace
from prg_verify.semantics.operations import negate_test, prob_choice

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Declarations:
    """Programs bound to the names of a module."""

    space: StateSpace
    atoms: Mapping[str, ConvexProgram]
    guards: Mapping[str, ConvexProgram]

    def lookup(self, name: str) -> ConvexProgram:
        if name in self.atoms:
            return self.atoms[name]
        if name in self.guards:
            return self.guards[name]
        raise ElaborationError(f"Undeclared name {name!r}")


def build_programs(module: Module) -> Declarations:
    """Tabulate the atom and guard declarations of ``module``."""
    if not module.states:
        raise ElaborationError("Module declares no states")
    space = StateSpace.of(*module.states)

    atoms: dict[str, ConvexProgram] = {}
    for decl in module.atoms:
        table: dict[Hashable, Entry] = {}
        for source, vertices in decl.rows:
            points = [_distribution(space, vertex) for vertex in vertices]
            table[source] = ConvexSet.from_points(space, points)
        atoms[decl.name] = ConvexProgram.from_mapping(space, table, name=decl.name)

    guards = {g.name: ConvexProgram.test(space, g.states, name=g.name) for g in module.guards}
    overlap = set(atoms) & set(guards)
    if overlap:
        raise ElaborationError(f"Names declared both as atom and guard: {sorted(overlap)}")
    logger.debug(f"Declared {len(atoms)} atoms and {len(guards)} guards over {len(space)} states")
    return Declarations(space, atoms, guards)


def _distribution(space: StateSpace, vertex: tuple[tuple[Hashable, Fraction], ...]) -> Distribution:
    weights: dict[Hashable, Fraction] = {}
    for state, weight in vertex:
        weights[state] = weights.get(state, Fraction(0)) + weight
    return Distribution.from_weights(space, weights)


def atomic_program(term: Term, decls: Declarations) -> ConvexProgram:
    """
    The single program a term denotes when it is atomic.

    Raises:
        AtomicityError: the term is not an atom, skip, or a probabilistic
            choice of those
    """
    if isinstance(term, SkipTerm):
        return ConvexProgram.identity(decls.space)
    if isinstance(term, AtomTerm):
        if term.name in decls.guards:
            raise AtomicityError(
                f"Guard {term.name!r} cannot be an operand of a probabilistic choice; use if"
            )
        return decls.lookup(term.name)
    if isinstance(term, PChoiceTerm):
        left = atomic_program(term.left, decls)
        right = atomic_program(term.right, decls)
        return prob_choice(left, right, term.p)
    where = f" at {term.pos}" if term.pos is not None else ""
    raise AtomicityError(
        f"Probabilistic choice needs atomic operands{where}; "
        "split non-atomic branches with if instead"
    )


def elaborate(
    term: Term,
    decls: Module | Declarations,
    supply: EventSupply | None = None,
    check_feasible: bool = True,
) -> IpBes:
    """
    Translate ``term`` into an ipBES.

    Args:
        term: Parsed term
        decls: A parsed module, or its already built declarations
        supply: Event supply for fresh identifiers
        check_feasible: Reject structures where some reachable choice of
            guarded events leaves a state without a defined action

    Raises:
        AtomicityError: probabilistic choice over non-atomic operands
        FeasibilityError: the resulting structure is infeasible
    """
    declarations = build_programs(decls) if isinstance(decls, Module) else decls
    source = supply if supply is not None else EventSupply()
    result = _elaborate(term, declarations, source)
    if check_feasible and not result.is_zero:
        gap = feasibility_gap(result)
        if gap is not None:
            states = [declarations.space.state(i) for i in gap.missing]
            raise FeasibilityError(f"No enabled action is defined at states {states}")
    logger.debug(f"Elaborated term into {len(result.events)} events")
    return result


def _elaborate(term: Term, decls: Declarations, supply: EventSupply) -> IpBes:
    space = decls.space
    if isinstance(term, SkipTerm):
        return unit(space, supply)
    if isinstance(term, AbortTerm):
        return zero(space)
    if isinstance(term, AtomTerm):
        return atomic(decls.lookup(term.name), supply=supply)
    if isinstance(term, PChoiceTerm):
        return atomic(atomic_program(term, decls), supply=supply)
    if isinstance(term, SeqTerm):
        return seq(*_operands(term, decls, supply), supply)
    if isinstance(term, ChoiceTerm):
        return choice(*_operands(term, decls, supply), supply)
    if isinstance(term, ParTerm):
        return par(*_operands(term, decls, supply), supply)
    if isinstance(term, IfTerm):
        if term.guard not in decls.guards:
            raise ElaborationError(f"{term.guard!r} is not a guard")
        b = decls.guards[term.guard]
        then = seq(atomic(b, supply=supply), _elaborate(term.then, decls, supply), supply)
        orelse = seq(
            atomic(negate_test(b), supply=supply), _elaborate(term.orelse, decls, supply), supply
        )
        return choice(then, orelse, supply)
    if isinstance(term, StarTerm):
        body = _elaborate(term.body, decls, supply)
        exit_ = _elaborate(term.exit, decls, supply)
        return star_unfold(body, exit_, term.depth, supply)
    raise ElaborationError(f"Unknown term {term!r}")


def _operands(
    term: SeqTerm | ChoiceTerm | ParTerm, decls: Declarations, supply: EventSupply
) -> tuple[IpBes, IpBes]:
    return _elaborate(term.left, decls, supply), _elaborate(term.right, decls, supply)
