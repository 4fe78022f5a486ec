"""
Algebra of convex programs: choice, composition, tests, star and refinement.

Every operation works state by state on vertex-form sets. Halfspace-form
entries are converted to vertex form on entry; the lazy terms in
``prg_verify.semantics.terms`` avoid that conversion where it matters.
"""
from __future__ import annotations

import logging
from typing import NamedTuple

from prg_verify.config import settings
from prg_verify.errors import (
    CompositionError,
    FeasibilityError,
    NonTerminationError,
    ProgramKindError,
)
from prg_verify.geometry.hull import set_refines, weighted_sum
from prg_verify.models.convex import ConvexSet, SetForm, extreme_points, in_hull
from prg_verify.models.distribution import Distribution, SubDistribution
from prg_verify.models.program import ConvexProgram, Entry, ProgramKind
from prg_verify.utils.rationals import Rational, as_probability

logger = logging.getLogger(__name__)


class RefinementFailure(NamedTuple):
    """First state at which ``r ⊑_H r2`` fails, with an offending point."""

    state: int
    vertex: SubDistribution | None


def _vertices(entry: ConvexSet) -> tuple[Distribution, ...]:
    return entry.vertex_form(settings.cap).vertices


def _is_bottom(program: ConvexProgram) -> bool:
    return not program.is_lazy and all(e is None for e in program.entries)


def prob_choice(r: ConvexProgram, r2: ConvexProgram, p: Rational) -> ConvexProgram:
    """r ⊕_p r2: state-wise mixtures (1−p)·μ + p·μ′."""
    weight = as_probability(p)
    r.require_program("prob_choice")
    r2.require_program("prob_choice")
    r.space.check_same(r2.space)
    if weight == 0:
        return r
    if weight == 1:
        return r2

    entries: list[Entry] = []
    for index in r.space.indices():
        left, right = r.at(index), r2.at(index)
        assert left is not None and right is not None
        if left == right:
            entries.append(left)
            continue
        points = weighted_sum([(1 - weight, _vertices(left)), (weight, _vertices(right))])
        entries.append(ConvexSet(r.space, SetForm.VERTEX, points))
    return ConvexProgram(r.space, entries, name=f"({r.name} [{weight}] {r2.name})")


def ndet_choice(r: ConvexProgram, r2: ConvexProgram) -> ConvexProgram:
    """r + r2: state-wise convex hull of the union (EMPTY is the unit)."""
    r.space.check_same(r2.space)
    if r is r2:
        return r
    entries: list[Entry] = []
    for index in r.space.indices():
        left, right = r.at(index), r2.at(index)
        if left is None or right is None:
            entries.append(left if right is None else right)
        elif left == right:
            entries.append(left)
        else:
            entries.append(ConvexSet.from_points(r.space, _vertices(left) + _vertices(right)))
    return ConvexProgram(r.space, entries, name=_join(r.name, "+", r2.name))


def seq_compose(r: ConvexProgram, r2: ConvexProgram, strict: bool = True) -> ConvexProgram:
    """
    r·r2: run r, then r2 from wherever r landed.

    Each vertex μ of r(s) is pushed through every vertex selection of r2 on
    the support of μ. ``r2 = ⊥`` gives ⊥.

    Args:
        r: First program; EMPTY entries stay EMPTY
        r2: Second program
        strict: Raise when a vertex of r(s) puts mass on a state where r2 is
            EMPTY. Otherwise such vertices are dropped, which leaves exactly
            the face of r(s) that avoids those states (guarded loop bodies).

    Raises:
        CompositionError: strict mode and r2 a partial test (use guard_then),
            or r2 EMPTY at a reachable state
    """
    r.space.check_same(r2.space)
    if _is_bottom(r2) or _is_bottom(r):
        return ConvexProgram.bottom(r.space)
    if strict and r2.kind == ProgramKind.TEST:
        raise CompositionError(
            f"Right operand {r2.name or r2!r} is a test; guard with guard_then instead"
        )

    entries: list[Entry] = []
    for index in r.space.indices():
        first = r.at(index)
        if first is None:
            entries.append(None)
            continue
        points: list[Distribution] = []
        for mu in _vertices(first):
            targets = [(t, w, r2.at(t)) for t, w in mu.entries]
            dead = [t for t, _, entry in targets if entry is None]
            if dead:
                if strict:
                    raise CompositionError(
                        f"{r2.name or 'right operand'} is EMPTY at state "
                        f"{r.space.state(dead[0])!r}, reachable from {r.space.state(index)!r}"
                    )
                continue
            if len(targets) == 1:
                points.extend(_vertices(targets[0][2]))  # type: ignore[arg-type]
            else:
                parts = [(w, _vertices(e)) for _, w, e in targets]
                points.extend(weighted_sum(parts))  # type: ignore[arg-type]
        if points:
            entries.append(ConvexSet(r.space, SetForm.VERTEX, extreme_points(points)))
        else:
            entries.append(None)
    return ConvexProgram(r.space, entries, name=_join(r.name, "·", r2.name))


def guard_then(b: ConvexProgram, r: ConvexProgram) -> ConvexProgram:
    """b·r for a test b: r where b holds, EMPTY elsewhere."""
    if not b.is_subidentity:
        raise ProgramKindError(f"Guard {b.name or b!r} is not a test")
    b.space.check_same(r.space)
    entries = [r.at(i) if b.at(i) is not None else None for i in b.space.indices()]
    return ConvexProgram(b.space, entries, name=_join(b.name, "·", r.name))


def negate_test(b: ConvexProgram) -> ConvexProgram:
    """¬b: the complementary subidentity."""
    if not b.is_subidentity:
        raise ProgramKindError(f"Guard {b.name or b!r} is not a test")
    failing = [b.space.state(i) for i in b.space.indices() if b.at(i) is None]
    name = f"¬{b.name}" if b.name else ""
    return ConvexProgram.test(b.space, failing, name=name)


def require_total(program: ConvexProgram, what: str = "program") -> ConvexProgram:
    """Reject combinations of guarded branches that leave some state EMPTY."""
    missing = [program.space.state(i) for i in program.space.indices() if program.at(i) is None]
    if missing:
        raise FeasibilityError(f"{what} is undefined at states {missing}")
    return program


def if_then_else(b: ConvexProgram, r: ConvexProgram, r2: ConvexProgram) -> ConvexProgram:
    """b·r + (¬b)·r2."""
    branches = ndet_choice(guard_then(b, r), guard_then(negate_test(b), r2))
    name = f"if {b.name} then {r.name} else {r2.name}"
    return require_total(branches, "conditional").renamed(name)


def kleene_iterate(r: ConvexProgram, r2: ConvexProgram, n: int) -> ConvexProgram:
    """X_n of the chain X_0 = ⊥, X_{k+1} = r2 + r·X_k."""
    current = ConvexProgram.bottom(r.space)
    for _ in range(n):
        current = ndet_choice(r2, seq_compose(r, current, strict=False))
    return current


def kleene_star(
    r: ConvexProgram, r2: ConvexProgram, max_iterations: int | None = None
) -> ConvexProgram:
    """
    r*r2, the least fixed point of X ↦ r2 + r·X.

    Transitive r with r2 = δ reduces to δ + r. Otherwise the Kleene chain
    is iterated until two consecutive iterates coincide.

    Raises:
        NonTerminationError: no stabilization within ``max_iterations``
    """
    limit = max_iterations if max_iterations is not None else settings.star_max_iterations
    identity = ConvexProgram.identity(r.space)
    if r2 == identity and r.is_total and is_transitive(r):
        logger.debug(f"Star of transitive {r.name or 'program'} reduced to δ + r")
        return ndet_choice(identity, r).renamed(f"{r.name}*")

    previous = ConvexProgram.bottom(r.space)
    for step in range(1, limit + 1):
        current = ndet_choice(r2, seq_compose(r, previous, strict=False))
        if current == previous:
            logger.debug(f"Kleene iteration stabilized after {step} steps")
            return current.renamed(f"{r.name}*{r2.name}" if r.name else "")
        previous = current
    raise NonTerminationError(
        f"Kleene iteration did not stabilize within {limit} steps", last_iterate=previous
    )


def refinement_witness(r: ConvexProgram, r2: ConvexProgram) -> RefinementFailure | None:
    """The first violation of r ⊑_H r2, or None when the refinement holds."""
    r.space.check_same(r2.space)
    for index in r.space.indices():
        inner = r.at(index)
        if inner is None:
            continue
        outer = r2.at(index)
        if outer is None:
            return RefinementFailure(index, None)
        if set_refines(inner, outer):
            continue
        if outer.form == SetForm.HALFSPACE:
            bad = next((v for v in _vertices(inner) if not outer.contains(v)), None)
        else:
            bad = next((v for v in _vertices(inner) if not in_hull(v, outer.vertices)), None)
        return RefinementFailure(index, bad)
    return None


def refines_H(r: ConvexProgram, r2: ConvexProgram) -> bool:
    """r ⊑_H r2: pointwise inclusion, EMPTY below everything."""
    return refinement_witness(r, r2) is None


def is_transitive(r: ConvexProgram) -> bool:
    """r·(r + δ) ⊑_H r."""
    r.require_program("is_transitive")
    identity = ConvexProgram.identity(r.space)
    return refines_H(seq_compose(r, ndet_choice(r, identity)), r)


def _join(left: str, op: str, right: str) -> str:
    if not left or not right:
        return ""
    return f"{left}{op}{right}"
