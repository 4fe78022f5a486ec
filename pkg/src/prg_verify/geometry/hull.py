"""Convex-geometry queries on distributions and convex sets."""
from __future__ import annotations

import logging
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Sequence

from prg_verify.config import settings
from prg_verify.errors import DimensionError, DomainError, EmptySetError
from prg_verify.models.convex import ConvexSet, SetForm, extreme_points, in_hull
from prg_verify.models.distribution import Distribution, SubDistribution, entries_from_dict
from prg_verify.models.program import ConvexProgram
from prg_verify.models.state_space import StateSpace
from prg_verify.utils.rationals import Rational, as_probability
from prg_verify.utils.simplex import basic_feasible_solutions

logger = logging.getLogger(__name__)


def point_distribution(space: StateSpace, state: Hashable) -> Distribution:
    """δ_s."""
    return Distribution.point(space, state)


def mix(mu: Distribution, nu: Distribution, p: Rational) -> Distribution:
    """(1−p)·μ + p·ν."""
    weight = as_probability(p)
    mu.space.check_same(nu.space)
    if weight == 0:
        return mu
    if weight == 1:
        return nu
    combined: dict[int, Fraction] = {}
    for i, w in mu.entries:
        combined[i] = (1 - weight) * w
    for i, w in nu.entries:
        combined[i] = combined.get(i, Fraction(0)) + weight * w
    return Distribution(mu.space, entries_from_dict(combined))


def hull_membership(mu: SubDistribution, convex: ConvexSet) -> bool:
    """μ ∈ C, exactly."""
    return convex.contains(mu)


def hull_reduce(points: Iterable[Distribution]) -> ConvexSet:
    """
    Vertex-form ConvexSet of conv(points).

    Raises:
        EmptySetError: no points given
    """
    points = tuple(points)
    if not points:
        raise EmptySetError("hull_reduce needs at least one point")
    return ConvexSet.from_points(points[0].space, points)


def relation_convex_closure(
    space: StateSpace, relation: Iterable[tuple[Hashable, Hashable]], name: str = ""
) -> ConvexProgram:
    """
    Convex closure of a relation: r(s) = conv{δ_t | (s, t) ∈ ρ}.

    States without a successor map to EMPTY, and the resulting program is
    flagged by its kind (PARTIAL or TEST) and a warning.
    """
    successors: dict[int, set[int]] = {i: set() for i in space.indices()}
    for source, target in relation:
        successors[space.index(source)].add(space.index(target))

    entries: list[ConvexSet | None] = []
    for index in space.indices():
        targets = sorted(successors[index])
        if not targets:
            entries.append(None)
            continue
        points = tuple(Distribution.point_at(space, t) for t in targets)
        entries.append(ConvexSet(space, SetForm.VERTEX, tuple(sorted(points))))

    program = ConvexProgram(space, entries, name=name)
    stuck = [space.state(i) for i, e in enumerate(entries) if e is None]
    if stuck:
        logger.warning(f"Relation closure infeasible at states {stuck}")
    return program


def weighted_sum(
    parts: Sequence[tuple[Fraction, Sequence[Distribution]]]
) -> tuple[Distribution, ...]:
    """
    Extreme points of the Minkowski combination Σ_k w_k·conv(V_k).

    Weights must sum to 1. Reduction happens after every step so the
    intermediate product never outgrows the final vertex count by much.
    """
    space = parts[0][1][0].space
    partials: list[dict[int, Fraction]] = [{}]
    for position, (weight, vertices) in enumerate(parts):
        combined: list[dict[int, Fraction]] = []
        for acc in partials:
            for v in vertices:
                nxt = dict(acc)
                for i, w in v.entries:
                    nxt[i] = nxt.get(i, Fraction(0)) + weight * w
                combined.append(nxt)
        if len(combined) > 1 and position < len(parts) - 1:
            reduced = extreme_points(SubDistribution(space, entries_from_dict(d)) for d in combined)
            partials = [dict(p.entries) for p in reduced]
        else:
            partials = combined
    return extreme_points(Distribution(space, entries_from_dict(d)) for d in partials)


def intersect(left: ConvexSet, right: ConvexSet, cap: int | None = None) -> ConvexSet | None:
    """
    Intersection of two convex sets, or None when it is empty.

    Vertex-form operands are intersected by enumerating the basic feasible
    solutions of {V₁λ = V₂κ, Σλ = Σκ = 1, λ, κ ≥ 0} and projecting them;
    the projections contain every vertex of the intersection.
    """
    left.space.check_same(right.space)
    if left is right or left == right:
        return left
    if left.form == SetForm.HALFSPACE and right.form == SetForm.HALFSPACE:
        merged = ConvexSet.from_halfspaces(left.space, left.halfspaces + right.halfspaces)
        return None if merged.empty else merged
    if left.form == SetForm.HALFSPACE:
        left, right = right, left
    if right.form == SetForm.HALFSPACE:
        if right.empty:
            return None
        if all(right.contains(v) for v in left.vertices):
            return left
        right = right.vertex_form()

    if all(right.contains(v) for v in left.vertices):
        return left
    if all(left.contains(v) for v in right.vertices):
        return right
    if left.point_indices is not None and right.point_indices is not None:
        common = sorted(set(left.point_indices) & set(right.point_indices))
        if not common:
            return None
        return ConvexSet(
            left.space,
            SetForm.VERTEX,
            tuple(sorted(Distribution.point_at(left.space, i) for i in common)),
        )

    states = sorted(left.reach | right.reach)
    if len(states) > settings.max_simplex_dimension:
        raise DimensionError(
            f"Intersection over {len(states)} states exceeds dimension cap "
            f"{settings.max_simplex_dimension}"
        )
    n1, n2 = len(left.vertices), len(right.vertices)
    a_eq: list[list[Fraction]] = []
    b_eq: list[Fraction] = []
    for index in states:
        row = [v.weight_at(index) for v in left.vertices]
        row += [-v.weight_at(index) for v in right.vertices]
        a_eq.append(row)
        b_eq.append(Fraction(0))
    a_eq.append([Fraction(1)] * n1 + [Fraction(0)] * n2)
    b_eq.append(Fraction(1))
    a_eq.append([Fraction(0)] * n1 + [Fraction(1)] * n2)
    b_eq.append(Fraction(1))

    points: list[Distribution] = []
    for solution in basic_feasible_solutions(a_eq, b_eq, cap or settings.cap):
        combined: dict[int, Fraction] = {}
        for weight, v in zip(solution[:n1], left.vertices):
            if weight:
                for i, w in v.entries:
                    combined[i] = combined.get(i, Fraction(0)) + weight * w
        points.append(Distribution(left.space, entries_from_dict(combined)))
    if not points:
        return None
    return ConvexSet(left.space, SetForm.VERTEX, extreme_points(points))


def set_refines(inner: ConvexSet, outer: ConvexSet) -> bool:
    """inner ⊆ outer."""
    if inner is outer:
        return True
    if outer.form == SetForm.HALFSPACE:
        if outer.empty:
            return inner.empty
        size = len(outer.space)
        return all(inner.minimize(h.dense(size)) >= h.bound for h in outer.halfspaces)
    if inner.form == SetForm.HALFSPACE:
        inner = inner.vertex_form()
    if inner.point_indices is not None and outer.point_indices is not None:
        return set(inner.point_indices) <= set(outer.point_indices)
    return all(in_hull(v, outer.vertices) for v in inner.vertices)


def grid_combinations(points: Sequence[Distribution], denominator: int) -> set[Distribution]:
    """Every convex combination of ``points`` with weights on a 1/denominator grid."""
    if not points:
        raise DomainError("No points given")
    space = points[0].space
    found: set[Distribution] = set()
    for split in _compositions(denominator, len(points)):
        combined: dict[int, Fraction] = {}
        for count, point in zip(split, points):
            if count:
                for i, w in point.entries:
                    combined[i] = combined.get(i, Fraction(0)) + Fraction(count, denominator) * w
        found.add(Distribution(space, entries_from_dict(combined)))
    return found


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    for cuts in combinations(range(total + parts - 1), parts - 1):
        previous = -1
        split = []
        for cut in cuts:
            split.append(cut - previous - 1)
            previous = cut
        split.append(total + parts - 1 - previous - 1)
        yield tuple(split)
