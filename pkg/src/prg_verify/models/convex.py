"""Convex sets of distributions in vertex or halfspace form."""
from __future__ import annotations

import logging
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Hashable, Iterable, Mapping, Sequence, Union

from prg_verify.errors import DomainError, EmptySetError, TraceExplosionError
from prg_verify.models.distribution import Distribution, SubDistribution
from prg_verify.models.state_space import StateSpace
from prg_verify.utils.rationals import Rational, as_rational, format_rational
from prg_verify.utils.simplex import LpStatus, basic_feasible_solutions, solve_lp

logger = logging.getLogger(__name__)

# Anything indexable by canonical state index: dense lists or sparse dicts.
Objective = Union[Sequence[Fraction], Mapping[int, Fraction]]


class SetForm(str, Enum):
    """Representation of a convex set."""

    VERTEX = "vertex"
    HALFSPACE = "halfspace"


class Halfspace:
    """Linear constraint Σ_s a_s·μ(s) ≥ c over canonical state indices."""

    __slots__ = ("terms", "bound", "__dict__")

    def __init__(self, terms: Iterable[tuple[int, Fraction]], bound: Fraction):
        self.terms = tuple(sorted((i, Fraction(a)) for i, a in terms if a != 0))
        self.bound = Fraction(bound)

    @classmethod
    def at_least(cls, space: StateSpace, states: Iterable[Hashable], bound: Rational) -> Halfspace:
        """μ(O) ≥ bound for the state collection O."""
        indices = {space.index(s) for s in states}
        return cls(((i, Fraction(1)) for i in indices), as_rational(bound))

    @classmethod
    def mass_at_least(cls, indices: Iterable[int], bound: Fraction) -> Halfspace:
        return cls(((i, Fraction(1)) for i in indices), bound)

    @cached_property
    def coefficients(self) -> dict[int, Fraction]:
        return dict(self.terms)

    def coefficient(self, index: int) -> Fraction:
        return self.coefficients.get(index, Fraction(0))

    def dense(self, size: int) -> list[Fraction]:
        values = [Fraction(0)] * size
        for i, a in self.terms:
            values[i] = a
        return values

    def value(self, mu: SubDistribution) -> Fraction:
        coefficients = self.coefficients
        return sum((w * coefficients.get(i, 0) for i, w in mu.entries), Fraction(0))

    def satisfied_by(self, mu: SubDistribution) -> bool:
        return self.value(mu) >= self.bound

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Halfspace):
            return NotImplemented
        return self.terms == other.terms and self.bound == other.bound

    def __hash__(self) -> int:
        return hash((self.terms, self.bound))

    def __repr__(self) -> str:
        if all(a == 1 for _, a in self.terms):
            body = "{" + ", ".join(str(i) for i, _ in self.terms) + "}"
            return f"μ({body}) ≥ {format_rational(self.bound)}"
        body = " + ".join(f"{format_rational(a)}·μ[{i}]" for i, a in self.terms)
        return f"{body} ≥ {format_rational(self.bound)}"


class ConvexSet:
    """
    Non-empty (or explicitly empty) convex set of distributions over Ω.

    Vertex form keeps an irredundant, canonically ordered vertex tuple.
    Halfspace form keeps constraints intersected with the simplex; such
    sets are answered by exact LPs over states grouped by their constraint
    coefficients, so large Ω never has to be enumerated vertex by vertex.
    """

    __slots__ = ("space", "form", "vertices", "halfspaces", "empty", "__dict__")

    def __init__(
        self,
        space: StateSpace,
        form: SetForm,
        vertices: tuple[Distribution, ...] = (),
        halfspaces: tuple[Halfspace, ...] = (),
        empty: bool = False,
    ):
        self.space = space
        self.form = form
        self.vertices = vertices
        self.halfspaces = halfspaces
        self.empty = empty

    # -- construction -------------------------------------------------------

    @classmethod
    def from_points(cls, space: StateSpace, points: Iterable[Distribution]) -> ConvexSet:
        """conv(points), reduced to its extreme points."""
        points = tuple(points)
        if not points:
            raise EmptySetError("Convex hull of an empty point set")
        for point in points:
            space.check_same(point.space)
        return cls(space, SetForm.VERTEX, extreme_points(points))

    @classmethod
    def point(cls, mu: Distribution) -> ConvexSet:
        return cls(mu.space, SetForm.VERTEX, (mu,))

    @classmethod
    def from_halfspaces(cls, space: StateSpace, halfspaces: Iterable[Halfspace]) -> ConvexSet:
        """{μ ∈ DΩ | μ satisfies every halfspace}; marked empty when unsatisfiable."""
        hs = tuple(sorted(set(halfspaces), key=lambda h: (h.terms, h.bound)))
        for h in hs:
            for i, _ in h.terms:
                if not 0 <= i < len(space):
                    raise DomainError(f"Halfspace refers to state index {i} outside Ω")
        result = cls(space, SetForm.HALFSPACE, halfspaces=hs)
        result.empty = not result._feasible()
        if result.empty:
            logger.debug(f"Halfspace set {hs} is empty")
        return result

    @classmethod
    def simplex(cls, space: StateSpace) -> ConvexSet:
        """The full probability simplex DΩ."""
        return cls(space, SetForm.HALFSPACE)

    # -- queries ------------------------------------------------------------

    @property
    def is_vertex_form(self) -> bool:
        return self.form == SetForm.VERTEX

    @cached_property
    def point_indices(self) -> tuple[int, ...] | None:
        """State indices when every vertex is a point mass, else None."""
        if self.form != SetForm.VERTEX or not all(v.is_point for v in self.vertices):
            return None
        return tuple(v.entries[0][0] for v in self.vertices)

    @cached_property
    def reach(self) -> frozenset[int]:
        """States that carry positive mass in some member."""
        if self.form == SetForm.VERTEX:
            return frozenset(i for v in self.vertices for i in v.support_indices)
        bounds = self._signature_rows()
        signatures = tuple(sig for sig, _ in self._groups)
        reachable: set[int] = set()
        for position, (_, indices) in enumerate(self._groups):
            if _group_can_be_positive(bounds, signatures, position):
                reachable.update(indices)
        return frozenset(reachable)

    @property
    def point_at(self) -> int | None:
        """The index s when the set is exactly {δ_s}."""
        indices = self.point_indices
        if indices is not None and len(indices) == 1:
            return indices[0]
        return None

    def contains(self, mu: SubDistribution) -> bool:
        """Exact membership test."""
        self.space.check_same(mu.space)
        if self.form == SetForm.HALFSPACE:
            if self.empty or mu.mass() != 1:
                return False
            return all(h.satisfied_by(mu) for h in self.halfspaces)
        return in_hull(mu, self.vertices)

    def minimize(self, objective: Objective) -> Fraction:
        """min over μ in the set of Σ_s objective[s]·μ(s) (the support function)."""
        if self.empty:
            raise EmptySetError("Minimizing over an empty set")
        if self.form == SetForm.VERTEX:
            indices = self.point_indices
            if indices is not None:
                return Fraction(min(map(objective.__getitem__, indices)))
            return min(v.dot(objective) for v in self.vertices)

        rows = self._signature_rows()
        reach = self.reach
        keys: list[tuple[tuple[Fraction, ...], Fraction]] = []
        for signature, indices in self._groups:
            if indices[0] in reach:
                keys.append((signature, Fraction(min(map(objective.__getitem__, indices)))))
        return _aggregated_minimum(rows, tuple(keys))

    def vertex_form(self, cap: int = 100_000) -> ConvexSet:
        """Equivalent vertex-form set (enumerates halfspace vertices)."""
        if self.form == SetForm.VERTEX:
            return self
        if self.empty:
            raise EmptySetError("Empty halfspace set has no vertices")
        reach = self.reach
        groups = [(sig, idx) for sig, idx in self._groups if idx[0] in reach]
        a_eq, b_eq, _ = _standard_form(self._signature_rows(), [sig for sig, _ in groups])
        points: list[Distribution] = []
        for solution in basic_feasible_solutions(a_eq, b_eq, cap):
            masses = solution[: len(groups)]
            positive = [(g, m) for g, m in enumerate(masses) if m > 0]
            choices = [groups[g][1] for g, _ in positive]
            for picked in product(*choices):
                if len(points) >= cap:
                    raise TraceExplosionError(
                        f"Vertex enumeration exceeded cap {cap}", partial_count=len(points)
                    )
                entries = tuple(sorted(zip(picked, (m for _, m in positive))))
                points.append(Distribution(self.space, entries))
        return ConvexSet(self.space, SetForm.VERTEX, extreme_points(points))

    # -- internals ----------------------------------------------------------

    @cached_property
    def _groups(self) -> tuple[tuple[tuple[Fraction, ...], tuple[int, ...]], ...]:
        """States grouped by their coefficient in every halfspace."""
        buckets: dict[tuple[Fraction, ...], list[int]] = {}
        coefficient_maps = [h.coefficients for h in self.halfspaces]
        zero = Fraction(0)
        for index in self.space.indices():
            signature = tuple(c.get(index, zero) for c in coefficient_maps)
            buckets.setdefault(signature, []).append(index)
        return tuple((sig, tuple(idx)) for sig, idx in buckets.items())

    def _signature_rows(self) -> tuple[Fraction, ...]:
        return tuple(h.bound for h in self.halfspaces)

    def _feasible(self) -> bool:
        signatures = tuple(sig for sig, _ in self._groups)
        return _aggregated_feasible(self._signature_rows(), signatures)

    # -- value semantics ----------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConvexSet):
            return NotImplemented
        if self.form != other.form:
            return False
        if self.form == SetForm.VERTEX:
            return self.vertices == other.vertices
        return self.halfspaces == other.halfspaces and self.empty == other.empty

    def __hash__(self) -> int:
        return hash((self.form, self.vertices, self.halfspaces))

    def __repr__(self) -> str:
        if self.form == SetForm.VERTEX:
            return f"conv{list(self.vertices)}"
        if self.empty:
            return "∅"
        return "{μ | " + " ∧ ".join(repr(h) for h in self.halfspaces) + "}"


# ---------------------------------------------------------------------------
# Aggregated LPs over signature groups. Each group g is a variable y_g ≥ 0 with
# Σ y_g = 1 and Σ_g sig_g[h]·y_g ≥ bound[h] for every halfspace h.


def _standard_form(
    bounds: tuple[Fraction, ...], signatures: Sequence[tuple[Fraction, ...]]
) -> tuple[list[list[Fraction]], list[Fraction], int]:
    groups = len(signatures)
    width = groups + len(bounds)
    a_eq = [[Fraction(1)] * groups + [Fraction(0)] * len(bounds)]
    b_eq = [Fraction(1)]
    for h, bound in enumerate(bounds):
        row = [sig[h] for sig in signatures] + [Fraction(0)] * len(bounds)
        row[groups + h] = Fraction(-1)
        a_eq.append(row)
        b_eq.append(bound)
    return a_eq, b_eq, width


@lru_cache(maxsize=65536)
def _aggregated_feasible(
    bounds: tuple[Fraction, ...], signatures: tuple[tuple[Fraction, ...], ...]
) -> bool:
    a_eq, b_eq, _ = _standard_form(bounds, signatures)
    return solve_lp(a_eq, b_eq).feasible


@lru_cache(maxsize=65536)
def _aggregated_minimum(
    bounds: tuple[Fraction, ...], keys: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
) -> Fraction:
    signatures = [sig for sig, _ in keys]
    a_eq, b_eq, width = _standard_form(bounds, signatures)
    cost = [c for _, c in keys] + [Fraction(0)] * (width - len(keys))
    result = solve_lp(a_eq, b_eq, cost)
    if result.status != LpStatus.OPTIMAL or result.value is None:
        raise EmptySetError("Halfspace set has no member")
    return result.value


@lru_cache(maxsize=65536)
def _group_can_be_positive(
    bounds: tuple[Fraction, ...],
    signatures: tuple[tuple[Fraction, ...], ...],
    target: int,
) -> bool:
    a_eq, b_eq, width = _standard_form(bounds, signatures)
    cost = [Fraction(0)] * width
    cost[target] = Fraction(-1)
    result = solve_lp(a_eq, b_eq, cost)
    return result.status == LpStatus.OPTIMAL and result.value is not None and result.value < 0


# ---------------------------------------------------------------------------
# Point-level hull algorithms.


def in_hull(mu: SubDistribution, points: Sequence[SubDistribution]) -> bool:
    """Decide μ ∈ conv(points) by exact linear feasibility."""
    if not points:
        return False
    if mu in points:
        return True
    if len(points) == 1:
        return False
    support = set(mu.support_indices)
    if mu.is_point:
        return False  # a point mass is a convex combination only of itself
    candidates = [p for p in points if set(p.support_indices) <= support]
    if not candidates:
        return False
    covered = {i for p in candidates for i in p.support_indices}
    if not support <= covered:
        return False

    states = sorted(covered)
    a_eq = [[Fraction(1)] * len(candidates)]
    b_eq = [Fraction(1)]
    for index in states:
        a_eq.append([p.weight_at(index) for p in candidates])
        b_eq.append(mu.weight_at(index))
    return solve_lp(a_eq, b_eq).feasible


def extreme_points(points: Iterable[Distribution]) -> tuple[Distribution, ...]:
    """Irredundant generators of conv(points), in canonical order."""
    remaining = sorted(set(points))
    if len(remaining) <= 1:
        return tuple(remaining)

    kept: list[Distribution] = []
    for position, candidate in enumerate(remaining):
        if candidate.is_point or _has_unique_extreme_coordinate(candidate, remaining):
            kept.append(candidate)
            continue
        others = kept + remaining[position + 1 :]
        if not in_hull(candidate, others):
            kept.append(candidate)
    return tuple(sorted(kept))


def _has_unique_extreme_coordinate(candidate: Distribution, points: Sequence[Distribution]) -> bool:
    """True when some coordinate of ``candidate`` is strictly above all others'."""
    for index, weight in candidate.entries:
        if all(p is candidate or p.weight_at(index) < weight for p in points):
            return True
    return False
