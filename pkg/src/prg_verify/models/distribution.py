"""Exact distributions and subdistributions over a finite state space."""
from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from prg_verify.errors import DomainError
from prg_verify.models.state_space import StateSpace
from prg_verify.utils.rationals import Rational, as_rational

# Sparse weight vector: (state index, weight) pairs, ascending index, weights > 0.
Entries = tuple[tuple[int, Fraction], ...]


def entries_from_dict(weights: Mapping[int, Fraction]) -> Entries:
    """Canonical sparse form of an index → weight mapping."""
    return tuple(sorted((i, w) for i, w in weights.items() if w != 0))


class SubDistribution:
    """
    Map from states to rationals in [0, 1] with total mass at most 1.

    Stored sparsely by canonical state index. Instances are immutable and
    compare by value.
    """

    __slots__ = ("space", "entries", "_hash")

    def __init__(self, space: StateSpace, entries: Entries):
        self.space = space
        self.entries = entries
        self._hash = hash(entries)

    @classmethod
    def from_weights(
        cls, space: StateSpace, weights: Mapping[Hashable, Rational]
    ) -> SubDistribution:
        """Validated construction from a state → weight mapping."""
        indexed = _validated(space, weights)
        total = sum(indexed.values(), Fraction(0))
        if total > 1:
            raise DomainError(f"Subdistribution mass {total} exceeds 1")
        return cls(space, entries_from_dict(indexed))

    @classmethod
    def zero(cls, space: StateSpace) -> SubDistribution:
        return cls(space, ())

    def __getitem__(self, state: Hashable) -> Fraction:
        return self.weight_at(self.space.index(state))

    def weight_at(self, index: int) -> Fraction:
        for i, w in self.entries:
            if i == index:
                return w
        return Fraction(0)

    def mass(self, states: Iterable[Hashable] | None = None) -> Fraction:
        """Total mass, or μ(O) for a collection of states O."""
        if states is None:
            return sum((w for _, w in self.entries), Fraction(0))
        wanted = {self.space.index(s) for s in states}
        return sum((w for i, w in self.entries if i in wanted), Fraction(0))

    def mass_at_indices(self, indices: set[int] | frozenset[int]) -> Fraction:
        return sum((w for i, w in self.entries if i in indices), Fraction(0))

    def dot(self, objective: Sequence[Fraction | int]) -> Fraction:
        """Σ_s weight(s)·objective(s) over canonical indices."""
        if len(self.entries) == 1:
            i, w = self.entries[0]
            return w * objective[i]
        return sum((w * objective[i] for i, w in self.entries), Fraction(0))

    @property
    def support(self) -> tuple[Hashable, ...]:
        """States with positive weight."""
        return tuple(self.space.state(i) for i, _ in self.entries)

    @property
    def support_indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def is_point(self) -> bool:
        return len(self.entries) == 1 and self.entries[0][1] == 1

    def dense(self) -> tuple[Fraction, ...]:
        """Weights for every state in canonical order."""
        weights = [Fraction(0)] * len(self.space)
        for i, w in self.entries:
            weights[i] = w
        return tuple(weights)

    def as_dict(self) -> dict[Hashable, Fraction]:
        return {self.space.state(i): w for i, w in self.entries}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubDistribution):
            return NotImplemented
        return self.entries == other.entries and (
            self.space is other.space or self.space == other.space
        )

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: SubDistribution) -> bool:
        return self.entries < other.entries

    def __repr__(self) -> str:
        body = ", ".join(f"{self.space.state(i)!r}: {w}" for i, w in self.entries)
        return f"{type(self).__name__}({{{body}}})"


class Distribution(SubDistribution):
    """A subdistribution whose mass is exactly 1."""

    __slots__ = ()

    @classmethod
    def from_weights(
        cls, space: StateSpace, weights: Mapping[Hashable, Rational]
    ) -> Distribution:
        indexed = _validated(space, weights)
        total = sum(indexed.values(), Fraction(0))
        if total != 1:
            raise DomainError(f"Distribution weights sum to {total}, not 1")
        return cls(space, entries_from_dict(indexed))

    @classmethod
    def from_dense(cls, space: StateSpace, weights: Sequence[Rational]) -> Distribution:
        """Construction from a weight per state in canonical order."""
        if len(weights) != len(space):
            raise DomainError(f"Expected {len(space)} weights, got {len(weights)}")
        return cls.from_weights(space, {space.state(i): w for i, w in enumerate(weights)})

    @classmethod
    def point(cls, space: StateSpace, state: Hashable) -> Distribution:
        """The point distribution δ_s."""
        return cls(space, ((space.index(state), Fraction(1)),))

    @classmethod
    def point_at(cls, space: StateSpace, index: int) -> Distribution:
        return cls(space, ((index, Fraction(1)),))


def _validated(space: StateSpace, weights: Mapping[Hashable, Rational]) -> dict[int, Fraction]:
    indexed: dict[int, Fraction] = {}
    for state, raw in weights.items():
        weight = as_rational(raw)
        if not 0 <= weight <= 1:
            raise DomainError(f"Weight {weight} for state {state!r} outside [0, 1]")
        index = space.index(state)
        indexed[index] = indexed.get(index, Fraction(0)) + weight
    return indexed
