"""
Lazy program terms.

A ``ProgramTerm`` denotes the same element as the corresponding
``ConvexProgram`` expression, but is evaluated on demand, one state at a
time. Its support function ``minimize`` answers "min over μ in term(s) of
Σ a(t)·μ(t)" by pushing the objective backwards through the composition:

    min over (first·rest)(s) of a  =  min over first(s) of  t ↦ min over rest(t) of a

so a halfspace post-condition can be checked against a long chain without
ever building the chain's vertex sets.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from prg_verify.errors import CompositionError, EmptySetError
from prg_verify.geometry.hull import set_refines, weighted_sum
from prg_verify.models.convex import ConvexSet, Halfspace, SetForm, extreme_points
from prg_verify.models.distribution import Distribution
from prg_verify.models.program import ConvexProgram, Entry
from prg_verify.models.state_space import StateSpace

ObjectiveKey = tuple[Fraction, ...]
Objective = Union[Mapping[int, Fraction], ObjectiveKey]


class _Continuation(Mapping[int, Fraction]):
    """t ↦ min over rest(t) of the objective, computed on first use."""

    def __init__(self, rest: ProgramTerm, objective: ObjectiveKey, cache: dict[int, Fraction]):
        self.rest = rest
        self.objective = objective
        self.cache = cache

    def __getitem__(self, index: int) -> Fraction:
        value = self.cache.get(index)
        if value is None:
            value = self.rest.minimize(self.objective, index)
            self.cache[index] = value
        return value

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.cache)

    def __len__(self) -> int:
        return len(self.cache)


class ProgramTerm(ABC):
    """Composite program evaluated state by state."""

    space: StateSpace

    def __init__(self, space: StateSpace):
        self.space = space
        self._at: dict[int, Entry] = {}
        self._reach: dict[int, frozenset[int]] = {}

    @abstractmethod
    def defined(self, index: int) -> bool:
        """True unless the term is EMPTY at ``index``."""

    @abstractmethod
    def _compute_reach(self, index: int) -> frozenset[int]: ...

    @abstractmethod
    def _compute_at(self, index: int) -> Entry: ...

    @abstractmethod
    def minimize(self, objective: Objective, index: int) -> Fraction:
        """Support function at ``index``; the term must be defined there."""

    def reach(self, index: int) -> frozenset[int]:
        """States carrying positive mass in some outcome from ``index``."""
        if index not in self._reach:
            self._reach[index] = self._compute_reach(index) if self.defined(index) else frozenset()
        return self._reach[index]

    def at(self, index: int) -> Entry:
        """Vertex-form entry at ``index`` (None for EMPTY)."""
        if index not in self._at:
            self._at[index] = self._compute_at(index) if self.defined(index) else None
        return self._at[index]

    def evaluate(self, indices: Iterable[int] | None = None, name: str = "") -> ConvexProgram:
        """Tabulate into a ConvexProgram (only ``indices`` when given, others EMPTY)."""
        wanted = set(self.space.indices() if indices is None else indices)
        entries = [self.at(i) if i in wanted else None for i in self.space.indices()]
        return ConvexProgram(self.space, entries, name=name or repr(self))


class Atom(ProgramTerm):
    """A tabulated (possibly lazy) program."""

    def __init__(self, program: ConvexProgram):
        super().__init__(program.space)
        self.program = program

    def defined(self, index: int) -> bool:
        return self.program.at(index) is not None

    def _compute_reach(self, index: int) -> frozenset[int]:
        entry = self.program.at(index)
        assert entry is not None
        return entry.reach

    def _compute_at(self, index: int) -> Entry:
        entry = self.program.at(index)
        if entry is not None and entry.form == SetForm.HALFSPACE:
            return entry.vertex_form()
        return entry

    def minimize(self, objective: Objective, index: int) -> Fraction:
        entry = self.program.at(index)
        if entry is None:
            raise EmptySetError(f"{self!r} is EMPTY at state {self.space.state(index)!r}")
        return entry.minimize(objective)

    def __repr__(self) -> str:
        return self.program.name or "atom"


class Choice(ProgramTerm):
    """Nondeterministic choice between alternatives (EMPTY is the unit)."""

    def __init__(self, *options: ProgramTerm):
        if not options:
            raise ValueError("Choice needs at least one option")
        super().__init__(options[0].space)
        self.options = options

    def defined(self, index: int) -> bool:
        return any(o.defined(index) for o in self.options)

    def _compute_reach(self, index: int) -> frozenset[int]:
        return frozenset().union(*(o.reach(index) for o in self.options if o.defined(index)))

    def _compute_at(self, index: int) -> Entry:
        points: list[Distribution] = []
        for option in self.options:
            entry = option.at(index)
            if entry is not None:
                points.extend(entry.vertices)
        return ConvexSet(self.space, SetForm.VERTEX, extreme_points(points))

    def minimize(self, objective: Objective, index: int) -> Fraction:
        return min(o.minimize(objective, index) for o in self.options if o.defined(index))

    def __repr__(self) -> str:
        return "(" + " + ".join(repr(o) for o in self.options) + ")"


class Seq(ProgramTerm):
    """first·rest, strict: ``rest`` must be defined wherever ``first`` can land."""

    def __init__(self, first: ProgramTerm, rest: ProgramTerm):
        super().__init__(first.space)
        first.space.check_same(rest.space)
        self.first = first
        self.rest = rest
        self._defined: dict[int, bool] = {}
        self._continuations: dict[ObjectiveKey, dict[int, Fraction]] = {}

    @classmethod
    def of(cls, *parts: ProgramTerm) -> ProgramTerm:
        """Right-nested chain p1·(p2·(…·pn))."""
        if not parts:
            raise ValueError("Seq.of needs at least one part")
        term = parts[-1]
        for part in reversed(parts[:-1]):
            term = cls(part, term)
        return term

    def defined(self, index: int) -> bool:
        known = self._defined.get(index)
        if known is not None:
            return known
        result = self.first.defined(index)
        if result:
            for target in self.first.reach(index):
                if not self.rest.defined(target):
                    raise CompositionError(
                        f"{self.rest!r} is EMPTY at state {self.space.state(target)!r}, "
                        f"reachable from {self.space.state(index)!r}"
                    )
        self._defined[index] = result
        return result

    def _compute_reach(self, index: int) -> frozenset[int]:
        return frozenset().union(*(self.rest.reach(t) for t in self.first.reach(index)))

    def _compute_at(self, index: int) -> Entry:
        first = self.first.at(index)
        assert first is not None
        points: list[Distribution] = []
        for mu in first.vertices:
            if len(mu.entries) == 1:
                points.extend(self._rest_vertices(mu.entries[0][0]))
            else:
                points.extend(weighted_sum([(w, self._rest_vertices(t)) for t, w in mu.entries]))
        return ConvexSet(self.space, SetForm.VERTEX, extreme_points(points))

    def _rest_vertices(self, index: int) -> tuple[Distribution, ...]:
        entry = self.rest.at(index)
        if entry is None:
            raise EmptySetError(f"{self.rest!r} is EMPTY at state {self.space.state(index)!r}")
        return entry.vertices

    def minimize(self, objective: Objective, index: int) -> Fraction:
        key = _objective_key(objective, len(self.space))
        cache = self._continuations.setdefault(key, {})
        continuation = _Continuation(self.rest, key, cache)
        if isinstance(self.first, Atom):
            return self.first.minimize(continuation, index)
        return self.first.minimize(_materialize(continuation, self.first.reach(index)), index)

    def __repr__(self) -> str:
        return f"{self.first!r}·{self.rest!r}"


def _objective_key(objective: Objective, size: int) -> ObjectiveKey:
    if isinstance(objective, tuple):
        return objective
    return tuple(Fraction(objective.get(i, 0)) for i in range(size))  # type: ignore[union-attr]


def _materialize(continuation: _Continuation, indices: Iterable[int]) -> ObjectiveKey:
    """Dense objective with the continuation's values on ``indices``, zero elsewhere."""
    size = len(continuation.rest.space)
    values = [Fraction(0)] * size
    for i in indices:
        values[i] = continuation[i]
    return tuple(values)


class TermFailure(NamedTuple):
    """Where ``term ⊑_H post`` fails: the state, and either the violated
    halfspace with the term's minimum over it, or a vertex outside the post."""

    state: int
    halfspace: Halfspace | None = None
    minimum: Fraction | None = None
    vertex: Distribution | None = None


def term_refinement_failure(
    term: ProgramTerm, post: ConvexProgram, indices: Iterable[int] | None = None
) -> TermFailure | None:
    """
    First failure of ``term ⊑_H post``, or None.

    Halfspace entries of ``post`` are decided by the support function,
    vertex entries by evaluating the term at that state.
    """
    term.space.check_same(post.space)
    size = len(term.space)
    for index in term.space.indices() if indices is None else indices:
        if not term.defined(index):
            continue
        outer = post.at(index)
        if outer is None or outer.empty:
            return TermFailure(index)
        if outer.form == SetForm.HALFSPACE:
            for halfspace in outer.halfspaces:
                value = term.minimize(tuple(halfspace.dense(size)), index)
                if value < halfspace.bound:
                    return TermFailure(index, halfspace=halfspace, minimum=value)
        else:
            inner = term.at(index)
            assert inner is not None
            if not set_refines(inner, outer):
                bad = next(v for v in inner.vertices if not outer.contains(v))
                return TermFailure(index, vertex=bad)
    return None


def term_refines(
    term: ProgramTerm, post: ConvexProgram, indices: Iterable[int] | None = None
) -> bool:
    """term ⊑_H post on ``indices`` (all states by default)."""
    return term_refinement_failure(term, post, indices) is None


def chain(programs: Sequence[ConvexProgram]) -> ProgramTerm:
    """Atom chain p1·p2·…·pn."""
    return Seq.of(*(Atom(p) for p in programs))
