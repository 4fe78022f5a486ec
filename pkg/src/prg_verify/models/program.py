"""State-indexed convex programs (elements of the sequential powerdomain)."""
from __future__ import annotations

from enum import Enum
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence

from prg_verify.errors import ProgramKindError, StateSpaceError
from prg_verify.models.convex import ConvexSet
from prg_verify.models.distribution import Distribution
from prg_verify.models.state_space import StateSpace

# EMPTY entries are represented by None.
Entry = Optional[ConvexSet]


class ProgramKind(str, Enum):
    """
    PROGRAM: every state maps to a non-empty set.
    TEST: a subidentity, each entry EMPTY or exactly {δ_s}.
    PARTIAL: some entries EMPTY, not a subidentity (guarded branches).
    """

    PROGRAM = "program"
    TEST = "test"
    PARTIAL = "partial"


class ConvexProgram:
    """
    Map from states to convex sets of distributions, or EMPTY.

    Tables are either given outright or produced lazily by a rule, which
    keeps programs over large bitmask spaces cheap until a state is asked
    for. Entries of a lazy program are computed once and cached.
    """

    __slots__ = ("space", "name", "_kind", "_entries", "_rule")

    def __init__(
        self,
        space: StateSpace,
        entries: Sequence[Entry] | None = None,
        rule: Callable[[int], Entry] | None = None,
        kind: ProgramKind | None = None,
        name: str = "",
    ):
        if entries is None and rule is None:
            raise ValueError("Program needs a table or a rule")
        self.space = space
        self.name = name
        self._rule = rule
        self._entries: list[Entry] | dict[int, Entry]
        if entries is not None:
            if len(entries) != len(space):
                raise StateSpaceError(
                    f"Program table has {len(entries)} entries for {len(space)} states"
                )
            self._entries = [_normalized(e) for e in entries]
            for entry in self._entries:
                if entry is not None:
                    space.check_same(entry.space)
            self._kind = kind or _infer_kind(self._entries)
        else:
            self._entries = {}
            if kind is None:
                raise ValueError("Lazy programs must declare their kind")
            self._kind = kind

    # -- construction -------------------------------------------------------

    @classmethod
    def from_rule(
        cls,
        space: StateSpace,
        rule: Callable[[int], Entry],
        kind: ProgramKind = ProgramKind.PROGRAM,
        name: str = "",
    ) -> ConvexProgram:
        """Lazily tabulated program; ``rule`` maps a state index to its entry."""
        return cls(space, rule=rule, kind=kind, name=name)

    @classmethod
    def from_mapping(
        cls,
        space: StateSpace,
        table: Mapping[Hashable, Entry | Distribution | Iterable[Distribution]],
        name: str = "",
    ) -> ConvexProgram:
        """Program from a state → set, distribution or points mapping; missing states are EMPTY."""
        entries: list[Entry] = [None] * len(space)
        for state, value in table.items():
            index = space.index(state)
            if value is None or isinstance(value, ConvexSet):
                entries[index] = value
            elif isinstance(value, Distribution):
                entries[index] = ConvexSet.point(value)
            else:
                entries[index] = ConvexSet.from_points(space, value)
        return cls(space, entries, name=name)

    @classmethod
    def identity(cls, space: StateSpace) -> ConvexProgram:
        """δ (skip)."""
        return cls(
            space,
            [ConvexSet.point(Distribution.point_at(space, i)) for i in space.indices()],
            name="skip",
        )

    @classmethod
    def bottom(cls, space: StateSpace) -> ConvexProgram:
        """⊥, the everywhere-EMPTY test."""
        return cls(space, [None] * len(space), kind=ProgramKind.TEST, name="abort")

    @classmethod
    def assign(cls, space: StateSpace, state: Hashable, name: str = "") -> ConvexProgram:
        """Constant assignment: every state moves to ``state``."""
        target = ConvexSet.point(Distribution.point(space, state))
        return cls(space, [target] * len(space), name=name or f"assign{state}")

    @classmethod
    def deterministic(
        cls, space: StateSpace, choice: Mapping[Hashable, Distribution], name: str = ""
    ) -> ConvexProgram:
        """Program with a single distribution per state."""
        return cls.from_mapping(space, dict(choice), name=name)

    @classmethod
    def test(cls, space: StateSpace, states: Iterable[Hashable], name: str = "") -> ConvexProgram:
        """The subidentity that holds exactly on ``states``."""
        holding = {space.index(s) for s in states}
        entries: list[Entry] = [
            ConvexSet.point(Distribution.point_at(space, i)) if i in holding else None
            for i in space.indices()
        ]
        kind = ProgramKind.PROGRAM if len(holding) == len(space) else ProgramKind.TEST
        return cls(space, entries, kind=kind, name=name)

    # -- access -------------------------------------------------------------

    @property
    def kind(self) -> ProgramKind:
        return self._kind

    @property
    def is_lazy(self) -> bool:
        return self._rule is not None

    def at(self, index: int) -> Entry:
        """Entry at canonical state index (None for EMPTY)."""
        if self._rule is None:
            return self._entries[index]  # type: ignore[index]
        cache = self._entries
        assert isinstance(cache, dict)
        if index not in cache:
            cache[index] = _normalized(self._rule(index))
        return cache[index]

    def __getitem__(self, state: Hashable) -> Entry:
        return self.at(self.space.index(state))

    @property
    def entries(self) -> tuple[Entry, ...]:
        """Fully tabulated entries (forces lazy programs)."""
        return tuple(self.at(i) for i in self.space.indices())

    def domain(self) -> frozenset[int]:
        """dom(r) = {s | r(s) ≠ EMPTY}, as indices."""
        return frozenset(i for i in self.space.indices() if self.at(i) is not None)

    @property
    def is_total(self) -> bool:
        return self._kind == ProgramKind.PROGRAM

    @property
    def is_subidentity(self) -> bool:
        """Every entry EMPTY or exactly {δ_s}."""
        if self._kind == ProgramKind.TEST:
            return True
        return all(entry is None or entry.point_at == i for i, entry in enumerate(self.entries))

    def require_program(self, operation: str) -> None:
        if self._kind != ProgramKind.PROGRAM:
            raise ProgramKindError(f"{operation} needs a PROGRAM operand, got {self._kind.value}")

    def renamed(self, name: str) -> ConvexProgram:
        if self._rule is not None:
            return ConvexProgram(self.space, rule=self._rule, kind=self._kind, name=name)
        entries = list(self._entries)  # type: ignore[arg-type]
        return ConvexProgram(self.space, entries, kind=self._kind, name=name)

    # -- value semantics ----------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConvexProgram):
            return NotImplemented
        if self is other:
            return True
        return self.space == other.space and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        label = self.name or "program"
        if len(self.space) > 8:
            return f"{label}<{self._kind.value}, |Ω|={len(self.space)}>"
        body = ", ".join(
            f"{self.space.state(i)!r}: {'∅' if e is None else e!r}"
            for i, e in enumerate(self.entries)
        )
        return f"{label}<{self._kind.value}>{{{body}}}"


def _normalized(entry: Entry) -> Entry:
    if entry is not None and entry.empty:
        return None
    return entry


def _infer_kind(entries: Sequence[Entry]) -> ProgramKind:
    if all(e is not None for e in entries):
        return ProgramKind.PROGRAM
    if all(e is None or e.point_at == i for i, e in enumerate(entries)):
        return ProgramKind.TEST
    return ProgramKind.PARTIAL
