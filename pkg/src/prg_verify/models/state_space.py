"""Finite state spaces with canonical indexing."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterator, Sequence

from prg_verify.errors import StateSpaceError


@dataclass(frozen=True)
class StateSpace:
    """
    Finite ordered set of state identifiers (Ω).

    States are addressed by their position in ``states``; every set-valued
    result in the toolkit is ordered by that index. A ``range`` may be used
    for large bitmask spaces so the identifiers are never materialized.
    """

    states: Sequence[Hashable]

    def __post_init__(self) -> None:
        if len(self.states) == 0:
            raise StateSpaceError("State space must be non-empty")
        if not isinstance(self.states, range) and len(set(self.states)) != len(self.states):
            raise StateSpaceError("State identifiers must be unique")

    @classmethod
    def of(cls, *states: Hashable) -> StateSpace:
        """Build from explicit identifiers."""
        return cls(tuple(states))

    @classmethod
    def indexed(cls, size: int) -> StateSpace:
        """States ``0 .. size-1``."""
        return cls(range(size))

    @cached_property
    def _index(self) -> dict[Hashable, int]:
        return {state: i for i, state in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[Hashable]:
        return iter(self.states)

    def __contains__(self, state: object) -> bool:
        if isinstance(self.states, range):
            return isinstance(state, int) and state in self.states
        return state in self._index

    def index(self, state: Hashable) -> int:
        """Canonical index of ``state``."""
        if isinstance(self.states, range):
            if isinstance(state, int) and state in self.states:
                return self.states.index(state)
        else:
            position = self._index.get(state)
            if position is not None:
                return position
        raise StateSpaceError(f"Unknown state identifier: {state!r}")

    def state(self, index: int) -> Hashable:
        """Identifier at canonical ``index``."""
        return self.states[index]

    def indices(self) -> range:
        return range(len(self.states))

    def check_same(self, other: StateSpace) -> None:
        """Raise unless ``other`` is the same Ω."""
        if self is not other and self != other:
            raise StateSpaceError("Operands live over different state spaces")
