"""Abstract syntax of the program language."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Union


@dataclass(frozen=True)
class Position:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def _pos() -> Position | None:
    return field(default=None, compare=False, kw_only=True)  # type: ignore[return-value]


@dataclass(frozen=True)
class AtomTerm:
    """A declared atom, or a guard used as a test."""

    name: str
    pos: Position | None = _pos()


@dataclass(frozen=True)
class SkipTerm:
    pos: Position | None = _pos()


@dataclass(frozen=True)
class AbortTerm:
    pos: Position | None = _pos()


@dataclass(frozen=True)
class SeqTerm:
    left: Term
    right: Term
    pos: Position | None = _pos()


@dataclass(frozen=True)
class ChoiceTerm:
    left: Term
    right: Term
    pos: Position | None = _pos()


@dataclass(frozen=True)
class PChoiceTerm:
    """``left [p] right``: right with probability p, left otherwise."""

    p: Fraction
    left: Term
    right: Term
    pos: Position | None = _pos()


@dataclass(frozen=True)
class ParTerm:
    left: Term
    right: Term
    pos: Position | None = _pos()


@dataclass(frozen=True)
class IfTerm:
    guard: str
    then: Term
    orelse: Term
    pos: Position | None = _pos()


@dataclass(frozen=True)
class StarTerm:
    body: Term
    exit: Term
    depth: int
    pos: Position | None = _pos()


Term = Union[
    AtomTerm, SkipTerm, AbortTerm, SeqTerm, ChoiceTerm, PChoiceTerm, ParTerm, IfTerm, StarTerm
]

# One vertex: (target state, weight) pairs.
VertexDecl = tuple[tuple[Hashable, Fraction], ...]


@dataclass(frozen=True)
class AtomDecl:
    """``atom NAME { s -> v1 | v2; … }``: states without a row are EMPTY."""

    name: str
    rows: tuple[tuple[Hashable, tuple[VertexDecl, ...]], ...]
    pos: Position | None = _pos()


@dataclass(frozen=True)
class GuardDecl:
    """``guard NAME { s1 s2 … }``: the states where the guard holds."""

    name: str
    states: tuple[Hashable, ...]
    pos: Position | None = _pos()


@dataclass(frozen=True)
class Module:
    """A parsed source file."""

    states: tuple[Hashable, ...]
    atoms: tuple[AtomDecl, ...] = ()
    guards: tuple[GuardDecl, ...] = ()
    terms: tuple[tuple[str, Term], ...] = ()

    def term(self, name: str) -> Term:
        for key, term in self.terms:
            if key == name:
                return term
        raise KeyError(name)

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(key for key, _ in self.terms)
