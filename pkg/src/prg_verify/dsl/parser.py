"""
Tokenizer, recursive-descent parser and pretty-printer.

Grammar (loosest binding first)::

    expr    := choice ("||" choice)*
    choice  := seq ("+" seq)*
    seq     := pchoice (";" pchoice)*
    pchoice := primary ("[" RATIONAL "]" primary)*
    primary := "skip" | "abort" | NAME | "(" expr ")"
             | "if" NAME "then" expr ["else" expr] "fi"
             | "star" "(" expr "," expr "," INT ")"

Source files add declarations::

    states 0 1 2;
    atom a { 0 -> 1; 1 -> 1/2:0 + 1/2:1 | 2; 2 -> 2; }
    guard b { 0 1 }
    term main = a ; (skip + a)
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterator

from prg_verify.dsl.ast import (
    AbortTerm,
    AtomDecl,
    AtomTerm,
    ChoiceTerm,
    GuardDecl,
    IfTerm,
    Module,
    ParTerm,
    PChoiceTerm,
    Position,
    SeqTerm,
    SkipTerm,
    StarTerm,
    Term,
    VertexDecl,
)
from prg_verify.errors import DomainError, ParseError
from prg_verify.utils.rationals import format_rational, parse_rational

TOKEN_PATTERN = re.compile(
    r"""
    (?P<COMMENT>\#[^\n]*)
  | (?P<NEWLINE>\n)
  | (?P<SPACE>[ \t\r]+)
  | (?P<NUMBER>\d+(?:/\d+|\.\d+)?)
  | (?P<ARROW>->)
  | (?P<PAR>\|\|)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<OP>[;+|\[\](){},:=])
  | (?P<MISMATCH>.)
    """,
    re.VERBOSE,
)

KEYWORDS = frozenset(
    {"skip", "abort", "if", "then", "else", "fi", "star", "states", "atom", "guard", "term"}
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: Position


def tokenize(text: str) -> Iterator[Token]:
    """Split ``text`` into tokens; whitespace and ``#`` comments are dropped."""
    line, line_start = 1, 0
    for match in TOKEN_PATTERN.finditer(text):
        kind = match.lastgroup
        assert kind is not None
        value = match.group()
        pos = Position(line, match.start() - line_start + 1)
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
            continue
        if kind in ("SPACE", "COMMENT"):
            continue
        if kind == "MISMATCH":
            raise ParseError(f"Unexpected character {value!r}", pos.line, pos.column)
        if kind == "NAME" and value in KEYWORDS:
            kind = value
        yield Token(kind, value, pos)
    yield Token("EOF", "", Position(line, len(text) - line_start + 1))


class Parser:
    """Recursive descent over a token list."""

    def __init__(self, text: str):
        self.tokens = list(tokenize(text))
        self.position = 0

    # -- token helpers -------------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.position + offset, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        token = self.current
        return token.text in texts and token.kind in ("OP", "PAR", "ARROW", *texts)

    def advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"Expected {text!r}, found {self.current.text or 'end of input'!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.current.kind != kind:
            self.fail(f"Expected {what}, found {self.current.text or 'end of input'!r}")
        return self.advance()

    def fail(self, message: str, token: Token | None = None) -> None:
        where = (token or self.current).pos
        raise ParseError(message, where.line, where.column)

    def _starts_primary(self, token: Token) -> bool:
        return token.kind in ("NAME", "skip", "abort", "if", "star") or (
            token.kind == "OP" and token.text == "("
        )

    # -- expressions ----------------------------------------------------------

    def expression(self) -> Term:
        term = self.choice()
        while self.at("||"):
            token = self.advance()
            term = ParTerm(term, self.choice(), pos=token.pos)
        return term

    def choice(self) -> Term:
        term = self.sequence()
        while self.at("+"):
            token = self.advance()
            term = ChoiceTerm(term, self.sequence(), pos=token.pos)
        return term

    def sequence(self) -> Term:
        term = self.pchoice()
        # A trailing ';' ends a term declaration.
        while self.at(";") and self._starts_primary(self.peek()):
            token = self.advance()
            term = SeqTerm(term, self.pchoice(), pos=token.pos)
        return term

    def pchoice(self) -> Term:
        term = self.primary()
        while self.at("["):
            token = self.advance()
            literal = self.expect_kind("NUMBER", "a probability")
            p = self._probability(literal)
            self.expect("]")
            term = PChoiceTerm(p, term, self.primary(), pos=token.pos)
        return term

    def primary(self) -> Term:
        token = self.current
        if token.kind == "skip":
            self.advance()
            return SkipTerm(pos=token.pos)
        if token.kind == "abort":
            self.advance()
            return AbortTerm(pos=token.pos)
        if token.kind == "NAME":
            self.advance()
            return AtomTerm(token.text, pos=token.pos)
        if token.kind == "if":
            self.advance()
            guard = self.expect_kind("NAME", "a guard name").text
            self.expect_kind("then", "'then'")
            then = self.expression()
            orelse: Term = SkipTerm(pos=self.current.pos)
            if self.current.kind == "else":
                self.advance()
                orelse = self.expression()
            self.expect_kind("fi", "'fi'")
            return IfTerm(guard, then, orelse, pos=token.pos)
        if token.kind == "star":
            self.advance()
            self.expect("(")
            body = self.expression()
            self.expect(",")
            exit_ = self.expression()
            self.expect(",")
            depth_token = self.expect_kind("NUMBER", "an unfolding depth")
            if not depth_token.text.isdigit():
                self.fail("Unfolding depth must be a natural number", depth_token)
            self.expect(")")
            return StarTerm(body, exit_, int(depth_token.text), pos=token.pos)
        if self.at("("):
            self.advance()
            term = self.expression()
            self.expect(")")
            return term
        self.fail(f"Expected a term, found {token.text or 'end of input'!r}")
        raise AssertionError("unreachable")

    def _probability(self, token: Token) -> Fraction:
        try:
            p = parse_rational(token.text)
        except DomainError as exc:
            raise ParseError(str(exc), token.pos.line, token.pos.column) from exc
        if not 0 <= p <= 1:
            self.fail(f"Probability {token.text} outside [0, 1]", token)
        return p

    # -- declarations --------------------------------------------------------

    def module(self) -> Module:
        states: list[Hashable] = []
        atoms: list[AtomDecl] = []
        guards: list[GuardDecl] = []
        terms: list[tuple[str, Term]] = []
        while self.current.kind != "EOF":
            token = self.current
            if token.kind == "states":
                self.advance()
                while not self.at(";"):
                    states.append(self.state())
                    if self.at(","):
                        self.advance()
                self.advance()
            elif token.kind == "atom":
                atoms.append(self.atom_declaration())
            elif token.kind == "guard":
                self.advance()
                name = self.expect_kind("NAME", "a guard name").text
                self.expect("{")
                members: list[Hashable] = []
                while not self.at("}"):
                    members.append(self.state())
                    if self.at(","):
                        self.advance()
                self.advance()
                guards.append(GuardDecl(name, tuple(members), pos=token.pos))
            elif token.kind == "term":
                self.advance()
                name = self.expect_kind("NAME", "a term name").text
                self.expect("=")
                terms.append((name, self.expression()))
                if self.at(";"):
                    self.advance()
            else:
                self.fail(f"Expected a declaration, found {token.text!r}")
        module = Module(tuple(states), tuple(atoms), tuple(guards), tuple(terms))
        _resolve(module)
        return module

    def atom_declaration(self) -> AtomDecl:
        token = self.advance()
        name = self.expect_kind("NAME", "an atom name").text
        self.expect("{")
        rows: list[tuple[Hashable, tuple[VertexDecl, ...]]] = []
        while not self.at("}"):
            source = self.state()
            self.expect("->")
            vertices = [self.vertex()]
            while self.at("|"):
                self.advance()
                vertices.append(self.vertex())
            rows.append((source, tuple(vertices)))
            if self.at(";"):
                self.advance()
        self.advance()
        return AtomDecl(name, tuple(rows), pos=token.pos)

    def vertex(self) -> VertexDecl:
        parts: list[tuple[Hashable, Fraction]] = []
        while True:
            weight = Fraction(1)
            if self.current.kind == "NUMBER" and self.peek().text == ":":
                weight = self._probability(self.advance())
                self.advance()
            parts.append((self.state(), weight))
            if not self.at("+"):
                break
            self.advance()
        return tuple(parts)

    def state(self) -> Hashable:
        token = self.current
        if token.kind == "NUMBER" and token.text.isdigit():
            self.advance()
            return int(token.text)
        if token.kind == "NAME":
            self.advance()
            return token.text
        self.fail(f"Expected a state, found {token.text or 'end of input'!r}")
        raise AssertionError("unreachable")

    def finish(self) -> None:
        if self.current.kind != "EOF":
            self.fail(f"Unexpected {self.current.text!r} after the term")


def parse(text: str) -> Term:
    """Parse a single term (no declarations, names unresolved)."""
    parser = Parser(text)
    term = parser.expression()
    parser.finish()
    return term


def parse_module(text: str) -> Module:
    """
    Parse a source file and resolve every name it uses.

    Raises:
        ParseError: syntax errors, undeclared names or states, probabilities
            outside [0, 1]; all with line and column
    """
    return Parser(text).module()


def _resolve(module: Module) -> None:
    declared = set(module.states)

    def check_state(state: Hashable, pos: Position | None) -> None:
        if state not in declared:
            raise ParseError(f"Undeclared state {state!r}", *(_where(pos)))

    for atom in module.atoms:
        for source, vertices in atom.rows:
            check_state(source, atom.pos)
            for vertex in vertices:
                for target, _ in vertex:
                    check_state(target, atom.pos)
                if sum(w for _, w in vertex) != 1:
                    raise ParseError(
                        f"Weights of a vertex of atom {atom.name} from {source!r} do not sum to 1",
                        *_where(atom.pos),
                    )
    for guard in module.guards:
        for state in guard.states:
            check_state(state, guard.pos)

    for _, term in module.terms:
        check_names(term, module)


def check_names(term: Term, module: Module) -> None:
    """Every atom, guard and if-guard in ``term`` is declared in ``module``."""
    guard_names = {g.name for g in module.guards}
    names = {a.name for a in module.atoms} | guard_names
    for node in walk(term):
        if isinstance(node, AtomTerm) and node.name not in names:
            raise ParseError(f"Undeclared name {node.name!r}", *_where(node.pos))
        if isinstance(node, IfTerm) and node.guard not in guard_names:
            raise ParseError(f"Undeclared guard {node.guard!r}", *_where(node.pos))


def parse_term(text: str, module: Module) -> Term:
    """
    A term of ``module`` by name, or ``text`` parsed as an expression over
    the module's declarations.
    """
    if text in module.term_names:
        return module.term(text)
    term = parse(text)
    check_names(term, module)
    return term


def _where(pos: Position | None) -> tuple[int, int]:
    return (pos.line, pos.column) if pos is not None else (0, 0)


def walk(term: Term) -> Iterator[Term]:
    """Pre-order traversal."""
    yield term
    if isinstance(term, (SeqTerm, ChoiceTerm, PChoiceTerm, ParTerm)):
        yield from walk(term.left)
        yield from walk(term.right)
    elif isinstance(term, IfTerm):
        yield from walk(term.then)
        yield from walk(term.orelse)
    elif isinstance(term, StarTerm):
        yield from walk(term.body)
        yield from walk(term.exit)


# Binding strength for printing; primaries bind tightest.
_PRECEDENCE = {ParTerm: 0, ChoiceTerm: 1, SeqTerm: 2, PChoiceTerm: 3}
_SYMBOL = {ParTerm: " || ", ChoiceTerm: " + ", SeqTerm: " ; "}


def format_term(term: Term) -> str:
    """Pretty-print with the fewest parentheses ``parse`` needs to rebuild ``term``."""
    if isinstance(term, AtomTerm):
        return term.name
    if isinstance(term, SkipTerm):
        return "skip"
    if isinstance(term, AbortTerm):
        return "abort"
    if isinstance(term, IfTerm):
        return f"if {term.guard} then {format_term(term.then)} else {format_term(term.orelse)} fi"
    if isinstance(term, StarTerm):
        return f"star({format_term(term.body)}, {format_term(term.exit)}, {term.depth})"

    level = _PRECEDENCE[type(term)]
    left = _wrapped(term.left, level, strict=False)
    right = _wrapped(term.right, level, strict=True)
    if isinstance(term, PChoiceTerm):
        p = term.p
        literal = str(p.numerator) if p.denominator == 1 else format_rational(p)
        return f"{left} [{literal}] {right}"
    return f"{left}{_SYMBOL[type(term)]}{right}"


def _wrapped(child: Term, level: int, strict: bool) -> str:
    text = format_term(child)
    child_level = _PRECEDENCE.get(type(child), 4)
    if child_level < level or (strict and child_level == level):
        return f"({text})"
    return text
