"""Tests for the program language: tokens, parsing, printing and elaboration."""
from fractions import Fraction

import pytest

from prg_verify.dsl.ast import (
    AtomDecl,
    AtomTerm,
    ChoiceTerm,
    GuardDecl,
    IfTerm,
    Module,
    ParTerm,
    PChoiceTerm,
    SeqTerm,
    SkipTerm,
    StarTerm,
)
from prg_verify.dsl.elaborate import atomic_program, build_programs, elaborate
from prg_verify.dsl.parser import format_term, parse, parse_module, parse_term, tokenize
from prg_verify.errors import AtomicityError, ElaborationError, FeasibilityError, ParseError
from prg_verify.events.traces import maximal_traces
from prg_verify.models.distribution import Distribution
from prg_verify.models.program import ProgramKind
from prg_verify.scheduling.semantics import semantics


@pytest.fixture
def module(coin_source):
    return parse_module(coin_source)


@pytest.fixture
def decls(module):
    return build_programs(module)


class TestTokenize:
    """Tests for the tokenizer."""

    def test_kinds(self):
        kinds = [t.kind for t in tokenize("a || b [1/2] skip")]
        assert kinds == ["NAME", "PAR", "NAME", "OP", "NUMBER", "OP", "skip", "EOF"]

    def test_comments_and_positions(self):
        tokens = list(tokenize("# note\n  flip ; reset"))
        assert tokens[0].text == "flip"
        assert (tokens[0].pos.line, tokens[0].pos.column) == (2, 3)

    def test_decimal_literal(self):
        (number, _) = tokenize("0.868")
        assert number.kind == "NUMBER"
        assert number.text == "0.868"

    def test_bad_character(self):
        with pytest.raises(ParseError) as info:
            list(tokenize("a $ b"))
        assert (info.value.line, info.value.column) == (1, 3)


class TestParse:
    """Tests for precedence and term shapes."""

    def test_precedence(self):
        """|| binds loosest, then +, then ;, then [p]."""
        term = parse("a || b + c ; d [1/2] e")
        assert term == ParTerm(
            AtomTerm("a"),
            ChoiceTerm(
                AtomTerm("b"),
                SeqTerm(AtomTerm("c"), PChoiceTerm(Fraction(1, 2), AtomTerm("d"), AtomTerm("e"))),
            ),
        )

    def test_left_associative(self):
        assert parse("a ; b ; c") == SeqTerm(SeqTerm(AtomTerm("a"), AtomTerm("b")), AtomTerm("c"))

    def test_parentheses(self):
        either = ChoiceTerm(AtomTerm("a"), AtomTerm("b"))
        assert parse("(a + b) ; c") == SeqTerm(either, AtomTerm("c"))

    def test_if_without_else(self):
        term = parse("if zero then flip fi")
        assert term == IfTerm("zero", AtomTerm("flip"), SkipTerm())

    def test_star(self):
        assert parse("star(up, reset, 2)") == StarTerm(AtomTerm("up"), AtomTerm("reset"), 2)

    def test_decimal_probability(self):
        assert parse("a [0.25] b").p == Fraction(1, 4)

    def test_probability_out_of_range(self):
        with pytest.raises(ParseError):
            parse("a [3/2] b")

    def test_trailing_operator(self):
        with pytest.raises(ParseError) as info:
            parse("a ;; b")
        assert info.value.column == 3

    def test_unclosed_parenthesis(self):
        with pytest.raises(ParseError) as info:
            parse("(a + b")
        assert "end of input" in str(info.value)
        assert info.value.column == 7

    def test_star_depth_must_be_natural(self):
        with pytest.raises(ParseError):
            parse("star(a, b, 1/2)")


class TestFormatTerm:
    """Tests for the pretty-printer."""

    @pytest.mark.parametrize(
        "text",
        [
            "a ; b ; c",
            "a ; (b ; c)",
            "(a + b) ; c",
            "a || b + c",
            "(a || b) ; c",
            "a [1/2] b",
            "(a ; b) [1/3] c",
            "if g then a else skip fi",
            "star(a + b, abort, 3)",
        ],
    )
    def test_round_trip(self, text):
        assert format_term(parse(text)) == text

    def test_integer_probability(self):
        assert format_term(PChoiceTerm(Fraction(1), AtomTerm("a"), AtomTerm("b"))) == "a [1] b"


class TestParseModule:
    """Tests for source files."""

    def test_declarations(self, module):
        assert module.states == (0, 1, 2)
        assert [a.name for a in module.atoms] == ["flip", "reset", "set1", "up", "low"]
        assert module.term_names == ("main", "both")
        assert module.term("main") == SeqTerm(AtomTerm("flip"), AtomTerm("reset"))

    def test_undeclared_name_position(self):
        with pytest.raises(ParseError) as info:
            parse_module("states 0 1;\nterm t = a")
        assert (info.value.line, info.value.column) == (2, 10)

    def test_undeclared_state(self):
        with pytest.raises(ParseError) as info:
            parse_module("states 0;\natom a { 0 -> 1 }")
        assert info.value.line == 2

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ParseError):
            parse_module("states 0 1;\natom a { 0 -> 1/2:0 }")

    def test_undeclared_guard(self):
        with pytest.raises(ParseError):
            parse_module("states 0;\natom a { 0 -> 0 }\nterm t = if g then a fi")

    def test_named_states(self):
        module = parse_module("states on off;\natom flip { on -> off; off -> on }\nterm t = flip")
        assert module.states == ("on", "off")

    def test_parse_term(self, module):
        assert parse_term("main", module) == module.term("main")
        assert parse_term("flip || set1", module) == ParTerm(AtomTerm("flip"), AtomTerm("set1"))
        with pytest.raises(ParseError):
            parse_term("nope ; flip", module)


class TestBuildPrograms:
    """Tests for tabulating declarations."""

    def test_atoms(self, decls):
        flip = decls.atoms["flip"]
        half = Distribution.from_weights(decls.space, {0: Fraction(1, 2), 1: Fraction(1, 2)})
        assert flip.at(2).vertices == (half,)
        assert len(decls.atoms["up"].at(0).vertices) == 3

    def test_guards(self, decls):
        zero = decls.guards["zero"]
        assert zero.kind == ProgramKind.TEST
        assert zero.domain() == {0}

    def test_no_states(self):
        with pytest.raises(ElaborationError):
            build_programs(Module(()))

    def test_atom_and_guard_share_name(self):
        one = Fraction(1)
        module = Module(
            (0,),
            atoms=(AtomDecl("x", ((0, (((0, one),),)),)),),
            guards=(GuardDecl("x", (0,)),),
        )
        with pytest.raises(ElaborationError):
            build_programs(module)


class TestElaborate:
    """Tests for translating terms into event structures."""

    def test_sequence(self, module, supply):
        es = elaborate(module.term("main"), module, supply)
        assert len(es.events) == 2
        assert semantics(es, 2).vertices == (Distribution.point(es.space, 0),)

    def test_parallel(self, module, supply):
        es = elaborate(module.term("both"), module, supply)
        assert len(maximal_traces(es)) == 2

    def test_probabilistic_choice_is_one_event(self, decls, supply):
        es = elaborate(parse("flip [1/4] set1"), decls, supply)
        (event,) = es.events
        expected = Distribution.from_weights(es.space, {0: Fraction(3, 8), 1: Fraction(5, 8)})
        assert es.labels[event].at(0).vertices == (expected,)

    def test_probabilistic_choice_of_skip(self, decls):
        program = atomic_program(parse("skip [1/2] reset"), decls)
        expected = Distribution.from_weights(decls.space, {0: Fraction(1, 2), 2: Fraction(1, 2)})
        assert program.at(2).vertices == (expected,)

    def test_non_atomic_operand(self, decls, supply):
        with pytest.raises(AtomicityError):
            elaborate(parse("(flip ; reset) [1/2] set1"), decls, supply)

    def test_guard_operand(self, decls, supply):
        with pytest.raises(AtomicityError):
            elaborate(parse("zero [1/2] flip"), decls, supply)

    def test_if_then_else(self, decls, supply):
        es = elaborate(parse("if zero then set1 else reset fi"), decls, supply)
        assert semantics(es, 0).vertices == (Distribution.point(es.space, 1),)
        assert semantics(es, 2).vertices == (Distribution.point(es.space, 0),)

    def test_lone_guard_infeasible(self, decls, supply):
        with pytest.raises(FeasibilityError):
            elaborate(parse("zero ; flip"), decls, supply)
        assert elaborate(parse("zero ; flip"), decls, supply, check_feasible=False).events

    def test_if_needs_guard(self, decls, supply):
        with pytest.raises(ElaborationError):
            elaborate(parse("if flip then reset fi"), decls, supply)

    def test_unknown_name(self, decls, supply):
        with pytest.raises(ElaborationError):
            elaborate(AtomTerm("nope"), decls, supply)

    def test_star(self, decls, supply):
        es = elaborate(parse("star(up, reset, 1)"), decls, supply)
        assert sorted(len(t) for t in maximal_traces(es)) == [1, 2]

    def test_abort(self, decls, supply):
        assert elaborate(parse("abort"), decls, supply).is_zero
        assert len(elaborate(parse("abort + flip"), decls, supply).events) == 1

    def test_skip(self, decls, supply):
        es = elaborate(parse("skip"), decls, supply)
        assert semantics(es, 1).vertices == (Distribution.point(es.space, 1),)
