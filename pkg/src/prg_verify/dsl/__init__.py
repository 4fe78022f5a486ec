"""Program language: syntax, parsing, elaboration and the sieve generator."""
from __future__ import annotations

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
)
from prg_verify.dsl.parser import format_term, parse, parse_module, parse_term, tokenize
from prg_verify.dsl.elaborate import Declarations, atomic_program, build_programs, elaborate
from prg_verify.dsl.sieve import SieveModel, sieve_generate

__all__ = [
    "AbortTerm",
    "AtomDecl",
    "AtomTerm",
    "ChoiceTerm",
    "Declarations",
    "GuardDecl",
    "IfTerm",
    "Module",
    "PChoiceTerm",
    "ParTerm",
    "Position",
    "SeqTerm",
    "SieveModel",
    "SkipTerm",
    "StarTerm",
    "Term",
    "atomic_program",
    "build_programs",
    "elaborate",
    "format_term",
    "parse",
    "parse_module",
    "parse_term",
    "sieve_generate",
    "tokenize",
]
