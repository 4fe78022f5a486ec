"""Sequential program algebra over convex programs."""
from __future__ import annotations

from prg_verify.semantics.operations import (
    RefinementFailure,
    guard_then,
    if_then_else,
    is_transitive,
    kleene_iterate,
    kleene_star,
    ndet_choice,
    negate_test,
    prob_choice,
    refinement_witness,
    refines_H,
    require_total,
    seq_compose,
)
from prg_verify.semantics.terms import (
    Atom,
    Choice,
    ProgramTerm,
    Seq,
    TermFailure,
    chain,
    term_refinement_failure,
    term_refines,
)
from prg_verify.semantics.axioms import AxiomReport, ProgramSampler, axiom_suite

__all__ = [
    "Atom",
    "AxiomReport",
    "Choice",
    "ProgramSampler",
    "ProgramTerm",
    "RefinementFailure",
    "Seq",
    "TermFailure",
    "axiom_suite",
    "chain",
    "guard_then",
    "if_then_else",
    "is_transitive",
    "kleene_iterate",
    "kleene_star",
    "ndet_choice",
    "negate_test",
    "prob_choice",
    "refinement_witness",
    "refines_H",
    "require_total",
    "seq_compose",
    "term_refinement_failure",
    "term_refines",
]
