"""Utility functions."""
from __future__ import annotations

from prg_verify.utils.rationals import (
    as_probability,
    as_rational,
    format_decimal,
    format_rational,
    parse_rational,
    render_rational,
)
from prg_verify.utils.simplex import LpResult, LpStatus, solve_lp, solve_square

__all__ = [
    "LpResult",
    "LpStatus",
    "as_probability",
    "as_rational",
    "format_decimal",
    "format_rational",
    "parse_rational",
    "render_rational",
    "solve_lp",
    "solve_square",
]
