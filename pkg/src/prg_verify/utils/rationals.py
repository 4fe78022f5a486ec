"""Rational literal parsing and rendering."""
from __future__ import annotations

import re
from fractions import Fraction
from typing import NamedTuple, Union

from prg_verify.errors import DomainError

Rational = Union[int, Fraction, str]

RATIONAL_PATTERN = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)|\.(\d+))?\s*$")


class RenderedRational(NamedTuple):
    """Exact ``num/den`` string plus an advisory decimal."""

    exact: str
    decimal: str


def parse_rational(text: str) -> Fraction:
    """
    Parse a rational literal.

    Accepted forms: ``3``, ``9/10``, ``0.868``.

    Args:
        text: Raw literal

    Returns:
        Exact Fraction

    Raises:
        DomainError: malformed literal or zero denominator
    """
    match = RATIONAL_PATTERN.match(text)
    if not match:
        raise DomainError(f"Malformed rational literal: {text!r}")

    whole, denominator, digits = match.groups()
    if denominator is not None:
        if int(denominator) == 0:
            raise DomainError(f"Zero denominator in {text!r}")
        return Fraction(int(whole), int(denominator))
    if digits is not None:
        return Fraction(f"{whole}.{digits}")
    return Fraction(int(whole))


def as_rational(value: Rational) -> Fraction:
    """Coerce ints, Fractions and literal strings; floats are rejected."""
    if isinstance(value, bool) or isinstance(value, float):
        raise DomainError(f"Inexact probability value {value!r}; use a rational")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise DomainError(f"Cannot interpret {value!r} as a rational")


def as_probability(value: Rational) -> Fraction:
    """Coerce and check 0 ≤ p ≤ 1."""
    p = as_rational(value)
    if not 0 <= p <= 1:
        raise DomainError(f"Probability {p} outside [0, 1]")
    return p


def format_rational(value: Fraction | int) -> str:
    """Render as ``num/den`` (denominator always present)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Fraction | int, places: int = 6) -> str:
    """Decimal approximation rounded half-even to ``places`` digits."""
    rounded = round(Fraction(value), places)
    sign = "-" if rounded < 0 else ""
    scaled = abs(rounded) * 10**places
    whole, frac = divmod(int(scaled), 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


def render_rational(value: Fraction | int) -> RenderedRational:
    """Exact and decimal renderings together."""
    return RenderedRational(format_rational(value), format_decimal(value))
