"""Probability bounds for concurrent components and the sieve case study."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import isqrt, lcm
from typing import Hashable, Sequence

import pandas as pd

from prg_verify.config import settings
from prg_verify.dsl.sieve import SieveModel, sieve_generate
from prg_verify.engine.rely_guarantee import (
    RelyCondition,
    check_guarantee,
    guarantee_of,
    interleave_rely,
    rely_intersection,
)
from prg_verify.errors import (
    CrossCheckError,
    DomainError,
    EmptySetError,
    InfeasibleRelyError,
    PremiseError,
    SideConditionError,
)
from prg_verify.events.builders import par
from prg_verify.models.event_structure import IpBes
from prg_verify.models.program import ConvexProgram
from prg_verify.scheduling.semantics import semantics
from prg_verify.semantics.operations import ndet_choice, refines_H
from prg_verify.utils.rationals import Rational, as_probability, format_decimal, format_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundPremise:
    """⟦r*‖E⟧(s₀)(O) ≥ p, with E's own actions bounded by ``guar``."""

    rely: RelyCondition
    component: IpBes
    target: frozenset[int]
    bound: Fraction
    guar: ConvexProgram | None = None
    # Already concluded by an earlier rule application; not re-certified.
    established: bool = False

    @property
    def guarantee(self) -> ConvexProgram:
        return self.guar if self.guar is not None else guarantee_of(self.component)


@dataclass(frozen=True)
class BoundConclusion:
    """⟦(r₁∩r₂)*‖E₁‖E₂⟧(s₀)(O₁∩O₂) ≥ bound."""

    bound: Fraction
    target: frozenset[int]
    rely: RelyCondition
    component: IpBes
    guar: ConvexProgram
    initial: Hashable
    certified: tuple[Fraction, Fraction] = field(default=(Fraction(0), Fraction(0)))

    def as_premise(self) -> BoundPremise:
        """Feed the conclusion into a further application of the rule."""
        return BoundPremise(
            rely=self.rely,
            component=self.component,
            target=self.target,
            bound=self.bound,
            guar=self.guar,
            established=True,
        )


def certified_probability(premise: BoundPremise, initial: Hashable) -> Fraction:
    """
    Lower bound on ⟦r*‖E⟧(s₀)(O) from the sequential upper bound of r*‖E.

    The minimum of μ(O) over the interleaved chain at s₀ is a valid lower
    bound for every scheduler of r*‖E.
    """
    space = premise.component.space
    index = space.index(initial)
    term = interleave_rely(premise.rely, premise.component)
    objective = tuple(Fraction(1) if i in premise.target else Fraction(0) for i in space.indices())
    return term.minimize(objective, index)


def probability_bound(b1: BoundPremise, b2: BoundPremise, initial: Hashable) -> BoundConclusion:
    """
    Combine two certified premises into a bound for the composed system.

    The result is p₁ + p₂ − 1 on O₁ ∩ O₂, returned as is (it may be negative).

    Raises:
        PremiseError: a premise's probability cannot be certified
        SideConditionError: E₁'s guarantee is not below r₂, or vice versa
        InfeasibleRelyError: r₁ ∩ r₂ is empty at some state
    """
    b1.component.space.check_same(b2.component.space)
    certified = []
    for label, premise in (("first", b1), ("second", b2)):
        if premise.established:
            certified.append(premise.bound)
            continue
        value = certified_probability(premise, initial)
        if value < premise.bound:
            raise PremiseError(
                f"The {label} premise claims {format_rational(premise.bound)} "
                f"but only {format_rational(value)} is certified"
            )
        certified.append(value)

    guarantees = []
    for label, own, other in (("g₁ ⊑ r₂", b1, b2), ("g₂ ⊑ r₁", b2, b1)):
        g = own.guarantee
        if not check_guarantee(own.component, g):
            raise SideConditionError(f"Component actions exceed the guarantee for {label}")
        if not refines_H(g, other.rely.base):
            raise SideConditionError(f"Side condition {label} fails")
        guarantees.append(g)

    try:
        base = rely_intersection(b1.rely.base, b2.rely.base)
    except EmptySetError as exc:
        raise InfeasibleRelyError(str(exc)) from exc
    if not base.is_total:
        raise InfeasibleRelyError("r₁ ∩ r₂ is empty at some state")
    rely = b1.rely if base is b1.rely.base else RelyCondition(base)
    bound = b1.bound + b2.bound - 1
    logger.info(
        f"Probability bound {format_rational(b1.bound)} + {format_rational(b2.bound)} − 1 "
        f"= {format_rational(bound)}"
    )
    return BoundConclusion(
        bound=bound,
        target=b1.target & b2.target,
        rely=rely,
        component=par(b1.component, b2.component),
        guar=ndet_choice(guarantees[0], guarantees[1]),
        initial=initial,
        certified=(certified[0], certified[1]),
    )


def combine_bounds(premises: Sequence[BoundPremise], initial: Hashable) -> BoundConclusion:
    """Apply ``probability_bound`` left to right: Σ pᵢ − (k − 1) on ∩ Oᵢ."""
    if len(premises) < 2:
        raise PremiseError("Combining bounds needs at least two premises")
    conclusion = probability_bound(premises[0], premises[1], initial)
    for premise in premises[2:]:
        conclusion = probability_bound(conclusion.as_premise(), premise, initial)
    return conclusion


@dataclass
class SieveBounds:
    """Rule-derived lower bounds for the sieve at one p."""

    n: int
    p: Fraction
    f: Fraction
    g: Fraction
    f_exponents: dict[int, int]
    g_exponents: dict[int, int]

    @property
    def g_exponent(self) -> int:
        return sum(self.g_exponents.values())


def fresh_multiples(n: int, i: int) -> int:
    """
    Multiples m of i with 2i ≤ m ≤ n that no smaller thread k ∈ 2..i−1
    removes, by inclusion–exclusion over the lcm of subsets of 2..i−1.
    """
    smaller = range(2, i)
    total = 0
    for size in range(len(smaller) + 1):
        for subset in combinations(smaller, size):
            step = lcm(i, *subset)
            count = n // step - (2 * i - 1) // step
            total += -count if size % 2 else count
    return total


def fresh_multiples_direct(n: int, i: int) -> int:
    return sum(1 for m in range(2 * i, n + 1, i) if all(m % k for k in range(2, i)))


def sieve_bounds(n: int, p: Rational) -> SieveBounds:
    """
    f = Σ_i p^(n÷i − 1) − (⌊√n⌋ − 2) and g = Π_i p^(fresh_i) for i = 2..⌊√n⌋.

    Raises:
        DomainError: n < 4
    """
    if n < 4:
        raise DomainError(f"The sieve needs n ≥ 4, got {n}")
    q = as_probability(p)
    root = isqrt(n)
    f_exponents = {i: n // i - 1 for i in range(2, root + 1)}
    g_exponents: dict[int, int] = {}
    for i in range(2, root + 1):
        fresh = fresh_multiples(n, i)
        direct = fresh_multiples_direct(n, i)
        if fresh != direct:
            raise CrossCheckError(
                f"Fresh multiples of {i} up to {n}: counted {fresh}, enumerated {direct}"
            )
        g_exponents[i] = fresh

    f = sum((q**e for e in f_exponents.values()), Fraction(0)) - (root - 2)
    g = q ** sum(g_exponents.values())
    return SieveBounds(n, q, f, g, f_exponents, g_exponents)


def exact_from_counts(counts: dict[int, int], p: Fraction) -> Fraction:
    """Π_c (1 − (1−p)^k_c): every composite removed by at least one of its k_c attempts."""
    result = Fraction(1)
    for k in counts.values():
        result *= 1 - (1 - p) ** k
    return result


def sieve_exact(n: int, p: Rational, cross_check: bool | None = None) -> Fraction:
    """
    Exact probability that every composite up to n is removed when the
    environment does nothing.

    Args:
        n: Sieve size
        p: Removal probability
        cross_check: Also evaluate the full semantics of the composed threads
            and require every scheduler to give the same outcome; defaults to
            n ≤ settings.sieve_cross_check_max_n

    Raises:
        CrossCheckError: schedulers disagree, or the semantics disagrees
            with the product formula
    """
    model = sieve_generate(n, p)
    exact = exact_from_counts(model.removal_counts(), model.p)
    if cross_check is None:
        cross_check = n <= settings.sieve_cross_check_max_n
    if cross_check:
        _cross_check(model, exact)
    return exact


def _cross_check(model: SieveModel, exact: Fraction) -> None:
    es = model.composed()
    outcome = semantics(es, model.initial)
    if len(outcome.vertices) != 1:
        raise CrossCheckError(
            f"Schedulers of the composed sieve disagree: {len(outcome.vertices)} extreme outcomes"
        )
    mass = outcome.vertices[0].weight_at(0)
    if mass != exact:
        raise CrossCheckError(
            f"Semantics gives {format_rational(mass)}, product formula {format_rational(exact)}"
        )
    logger.debug(f"Sieve n={model.n} cross-check passed over {len(es.events)} events")


def _grid(step: Fraction) -> list[Fraction]:
    step = Fraction(step)
    if step <= 0 or step > 1 or (1 / step).denominator != 1:
        raise DomainError(f"Grid step must divide 1, got {step}")
    return [k * step for k in range(int(1 / step) + 1)]


def f_root_bracket(n: int, step: Rational = Fraction(1, 1000)) -> tuple[Fraction, Fraction]:
    """
    First grid interval (lo, hi] with f(lo) < 0 ≤ f(hi).

    Returns (0, 0) when f is already non-negative at p = 0.
    """
    grid = _grid(Fraction(step))
    previous = grid[0]
    if sieve_bounds(n, previous).f >= 0:
        return previous, previous
    for p in grid[1:]:
        if sieve_bounds(n, p).f >= 0:
            return previous, p
        previous = p
    raise AssertionError("f(1) is always 1")


def sieve_sweep(n: int, step: Rational = Fraction(1, 100)) -> pd.DataFrame:
    """f, g and exact over a p-grid, as exact rational strings plus decimals."""
    counts = sieve_generate(n, 0).removal_counts()
    rows = []
    for p in _grid(Fraction(step)):
        bounds = sieve_bounds(n, p)
        exact = exact_from_counts(counts, p)
        rows.append(
            {
                "p": format_rational(p),
                "f": format_rational(bounds.f),
                "g": format_rational(bounds.g),
                "exact": format_rational(exact),
                "p_decimal": format_decimal(p),
                "f_decimal": format_decimal(bounds.f),
                "g_decimal": format_decimal(bounds.g),
                "exact_decimal": format_decimal(exact),
            }
        )
    logger.info(f"Sieve sweep n={n}: {len(rows)} grid points")
    return pd.DataFrame(rows)
