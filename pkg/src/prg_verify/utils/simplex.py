"""Exact rational linear programming and linear algebra.

Two-phase tableau simplex with Bland's rule (lowest-index entering column,
lowest basic variable among tied ratios), which guarantees termination.
All arithmetic is on ``Fraction`` values; no tolerances anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence, Union

from prg_verify.errors import TraceExplosionError

Number = Union[Fraction, int]
Matrix = list[list[Fraction]]


class LpStatus(str, Enum):
    """Outcome of a linear program."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpResult:
    """Solution of ``min c·x  s.t.  A x = b, x ≥ 0``."""

    status: LpStatus
    x: tuple[Fraction, ...] = ()
    value: Fraction | None = None

    @property
    def feasible(self) -> bool:
        return self.status != LpStatus.INFEASIBLE


def _pivot(tableau: Matrix, row: int, col: int) -> None:
    pivot_row = tableau[row]
    pivot = pivot_row[col]
    if pivot != 1:
        pivot_row = [v / pivot for v in pivot_row]
        tableau[row] = pivot_row
    for r, line in enumerate(tableau):
        if r == row:
            continue
        factor = line[col]
        if factor:
            tableau[r] = [a - factor * b for a, b in zip(line, pivot_row)]


def _iterate(tableau: Matrix, basis: list[int], allowed: int) -> bool:
    """Run Bland pivots until optimal (True) or unbounded (False)."""
    while True:
        costs = tableau[-1]
        entering = next((j for j in range(allowed) if costs[j] < 0), None)
        if entering is None:
            return True

        best_row = None
        best_ratio = None
        for i in range(len(tableau) - 1):
            a = tableau[i][entering]
            if a > 0:
                ratio = tableau[i][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[best_row])  # type: ignore[index]
                ):
                    best_ratio = ratio
                    best_row = i
        if best_row is None:
            return False

        _pivot(tableau, best_row, entering)
        basis[best_row] = entering


def solve_lp(
    a_eq: Sequence[Sequence[Number]],
    b_eq: Sequence[Number],
    cost: Sequence[Number] | None = None,
) -> LpResult:
    """
    Solve a standard-form linear program exactly.

    Args:
        a_eq: Constraint matrix (m rows, n columns)
        b_eq: Right-hand side (m entries)
        cost: Objective coefficients; ``None`` asks for feasibility only

    Returns:
        LpResult with an optimal vertex when one exists
    """
    m = len(a_eq)
    n = len(a_eq[0]) if m else (len(cost) if cost is not None else 0)

    rows: Matrix = []
    for i in range(m):
        line = [Fraction(v) for v in a_eq[i]]
        rhs = Fraction(b_eq[i])
        if rhs < 0:
            line = [-v for v in line]
            rhs = -rhs
        artificial = [Fraction(0)] * m
        artificial[i] = Fraction(1)
        rows.append(line + artificial + [rhs])

    # Phase 1: minimize the sum of artificials.
    phase1 = [Fraction(0)] * (n + m + 1)
    for line in rows:
        for j in range(n):
            phase1[j] -= line[j]
        phase1[-1] -= line[-1]
    tableau = rows + [phase1]
    basis = list(range(n, n + m))
    _iterate(tableau, basis, n + m)

    if tableau[-1][-1] != 0:
        return LpResult(LpStatus.INFEASIBLE)

    # Drive remaining artificials out of the basis; drop redundant rows.
    keep: list[int] = []
    for i in range(m):
        if basis[i] >= n:
            column = next((j for j in range(n) if tableau[i][j] != 0), None)
            if column is None:
                continue
            _pivot(tableau, i, column)
            basis[i] = column
        keep.append(i)

    body = [tableau[i][:n] + [tableau[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]

    if cost is None:
        return LpResult(LpStatus.OPTIMAL, _solution(body, basis, n), None)

    c = [Fraction(v) for v in cost]
    objective = c + [Fraction(0)]
    for i, var in enumerate(basis):
        weight = c[var]
        if weight:
            objective = [o - weight * v for o, v in zip(objective, body[i])]
    tableau = body + [objective]
    if not _iterate(tableau, basis, n):
        return LpResult(LpStatus.UNBOUNDED)

    x = _solution(tableau[:-1], basis, n)
    value = sum((c[j] * x[j] for j in range(n)), Fraction(0))
    return LpResult(LpStatus.OPTIMAL, x, value)


def _solution(rows: Matrix, basis: list[int], n: int) -> tuple[Fraction, ...]:
    x = [Fraction(0)] * n
    for i, var in enumerate(basis):
        x[var] = rows[i][-1]
    return tuple(x)


def solve_square(
    matrix: Sequence[Sequence[Number]], rhs: Sequence[Number]
) -> list[Fraction] | None:
    """Unique solution of a square system by Gauss-Jordan, or None if singular."""
    size = len(matrix)
    aug = [[Fraction(v) for v in matrix[i]] + [Fraction(rhs[i])] for i in range(size)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        lead = aug[col][col]
        aug[col] = [v / lead for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][-1] for i in range(size)]


def independent_rows(
    a_eq: Sequence[Sequence[Number]], b_eq: Sequence[Number]
) -> tuple[Matrix, list[Fraction]]:
    """Row-reduce ``[A | b]`` and keep a maximal independent set of equations."""
    rows = [[Fraction(v) for v in line] + [Fraction(b)] for line, b in zip(a_eq, b_eq)]
    width = len(rows[0]) - 1 if rows else 0
    reduced: Matrix = []
    for line in rows:
        for pivot_row, pivot_col in ((r, _lead(r)) for r in reduced):
            factor = line[pivot_col]
            if factor:
                line = [a - factor * b for a, b in zip(line, pivot_row)]
        lead = _lead(line)
        if lead is None or lead >= width:
            continue
        scale = line[lead]
        line = [v / scale for v in line]
        reduced = [
            [a - r[lead] * b for a, b in zip(r, line)] if r[lead] else r for r in reduced
        ]
        reduced.append(line)
    return [r[:-1] for r in reduced], [r[-1] for r in reduced]


def _lead(line: list[Fraction]) -> int | None:
    return next((j for j, v in enumerate(line) if v != 0), None)


def basic_feasible_solutions(
    a_eq: Sequence[Sequence[Number]], b_eq: Sequence[Number], cap: int
) -> Iterator[tuple[Fraction, ...]]:
    """
    Enumerate the vertices of ``{x ≥ 0 : A x = b}`` as basic feasible solutions.

    Args:
        a_eq: Constraint matrix
        b_eq: Right-hand side
        cap: Maximum number of candidate bases examined

    Raises:
        TraceExplosionError: more candidate bases than ``cap``
    """
    matrix, rhs = independent_rows(a_eq, b_eq)
    n = len(a_eq[0]) if a_eq else 0
    rank = len(matrix)
    if rank == 0:
        if all(v == 0 for v in b_eq):
            yield tuple(Fraction(0) for _ in range(n))
        return

    seen: set[tuple[Fraction, ...]] = set()
    for examined, columns in enumerate(combinations(range(n), rank), start=1):
        if examined > cap:
            raise TraceExplosionError(
                f"Basis enumeration exceeded cap {cap}", partial_count=examined - 1
            )
        square = [[row[j] for j in columns] for row in matrix]
        values = solve_square(square, rhs)
        if values is None or any(v < 0 for v in values):
            continue
        x = [Fraction(0)] * n
        for j, v in zip(columns, values):
            x[j] = v
        point = tuple(x)
        if point not in seen:
            seen.add(point)
            yield point
