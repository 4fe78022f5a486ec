"""Random program samplers and the algebraic law suite."""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Iterator

import numpy as np

from prg_verify.geometry.hull import relation_convex_closure
from prg_verify.models.convex import ConvexSet
from prg_verify.models.distribution import Distribution
from prg_verify.models.program import ConvexProgram
from prg_verify.models.reports import LawReport
from prg_verify.models.state_space import StateSpace
from prg_verify.semantics.operations import (
    is_transitive,
    kleene_iterate,
    kleene_star,
    ndet_choice,
    refines_H,
    seq_compose,
)

logger = logging.getLogger(__name__)


class AxiomReport(LawReport):
    """Law suite outcome plus the count of strict sub-distributivity instances."""

    samples: int = 0
    strict_subdistributivity: int = 0


class ProgramSampler:
    """
    Seeded generator of small random programs and relations.

    Weights are drawn on a fixed denominator grid so every sample is an
    exact rational object.
    """

    def __init__(self, seed: int | None = None, denominator: int = 4):
        self.rng = np.random.default_rng(seed)
        self.denominator = denominator

    def space(self, max_states: int = 3) -> StateSpace:
        return StateSpace.indexed(int(self.rng.integers(1, max_states + 1)))

    def distribution(self, space: StateSpace) -> Distribution:
        counts = self.rng.multinomial(self.denominator, [1 / len(space)] * len(space))
        entries = tuple(
            (i, Fraction(int(c), self.denominator)) for i, c in enumerate(counts) if c
        )
        return Distribution(space, entries)

    def program(self, space: StateSpace, max_vertices: int = 3, name: str = "") -> ConvexProgram:
        """Random PROGRAM with at most ``max_vertices`` generators per state."""
        entries = []
        for _ in space.indices():
            count = int(self.rng.integers(1, max_vertices + 1))
            points = [self.distribution(space) for _ in range(count)]
            entries.append(ConvexSet.from_points(space, points))
        return ConvexProgram(space, entries, name=name)

    def test(self, space: StateSpace, name: str = "") -> ConvexProgram:
        holding = [s for s in space if self.rng.random() < 0.5]
        return ConvexProgram.test(space, holding, name=name)

    def relation(self, space: StateSpace) -> set[tuple[int, int]]:
        """Random relation in which every state has a successor."""
        size = len(space)
        matrix = self.rng.random((size, size)) < 0.4
        for i in range(size):
            if not matrix[i].any():
                matrix[i, int(self.rng.integers(0, size))] = True
        return {(i, j) for i in range(size) for j in range(size) if matrix[i, j]}

    def relation_closure(self, space: StateSpace, name: str = "") -> ConvexProgram:
        return relation_convex_closure(space, self.relation(space), name=name)

    def transitive_closure(self, space: StateSpace, name: str = "") -> ConvexProgram:
        """Convex closure of the transitive closure of a random relation."""
        return relation_convex_closure(space, transitive_closure(self.relation(space)), name=name)

    def triples(self, count: int, max_states: int = 3) -> Iterator[tuple[ConvexProgram, ...]]:
        for _ in range(count):
            space = self.space(max_states)
            yield (
                self.program(space, name="x"),
                self.program(space, name="y"),
                self.program(space, name="z"),
            )


def transitive_closure(relation: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Warshall closure."""
    nodes = sorted({a for a, _ in relation} | {b for _, b in relation})
    closure = set(relation)
    for k in nodes:
        for i in nodes:
            if (i, k) not in closure:
                continue
            for j in nodes:
                if (k, j) in closure:
                    closure.add((i, j))
    return closure


def axiom_suite(samples: int = 500, seed: int = 0, max_states: int = 3) -> AxiomReport:
    """
    Check the semiring, right-distributivity, sub-distributivity and star laws.

    Args:
        samples: Number of random (x, y, z) triples
        seed: Sampler seed
        max_states: Largest |Ω| drawn

    Returns:
        AxiomReport with one entry per law
    """
    sampler = ProgramSampler(seed)
    report = AxiomReport(samples=samples)

    for number, (x, y, z) in enumerate(sampler.triples(samples, max_states)):
        space = x.space
        tag = f"sample {number} (|Ω|={len(space)})"
        delta = ConvexProgram.identity(space)
        bottom = ConvexProgram.bottom(space)

        report.check("+ idempotent").record(ndet_choice(x, x) == x, tag)
        report.check("+ commutative").record(ndet_choice(x, y) == ndet_choice(y, x), tag)
        report.check("+ associative").record(
            ndet_choice(ndet_choice(x, y), z) == ndet_choice(x, ndet_choice(y, z)), tag
        )
        report.check("⊥ unit of +").record(ndet_choice(x, bottom) == x, tag)
        report.check("· associative").record(
            seq_compose(seq_compose(x, y), z) == seq_compose(x, seq_compose(y, z)), tag
        )
        report.check("δ unit of ·").record(
            seq_compose(delta, x) == x and seq_compose(x, delta) == x, tag
        )
        report.check("⊥ annihilates ·").record(
            seq_compose(bottom, x) == bottom and seq_compose(x, bottom) == bottom, tag
        )

        xy, xz = seq_compose(x, y), seq_compose(x, z)
        report.check("right distributivity").record(
            seq_compose(ndet_choice(x, y), z) == ndet_choice(seq_compose(x, z), seq_compose(y, z)),
            tag,
        )
        left_split = ndet_choice(xy, xz)
        joined = seq_compose(x, ndet_choice(y, z))
        report.check("sub-distributivity").record(refines_H(left_split, joined), tag)
        if left_split != joined:
            report.strict_subdistributivity += 1

        report.check("· monotone").record(
            refines_H(xy, joined)
            and refines_H(seq_compose(y, x), seq_compose(ndet_choice(y, z), x)),
            tag,
        )
        report.check("⊑ partial order").record(
            refines_H(x, x)
            and refines_H(x, ndet_choice(x, y))
            and refines_H(ndet_choice(x, y), ndet_choice(ndet_choice(x, y), z))
            and refines_H(x, ndet_choice(ndet_choice(x, y), z))
            and (not (refines_H(x, y) and refines_H(y, x)) or x == y),
            tag,
        )

        walk = sampler.relation_closure(space, name="ρ")
        star = kleene_star(walk, y)
        report.check("star unfold").record(star == ndet_choice(y, seq_compose(walk, star)), tag)

        closure = sampler.transitive_closure(space, name="r")
        iterated = kleene_iterate(closure, delta, len(space) + 2)
        report.check("transitive closure").record(
            is_transitive(closure)
            and kleene_star(closure, delta) == ndet_choice(delta, closure) == iterated,
            tag,
        )

    if report.strict_subdistributivity == 0:
        report.notes.append("No sampled instance separated x·y + x·z from x·(y + z)")
    logger.info(
        f"Axiom suite: {samples} samples, {len(report.failures())} failing laws, "
        f"{report.strict_subdistributivity} strict sub-distributivity witnesses"
    )
    return report
