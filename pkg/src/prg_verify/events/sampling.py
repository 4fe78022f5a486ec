"""Seeded random event structures for the property suites."""
from __future__ import annotations

from prg_verify.events.builders import EventSupply, atomic, choice, par, seq, unit
from prg_verify.models.event_structure import IpBes
from prg_verify.models.state_space import StateSpace
from prg_verify.semantics.axioms import ProgramSampler


class StructureSampler(ProgramSampler):
    """
    Random structures built from the regular operations.

    Labels are PROGRAM-kind, so every sample is feasible and terminating.
    ``parallel`` allows ‖ nodes.
    """

    def __init__(self, seed: int | None = None, denominator: int = 4, max_vertices: int = 2):
        super().__init__(seed, denominator)
        self.max_vertices = max_vertices
        self.supply = EventSupply(start=10_000)

    def structure(self, space: StateSpace, max_events: int = 4, parallel: bool = True) -> IpBes:
        size = int(self.rng.integers(1, max_events + 1))
        return self._build(space, size, parallel)

    def _build(self, space: StateSpace, size: int, parallel: bool) -> IpBes:
        if size == 1:
            if self.rng.random() < 0.2:
                return unit(space, self.supply)
            name = f"a{int(self.rng.integers(0, 1000))}"
            return atomic(self.program(space, self.max_vertices), name, self.supply)
        left = int(self.rng.integers(1, size))
        operators = [choice, seq, par] if parallel else [choice, seq]
        operator = operators[int(self.rng.integers(0, len(operators)))]
        return operator(
            self._build(space, left, parallel),
            self._build(space, size - left, parallel),
            self.supply,
        )

    def pair(
        self, max_states: int = 3, max_events: int = 4, parallel: bool = True
    ) -> tuple[IpBes, IpBes]:
        space = self.space(max_states)
        return (
            self.structure(space, max_events, parallel),
            self.structure(space, max_events, parallel),
        )
