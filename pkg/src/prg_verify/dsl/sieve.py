"""
Faulty sieve of Eratosthenes.

Thread i removes the multiples i·2, i·3, …, i·(n÷i) from the candidate
set {2..n}, but each removal only succeeds with probability p. The
environment may remove any numbers at any time.

Only composites are ever removed, so a state is the bitmask of the
composites still present (bit k for ``composites[k]``) and the state with
index m is the mask m.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import isqrt

from prg_verify.config import settings
from prg_verify.dsl.ast import AtomTerm, SeqTerm, Term
from prg_verify.dsl.elaborate import Declarations, elaborate
from prg_verify.errors import DomainError
from prg_verify.events.builders import EventSupply, par_all
from prg_verify.models.convex import ConvexSet, Halfspace
from prg_verify.models.distribution import Distribution
from prg_verify.models.event_structure import IpBes
from prg_verify.models.program import ConvexProgram, Entry
from prg_verify.models.state_space import StateSpace
from prg_verify.utils.rationals import Rational, as_probability

logger = logging.getLogger(__name__)


def primes_up_to(n: int) -> list[int]:
    flags = [True] * (n + 1)
    flags[:2] = [False] * min(2, n + 1)
    for k in range(2, isqrt(n) + 1):
        if flags[k]:
            flags[k * k :: k] = [False] * len(range(k * k, n + 1, k))
    return [k for k in range(2, n + 1) if flags[k]]


def submasks(mask: int) -> list[int]:
    """Every t ⊆ mask, including mask and 0."""
    result = []
    t = mask
    while True:
        result.append(t)
        if t == 0:
            return result
        t = (t - 1) & mask


@dataclass
class SieveModel:
    """Programs, threads and specifications of one sieve instance."""

    n: int
    p: Fraction
    composites: tuple[int, ...] = field(init=False)
    primes: tuple[int, ...] = field(init=False)
    space: StateSpace = field(init=False)

    def __post_init__(self) -> None:
        self.primes = tuple(primes_up_to(self.n))
        prime_set = set(self.primes)
        self.composites = tuple(k for k in range(4, self.n + 1) if k not in prime_set)
        self.space = StateSpace.indexed(1 << len(self.composites))
        self._actions: dict[tuple[int, int], ConvexProgram] = {}
        self._specs: dict[tuple[int, int], ConvexProgram] = {}

    # -- layout --------------------------------------------------------------

    @property
    def initial(self) -> int:
        """s₀: every composite still present."""
        return (1 << len(self.composites)) - 1

    @cached_property
    def position(self) -> dict[int, int]:
        return {c: k for k, c in enumerate(self.composites)}

    @property
    def thread_indices(self) -> range:
        """i = 2 .. ⌊√n⌋."""
        return range(2, isqrt(self.n) + 1)

    def multipliers(self, i: int) -> range:
        """j = 2 .. n÷i."""
        return range(2, self.n // i + 1)

    def bit(self, number: int) -> int:
        return 1 << self.position[number]

    def members(self, mask: int) -> list[int]:
        """The numbers of {2..n} present in state ``mask`` (primes included)."""
        present = {c for c in self.composites if mask & self.bit(c)}
        return sorted(present | set(self.primes))

    # -- programs ------------------------------------------------------------

    def action(self, i: int, j: int) -> ConvexProgram:
        """u_{i,j}(s) = (1−p)·δ_s + p·δ_{s∖{ij}}."""
        key = (i, j)
        if key not in self._actions:
            bit = self.bit(i * j)
            space, p = self.space, self.p

            def rule(s: int) -> Entry:
                if not s & bit or p == 0:
                    return ConvexSet.point(Distribution.point_at(space, s))
                if p == 1:
                    return ConvexSet.point(Distribution.point_at(space, s & ~bit))
                mu = Distribution(space, ((s & ~bit, p), (s, 1 - p)))
                return ConvexSet.point(mu)

            self._actions[key] = ConvexProgram.from_rule(space, rule, name=self.action_name(i, j))
        return self._actions[key]

    @staticmethod
    def action_name(i: int, j: int) -> str:
        return f"u{i}_{j}"

    @cached_property
    def rely(self) -> ConvexProgram:
        """r(s) = conv{δ_t | t ⊆ s}: the environment only removes numbers."""
        space = self.space

        def rule(s: int) -> Entry:
            points = (Distribution.point_at(space, t) for t in submasks(s))
            return ConvexSet.from_points(space, points)

        return ConvexProgram.from_rule(space, rule, name="r")

    @cached_property
    def pre(self) -> ConvexProgram:
        """The test [s = s₀]."""
        return ConvexProgram.test(self.space, [self.initial], name="s0")

    # -- targets and specifications -----------------------------------------

    def target(self, i: int, j: int) -> frozenset[int]:
        """O_{i,j}: states where i·j has been removed."""
        bit = self.bit(i * j)
        return frozenset(s for s in self.space.indices() if not s & bit)

    def thread_target(self, i: int) -> frozenset[int]:
        """O_i: every multiple handled by thread i removed."""
        mask = 0
        for j in self.multipliers(i):
            mask |= self.bit(i * j)
        return frozenset(s for s in self.space.indices() if not s & mask)

    def _spec(self, target: frozenset[int], bound: Fraction, name: str) -> ConvexProgram:
        space = self.space
        removal = Halfspace.mass_at_least(target, bound)

        def rule(s: int) -> Entry:
            below = Halfspace.mass_at_least(submasks(s), Fraction(1))
            return ConvexSet.from_halfspaces(space, (removal, below))

        return ConvexProgram.from_rule(space, rule, name=name)

    def spec(self, i: int, j: int) -> ConvexProgram:
        """Q_{i,j}(s) = {μ | μ(O_{i,j}) ≥ p ∧ μ(↓s) = 1}."""
        key = (i, j)
        if key not in self._specs:
            self._specs[key] = self._spec(self.target(i, j), self.p, f"Q{i}_{j}")
        return self._specs[key]

    def thread_bound(self, i: int) -> Fraction:
        return self.p ** (self.n // i - 1)

    def thread_spec(self, i: int) -> ConvexProgram:
        """
        Q_i(s) = {μ | μ(O_i) ≥ p^(n÷i−1) ∧ μ(↓s) = 1}.

        This is the single-halfspace consequence of the per-multiple
        specifications Q_{i,2}·…·Q_{i,n÷i}, not their composition: each
        removal of i·j alone succeeds with probability p, and only the joint
        event O_i is bounded here. The certificate checks thread i against
        this coarser post.
        """
        return self._spec(self.thread_target(i), self.thread_bound(i), f"Q{i}")

    # -- threads -------------------------------------------------------------

    @cached_property
    def declarations(self) -> Declarations:
        atoms = {
            self.action_name(i, j): self.action(i, j)
            for i in self.thread_indices
            for j in self.multipliers(i)
        }
        atoms["r"] = self.rely
        return Declarations(self.space, atoms, {})

    def thread_term(self, i: int) -> Term:
        """u_{i,2} ; u_{i,3} ; … ; u_{i,n÷i}."""
        term: Term | None = None
        for j in self.multipliers(i):
            atom = AtomTerm(self.action_name(i, j))
            term = atom if term is None else SeqTerm(term, atom)
        if term is None:
            raise DomainError(f"Thread {i} has no multiples below {self.n}")
        return term

    def thread(self, i: int, supply: EventSupply | None = None) -> IpBes:
        return elaborate(self.thread_term(i), self.declarations, supply)

    def composed(self, supply: EventSupply | None = None) -> IpBes:
        """thd₂ ‖ thd₃ ‖ … under the trivial environment."""
        source = supply if supply is not None else EventSupply()
        return par_all([self.thread(i, source) for i in self.thread_indices], source)

    def removal_counts(self) -> dict[int, int]:
        """k_c: how many thread actions target composite c."""
        counts = {c: 0 for c in self.composites}
        for i in self.thread_indices:
            for j in self.multipliers(i):
                counts[i * j] += 1
        return counts

    def __repr__(self) -> str:
        return f"SieveModel(n={self.n}, p={self.p}, composites={len(self.composites)})"


def sieve_generate(n: int, p: Rational) -> SieveModel:
    """
    Build the sieve instance for ``n`` and removal probability ``p``.

    Raises:
        DomainError: n outside 4 .. settings.sieve_max_n, or p outside [0, 1]
    """
    if not 4 <= n <= settings.sieve_max_n:
        raise DomainError(f"Sieve size n={n} outside 4..{settings.sieve_max_n}")
    model = SieveModel(n, as_probability(p))
    logger.info(
        f"Sieve n={n}: threads {list(model.thread_indices)}, "
        f"{len(model.composites)} composites, {len(model.space)} states"
    )
    return model
