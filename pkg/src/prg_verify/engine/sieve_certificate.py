"""
Correctness certificate for the faulty sieve.

For thread i the certificate establishes, exactly and for every state:

- each action u_{i,j} meets its specification Q_{i,j};
- Q_{i,j} absorbs environment steps on both sides, Q_{i,j}·(δ+r) ⊑ Q_{i,j}
  and (δ+r)·Q_{i,j} ⊑ Q_{i,j};
- no action ever removes a prime or adds a number back;
- ⦃[s = s₀] r*⦄ thd_i ⦃r* Q_i⦄ holds.

The threads are then composed and their bounds combined into the
system-level bound for removing every composite.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from prg_verify.config import settings
from prg_verify.dsl.sieve import SieveModel
from prg_verify.engine.bound_calculator import (
    BoundConclusion,
    BoundPremise,
    certified_probability,
    combine_bounds,
)
from prg_verify.engine.rely_guarantee import (
    Quintuple,
    RelyCondition,
    Verdict,
    check_quintuple,
    compose_concurrent,
    guarantee_of,
)
from prg_verify.errors import DomainError, PremiseError
from prg_verify.models.reports import LawReport
from prg_verify.semantics.terms import Atom, Seq, term_refinement_failure

logger = logging.getLogger(__name__)


@dataclass
class ThreadCertificate:
    """Checks for one sieve thread."""

    thread: int
    report: LawReport = field(default_factory=LawReport)
    verdict: Verdict | None = None

    @property
    def passed(self) -> bool:
        return self.report.passed and self.verdict is not None and self.verdict.valid


def _require_small(model: SieveModel) -> None:
    if len(model.composites) > settings.sieve_verify_max_composites:
        raise DomainError(
            f"Sieve n={model.n} has {len(model.composites)} composites; certificates are "
            f"limited to {settings.sieve_verify_max_composites}"
        )


def thread_rely(model: SieveModel) -> RelyCondition:
    return RelyCondition(model.rely, name="r")


def thread_quintuple(model: SieveModel, i: int, rely: RelyCondition | None = None) -> Quintuple:
    """⦃[s = s₀] r*⦄ thd_i ⦃r* Q_i⦄."""
    rely = rely or thread_rely(model)
    return Quintuple(
        pre=model.pre,
        rely=rely,
        component=model.thread(i),
        guar=rely,
        post=model.thread_spec(i),
        name=f"thd{i}",
    )


def never_removes_prime(model: SieveModel, i: int, j: int) -> bool:
    """u_{i,j} targets a composite and only ever moves to subsets of the current state."""
    target = i * j
    if target in model.primes or target not in model.position:
        return False
    action = model.action(i, j)
    for s in model.space.indices():
        entry = action.at(s)
        if entry is None or any(t & ~s for t in entry.reach):
            return False
    return True


def sieve_thread_certificate(
    model: SieveModel, i: int, rely: RelyCondition | None = None
) -> ThreadCertificate:
    """
    Certify thread ``i`` of ``model``.

    Raises:
        DomainError: ``i`` is not a thread index, or the instance is too large
    """
    _require_small(model)
    if i not in model.thread_indices:
        raise DomainError(f"No thread {i} for n={model.n}")
    certificate = ThreadCertificate(thread=i)
    report = certificate.report
    rely = rely or thread_rely(model)

    report.check("r transitive").record(rely.transitive, "r·(r+δ) ⊑ r")
    absorb = Atom(rely.realized)

    for j in model.multipliers(i):
        action, spec = model.action(i, j), model.spec(i, j)
        tag = f"j={j}"
        failure = term_refinement_failure(Atom(action), spec)
        report.check("u ⊑ Q").record(failure is None, f"{tag} at {failure}")
        failure = term_refinement_failure(Seq(Atom(spec), absorb), spec)
        report.check("Q·(δ+r) ⊑ Q").record(failure is None, f"{tag} at {failure}")
        failure = term_refinement_failure(Seq(absorb, Atom(spec)), spec)
        report.check("(δ+r)·Q ⊑ Q").record(failure is None, f"{tag} at {failure}")
        report.check("never removes a prime").record(never_removes_prime(model, i, j), tag)
        logger.debug(f"Thread {i}, j={j}: lemmas checked")

    certificate.verdict = check_quintuple(thread_quintuple(model, i, rely))
    logger.info(
        f"Thread {i} certificate: {'passed' if certificate.passed else 'FAILED'} "
        f"({certificate.verdict.describe()})"
    )
    return certificate


@dataclass
class SieveCertificate:
    """Per-thread certificates, the composed quintuple and the combined bound."""

    model: SieveModel
    threads: list[ThreadCertificate]
    composed: Quintuple
    conclusion: BoundConclusion

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.threads)

    @property
    def bound(self) -> Fraction:
        return self.conclusion.bound


def sieve_certificate(model: SieveModel) -> SieveCertificate:
    """Certify every thread, compose them and combine their bounds."""
    _require_small(model)
    rely = thread_rely(model)
    threads = [sieve_thread_certificate(model, i, rely) for i in model.thread_indices]
    quintuples = [thread_quintuple(model, i, rely) for i in model.thread_indices]

    composed = quintuples[0]
    for q in quintuples[1:]:
        composed = compose_concurrent(composed, q)

    premises = [
        BoundPremise(
            rely=rely,
            component=q.component,
            target=model.thread_target(i),
            bound=model.thread_bound(i),
            guar=guarantee_of(q.component),
        )
        for i, q in zip(model.thread_indices, quintuples)
    ]
    if len(premises) == 1:
        single = premises[0]
        value = certified_probability(single, model.initial)
        if value < single.bound:
            raise PremiseError(f"Thread bound {single.bound} is not certified")
        conclusion = BoundConclusion(
            bound=single.bound,
            target=single.target,
            rely=rely,
            component=single.component,
            guar=single.guarantee,
            initial=model.initial,
            certified=(value, value),
        )
    else:
        conclusion = combine_bounds(premises, model.initial)
    return SieveCertificate(model, threads, composed, conclusion)
