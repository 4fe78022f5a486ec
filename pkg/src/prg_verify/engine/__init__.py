"""Rely/guarantee reasoning and probability bounds."""
from __future__ import annotations

from prg_verify.engine.rely_guarantee import (
    Quintuple,
    RelyCondition,
    Verdict,
    check_by_semantics,
    check_guarantee,
    check_quintuple,
    compose_concurrent,
    guarantee_of,
    interleave_rely,
    rely_intersection,
)
from prg_verify.engine.bound_calculator import (
    BoundConclusion,
    BoundPremise,
    SieveBounds,
    certified_probability,
    combine_bounds,
    f_root_bracket,
    probability_bound,
    sieve_bounds,
    sieve_exact,
    sieve_sweep,
)
from prg_verify.engine.sieve_certificate import (
    SieveCertificate,
    ThreadCertificate,
    sieve_certificate,
    sieve_thread_certificate,
    thread_quintuple,
)

__all__ = [
    "BoundConclusion",
    "BoundPremise",
    "Quintuple",
    "RelyCondition",
    "SieveBounds",
    "SieveCertificate",
    "ThreadCertificate",
    "Verdict",
    "certified_probability",
    "check_by_semantics",
    "check_guarantee",
    "check_quintuple",
    "combine_bounds",
    "compose_concurrent",
    "f_root_bracket",
    "guarantee_of",
    "interleave_rely",
    "probability_bound",
    "rely_intersection",
    "sieve_bounds",
    "sieve_certificate",
    "sieve_exact",
    "sieve_sweep",
    "sieve_thread_certificate",
    "thread_quintuple",
]
