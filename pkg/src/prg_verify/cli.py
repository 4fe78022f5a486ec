"""Command-line entry point."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Hashable, Sequence

import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from prg_verify.config import settings
from prg_verify.dsl.ast import Module
from prg_verify.dsl.elaborate import Declarations, build_programs, elaborate
from prg_verify.dsl.parser import format_term, parse_module, parse_term
from prg_verify.dsl.sieve import sieve_generate
from prg_verify.engine.bound_calculator import (
    BoundPremise,
    f_root_bracket,
    probability_bound,
    sieve_bounds,
    sieve_exact,
    sieve_sweep,
)
from prg_verify.engine.rely_guarantee import (
    Quintuple,
    RelyCondition,
    check_by_semantics,
    check_quintuple,
    guarantee_of,
)
from prg_verify.engine.sieve_certificate import sieve_certificate
from prg_verify.errors import JobError, PrgError
from prg_verify.events.traces import maximal_traces
from prg_verify.events.validation import validate
from prg_verify.models.convex import ConvexSet, Halfspace
from prg_verify.models.event_structure import IpBes
from prg_verify.models.program import ConvexProgram
from prg_verify.scheduling.monte_carlo import MonteCarloOracle
from prg_verify.scheduling.semantics import (
    SemanticsEvaluator,
    semantics,
    semantics_program,
    uniform_policy_distribution,
)
from prg_verify.semantics.axioms import axiom_suite
from prg_verify.semantics.operations import refinement_witness
from prg_verify.simulation.laws import check_law_suite
from prg_verify.simulation.search import find_t_simulation
from prg_verify.utils.rationals import format_rational, parse_rational, render_rational

logger = logging.getLogger(__name__)


class QueryKind(str, Enum):
    """What a verification job asks."""

    VALIDATE = "validate"
    TRACES = "traces"
    SEMANTICS = "semantics"
    REFINE = "refine"
    SIMULATE = "simulate"
    QUINTUPLE = "quintuple"
    BOUND = "bound"
    SIEVE = "sieve"
    MONTECARLO = "montecarlo"
    AXIOMS = "axioms"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class PostConstraint(BaseModel):
    """μ(states) ≥ at_least, imposed at every initial state."""

    states: list[str]
    at_least: str = "1"


class Premise(BaseModel):
    """One premise of the bound rule: a term, a target set and its claimed probability."""

    term: str
    target: list[str]
    p: str


class VerificationJob(BaseModel):
    """One query against a program file, or against the built-in sieve."""

    query: QueryKind
    input: str | None = Field(default=None, description="Path to a program file")
    source: str | None = Field(default=None, description="Program text, instead of input")
    term: str | None = None
    other: str | None = None
    initial: str | None = None
    depth: int = Field(default=2, ge=0)
    pre: str | None = None
    rely: str | None = None
    guar: str | None = None
    post: list[PostConstraint] = Field(default_factory=list)
    premises: list[Premise] = Field(default_factory=list)
    n: int = 15
    p: str = "9/10"
    sweep: bool = False
    step: str = "1/100"
    verify: bool = False
    seed: int = 0
    trials: int = Field(default=10_000, ge=1)
    samples: int = Field(default=50, ge=1)
    format: OutputFormat = OutputFormat.JSON
    output: str | None = None

    def check(self) -> None:
        """
        Reject jobs whose parameters do not fit their kind.

        Raises:
            JobError: a required parameter is missing
        """
        needs_program = self.query not in (QueryKind.SIEVE, QueryKind.AXIOMS)
        if needs_program and self.input is None and self.source is None:
            raise JobError(f"{self.query.value} needs a program (--input)")
        if self.query in (
            QueryKind.VALIDATE,
            QueryKind.TRACES,
            QueryKind.SEMANTICS,
            QueryKind.REFINE,
            QueryKind.SIMULATE,
            QueryKind.QUINTUPLE,
            QueryKind.MONTECARLO,
        ) and not self.term:
            raise JobError(f"{self.query.value} needs a term")
        if self.query in (QueryKind.REFINE, QueryKind.SIMULATE) and not self.other:
            raise JobError(f"{self.query.value} needs a second term")
        if self.query == QueryKind.QUINTUPLE and not self.post:
            raise JobError("quintuple needs at least one post constraint")
        if self.query == QueryKind.MONTECARLO and self.initial is None:
            raise JobError("montecarlo needs an initial state")
        if self.query == QueryKind.BOUND and (len(self.premises) != 2 or self.initial is None):
            raise JobError("bound needs exactly two premises and an initial state")
        if self.format == OutputFormat.CSV and not (self.query == QueryKind.SIEVE and self.sweep):
            raise JobError("CSV output is only available for the sieve sweep")


@dataclass
class JobOutcome:
    """Exit status and artifacts of one job."""

    status: int
    payload: dict[str, Any] = field(default_factory=dict)
    table: pd.DataFrame | None = None
    text: str | None = None


# -- rendering ---------------------------------------------------------------


def _state_text(state: Hashable) -> str:
    return str(state)


def render_set(entry: ConvexSet | None) -> list[list[str]] | None:
    """Vertex matrix, one dense row of ``num/den`` strings per vertex."""
    if entry is None:
        return None
    vertices = entry.vertex_form(settings.cap).vertices
    return [[format_rational(w) for w in v.dense()] for v in vertices]


def render_structure(es: IpBes) -> dict[str, Any]:
    position = {e: k for k, e in enumerate(es.events)}
    return {
        "events": [
            {"index": position[e], "label": es.label_name(e)} for e in es.events
        ],
        "bundles": [
            {"sources": sorted(position[x] for x in b.sources), "target": position[b.target]}
            for b in sorted(es.bundles, key=lambda b: (position[b.target], sorted(b.sources)))
        ],
        "conflicts": sorted({tuple(sorted((position[a], position[b]))) for a, b in es.conflict}),
        "finals": sorted(sorted(position[e] for e in x) for x in es.finals),
    }


def _rational(value: Fraction) -> dict[str, str]:
    rendered = render_rational(value)
    return {"exact": rendered.exact, "decimal": rendered.decimal}


# -- job context -------------------------------------------------------------


@dataclass
class _Context:
    module: Module
    decls: Declarations

    def term(self, ref: str) -> IpBes:
        return elaborate(parse_term(ref, self.module), self.decls)

    def state(self, text: str) -> Hashable:
        candidate: Hashable = int(text) if text.lstrip("-").isdigit() else text
        if candidate not in self.decls.space:
            raise JobError(f"Unknown state {text!r}")
        return candidate

    def program(self, name: str) -> ConvexProgram:
        return self.decls.lookup(name)


def _context(job: VerificationJob) -> _Context:
    if job.source is not None:
        text = job.source
    else:
        assert job.input is not None
        path = Path(job.input)
        if not path.exists():
            raise JobError(f"Program file {path} not found")
        text = path.read_text(encoding="utf-8")
    module = parse_module(text)
    return _Context(module, build_programs(module))


# -- queries -----------------------------------------------------------------


def _validate(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.term is not None
    es = elaborate(parse_term(job.term, ctx.module), ctx.decls, check_feasible=False)
    report = validate(es)
    payload = {"structure": render_structure(es), **report.model_dump(mode="json")}
    return JobOutcome(0 if report.valid else 1, payload)


def _traces(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.term is not None
    es = ctx.term(job.term)
    found = maximal_traces(es, settings.cap)
    rendered = [[es.label_name(e) for e in trace] for trace in found]
    return JobOutcome(0, {"count": len(found), "traces": rendered})


def _semantics(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.term is not None
    es = ctx.term(job.term)
    space = ctx.decls.space
    evaluator = SemanticsEvaluator(es)
    initials = [ctx.state(job.initial)] if job.initial is not None else list(space)
    result = {
        _state_text(s): render_set(semantics(es, s, evaluator=evaluator)) for s in initials
    }
    payload = {"states": [_state_text(s) for s in space], "semantics": result}
    return JobOutcome(0, payload)


def _refine(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.term is not None and job.other is not None
    left = semantics_program(ctx.term(job.term))
    right = semantics_program(ctx.term(job.other))
    failure = refinement_witness(left, right)
    payload: dict[str, Any] = {"refines": failure is None}
    if failure is not None:
        payload["state"] = _state_text(ctx.decls.space.state(failure.state))
        if failure.vertex is not None:
            payload["vertex"] = [format_rational(w) for w in failure.vertex.dense()]
    return JobOutcome(0 if failure is None else 1, payload)


def _simulate(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.term is not None and job.other is not None
    lower, upper = ctx.term(job.term), ctx.term(job.other)
    result = find_t_simulation(lower, upper, settings.cap)
    if result.mapping is None:
        return JobOutcome(1, {"simulation": "NONE", "explored": result.explored})
    mapping = [
        {
            "from": [lower.label_name(e) for e in alpha],
            "to": [upper.label_name(e) for e in beta],
        }
        for alpha, beta in sorted(result.mapping.items(), key=lambda item: (len(item[0]), item[0]))
    ]
    return JobOutcome(0, {"simulation": mapping, "explored": result.explored})


def _post_program(ctx: _Context, constraints: Sequence[PostConstraint]) -> ConvexProgram:
    space = ctx.decls.space
    halfspaces = [
        Halfspace.at_least(space, [ctx.state(s) for s in c.states], parse_rational(c.at_least))
        for c in constraints
    ]
    entry = ConvexSet.from_halfspaces(space, halfspaces)
    return ConvexProgram(space, [entry] * len(space), name="post")


def _rely(ctx: _Context, job: VerificationJob) -> RelyCondition:
    if job.rely:
        return RelyCondition(ctx.program(job.rely), name=job.rely)
    return RelyCondition.trivial(ctx.decls.space)


def _quintuple(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.term is not None
    space = ctx.decls.space
    component = ctx.term(job.term)
    pre = ctx.program(job.pre) if job.pre else ConvexProgram.identity(space)
    rely = _rely(ctx, job)
    guar_base = ctx.program(job.guar) if job.guar else guarantee_of(component)
    q = Quintuple(
        pre=pre,
        rely=rely,
        component=component,
        guar=RelyCondition(guar_base, name=job.guar or "g"),
        post=_post_program(ctx, job.post),
        name=job.term,
    )
    verdict = check_quintuple(q)
    payload: dict[str, Any] = {
        "verdict": "VALID" if verdict.valid else "INVALID",
        "detail": verdict.describe(),
        "refinement": verdict.refinement_holds,
        "guarantee": verdict.guarantee_holds,
        "bound": repr(verdict.bound),
    }
    if len(space) <= 16:
        program = verdict.bound.evaluate(sorted(pre.domain()))
        payload["bound_program"] = {
            _state_text(space.state(i)): render_set(program.at(i)) for i in sorted(pre.domain())
        }
    if verdict.failing_state is not None:
        payload["failing_state"] = _state_text(verdict.failing_state)
    if job.verify:
        payload["semantic_check"] = check_by_semantics(q, job.depth)
    return JobOutcome(0 if verdict.valid else 1, payload)


def _bound(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.initial is not None
    space = ctx.decls.space
    rely = _rely(ctx, job)
    premises = [
        BoundPremise(
            rely=rely,
            component=ctx.term(p.term),
            target=frozenset(space.index(ctx.state(s)) for s in p.target),
            bound=parse_rational(p.p),
        )
        for p in job.premises
    ]
    conclusion = probability_bound(premises[0], premises[1], ctx.state(job.initial))
    payload = {
        "bound": _rational(conclusion.bound),
        "target": [_state_text(space.state(i)) for i in sorted(conclusion.target)],
        "certified": [_rational(c) for c in conclusion.certified],
    }
    return JobOutcome(0, payload)


def _sieve(job: VerificationJob) -> JobOutcome:
    p = parse_rational(job.p)
    if job.sweep:
        table = sieve_sweep(job.n, parse_rational(job.step))
        lo, hi = f_root_bracket(job.n)
        payload = {"n": job.n, "f_root": [format_rational(lo), format_rational(hi)]}
        return JobOutcome(0, payload, table=table)

    bounds = sieve_bounds(job.n, p)
    exact = sieve_exact(job.n, p)
    lo, hi = f_root_bracket(job.n)
    model = sieve_generate(job.n, p)
    payload: dict[str, Any] = {
        "n": job.n,
        "p": format_rational(p),
        "f": _rational(bounds.f),
        "g": _rational(bounds.g),
        "exact": _rational(exact),
        "f_exponents": bounds.f_exponents,
        "g_exponents": bounds.g_exponents,
        "f_root": [format_rational(lo), format_rational(hi)],
        "threads": {i: format_term(model.thread_term(i)) for i in model.thread_indices},
    }
    status = 0
    if job.verify:
        certificate = sieve_certificate(model)
        payload["certificate"] = {
            "passed": certificate.passed,
            "bound": _rational(certificate.bound),
            "threads": {
                t.thread: {
                    "verdict": t.verdict.describe() if t.verdict else None,
                    "checks": [c.model_dump() for c in t.report.checks],
                }
                for t in certificate.threads
            },
        }
        status = 0 if certificate.passed else 1
    return JobOutcome(status, payload)


def _montecarlo(job: VerificationJob) -> JobOutcome:
    ctx = _context(job)
    assert job.term is not None and job.initial is not None
    es = ctx.term(job.term)
    initial = ctx.state(job.initial)
    oracle = MonteCarloOracle(trials=job.trials, seed=job.seed)
    result = oracle.sample(es, initial)
    reference = uniform_policy_distribution(es, initial)
    consistent = oracle.check_consistency(result, reference)
    payload = {
        "consistent": consistent,
        "counts": {_state_text(s): c for s, c in result.counts.items()},
        "reference": {_state_text(s): format_rational(w) for s, w in reference.as_dict().items()},
    }
    return JobOutcome(0 if consistent else 1, payload, text=oracle.print_report(result, reference))


def _axioms(job: VerificationJob) -> JobOutcome:
    axioms = axiom_suite(samples=job.samples, seed=job.seed)
    laws = check_law_suite(samples=job.samples, seed=job.seed)
    payload = {
        "axioms": axioms.model_dump(),
        "simulation_laws": laws.model_dump(),
    }
    return JobOutcome(0 if axioms.passed and laws.passed else 1, payload)


QUERIES: dict[QueryKind, Callable[[VerificationJob], JobOutcome]] = {
    QueryKind.VALIDATE: _validate,
    QueryKind.TRACES: _traces,
    QueryKind.SEMANTICS: _semantics,
    QueryKind.REFINE: _refine,
    QueryKind.SIMULATE: _simulate,
    QueryKind.QUINTUPLE: _quintuple,
    QueryKind.BOUND: _bound,
    QueryKind.SIEVE: _sieve,
    QueryKind.MONTECARLO: _montecarlo,
    QueryKind.AXIOMS: _axioms,
}


def cli_run(job: VerificationJob) -> JobOutcome:
    """
    Run one job.

    Returns:
        JobOutcome with status 0 (VALID / true) or 1 (INVALID / false)

    Raises:
        PrgError: any toolkit error; callers map it to status 2
    """
    job.check()
    logger.info(f"Running {job.query.value} job")
    outcome = QUERIES[job.query](job)
    logger.info(f"{job.query.value} finished with status {outcome.status}")
    return outcome


def write_outcome(job: VerificationJob, outcome: JobOutcome, target: Path | None = None) -> None:
    """Emit the artifacts of ``outcome`` to ``target`` or stdout."""
    if job.format == OutputFormat.CSV and outcome.table is not None:
        body = outcome.table[["p", "f", "g", "exact"]].to_csv(index=False)
    else:
        payload = dict(outcome.payload)
        if outcome.table is not None:
            payload["rows"] = outcome.table.to_dict(orient="records")
        body = json.dumps(payload, indent=2, ensure_ascii=False, default=str) + "\n"
    if target is None:
        if outcome.text:
            print(outcome.text, file=sys.stderr)
        sys.stdout.write(body)
    else:
        target.write_text(body, encoding="utf-8")


def run_batch(path: Path, output_dir: Path) -> int:
    """Run every job of a JSON list, one output file per job; the worst status wins."""
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise JobError(f"Cannot read job file {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise JobError("Job file must hold a JSON list")
    output_dir.mkdir(parents=True, exist_ok=True)

    worst = 0
    for number, item in enumerate(raw):
        try:
            job = VerificationJob.model_validate(item)
        except ValidationError as exc:
            target = output_dir / f"{number:03d}-invalid.json"
            target.write_text(json.dumps({"error": JobError.code, "message": str(exc)}, indent=2))
            worst = 2
            continue
        suffix = "csv" if job.format == OutputFormat.CSV else "json"
        target = output_dir / f"{number:03d}-{job.query.value}.{suffix}"
        try:
            outcome = cli_run(job)
            write_outcome(job, outcome, target)
            worst = max(worst, outcome.status)
        except PrgError as exc:
            logger.error(f"Job {number} failed: {exc}")
            target.with_suffix(".json").write_text(
                json.dumps({"error": exc.code, "message": str(exc)}, indent=2, ensure_ascii=False)
            )
            worst = 2
    logger.info(f"Batch of {len(raw)} jobs finished with status {worst}")
    return worst


def setup_logging(log_file: Path | None = None, level: str = "INFO") -> None:
    """Setup logging for the CLI; stdout is reserved for results."""
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]

    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


def _post_argument(text: str) -> PostConstraint:
    """``s1,s2>=p``."""
    states, sep, bound = text.partition(">=")
    if not sep or not states.strip():
        raise argparse.ArgumentTypeError(f"Post constraint {text!r} is not of the form s1,s2>=p")
    return PostConstraint(states=[s.strip() for s in states.split(",")], at_least=bound.strip())


def _premise_argument(text: str) -> Premise:
    """``term:s1,s2>=p``."""
    term, sep, rest = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"Premise {text!r} is not of the form term:s1,s2>=p")
    constraint = _post_argument(rest)
    return Premise(term=term.strip(), target=constraint.states, p=constraint.at_least)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prg", description="Probabilistic rely-guarantee verification"
    )
    parser.add_argument("--cap", type=int, default=None, help="Enumeration cap (overrides PRG_CAP)")
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level")
    parser.add_argument("--log-file", type=Path, default=None, help="Also log to this file")
    sub = parser.add_subparsers(dest="query", required=True)

    def command(name: str, help_text: str, program: bool = True) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text)
        if program:
            cmd.add_argument("--input", "-i", required=False, help="Program file")
        cmd.add_argument("--format", choices=["json", "csv"], default="json")
        cmd.add_argument("--output", "-o", default=None, help="Write results to this file")
        return cmd

    for name, help_text in (
        ("validate", "Check well-formedness of a term's structure"),
        ("traces", "List maximal traces"),
        ("semantics", "Vertices of the semantics per initial state"),
        ("montecarlo", "Sample runs and compare with the exact semantics"),
    ):
        cmd = command(name, help_text)
        cmd.add_argument("term", help="Term name or expression")
        cmd.add_argument("--initial", default=None)
        if name == "montecarlo":
            cmd.add_argument("--trials", type=int, default=10_000)
            cmd.add_argument("--seed", type=int, default=0)

    for name, help_text in (
        ("refine", "Decide A ⊑ B"),
        ("simulate", "Search a t-simulation of A by B"),
    ):
        cmd = command(name, help_text)
        cmd.add_argument("term")
        cmd.add_argument("other")

    cmd = command("quintuple", "Check ⦃pre rely⦄ term ⦃guar post⦄")
    cmd.add_argument("term")
    cmd.add_argument("--pre", default=None, help="Guard name (default: every state)")
    cmd.add_argument("--rely", default=None, help="Atom name (default: δ)")
    cmd.add_argument("--guar", default=None, help="Atom name (default: strongest guarantee)")
    cmd.add_argument("--post", type=_post_argument, action="append", default=[], help="s1,s2>=p")
    cmd.add_argument("--verify", action="store_true", help="Also check the bounded semantics")
    cmd.add_argument("--depth", type=int, default=2, help="Rely unfolding depth for --verify")

    cmd = command("bound", "Combine two premises μ(O) ≥ p into p₁ + p₂ − 1")
    cmd.add_argument("--premise", type=_premise_argument, action="append", default=[])
    cmd.add_argument("--rely", default=None)
    cmd.add_argument("--initial", required=True)

    cmd = command("sieve", "Bounds and exact probability for the faulty sieve", program=False)
    cmd.add_argument("--n", type=int, default=15)
    cmd.add_argument("--p", default="9/10")
    cmd.add_argument("--sweep", action="store_true", help="Sweep p over a grid")
    cmd.add_argument("--step", default="1/100")
    cmd.add_argument("--verify", action="store_true", help="Certify every thread and compose")

    cmd = command("axioms", "Run the algebraic and simulation law suites", program=False)
    cmd.add_argument("--samples", type=int, default=50)
    cmd.add_argument("--seed", type=int, default=0)

    batch = sub.add_parser("batch", help="Run a JSON list of jobs")
    batch.add_argument("--jobs", type=Path, required=True)
    batch.add_argument("--output-dir", type=Path, default=Path("results"))
    return parser


def job_from_args(args: argparse.Namespace) -> VerificationJob:
    fields = {
        key: value
        for key, value in vars(args).items()
        if key in VerificationJob.model_fields and value is not None
    }
    if "premise" in vars(args):
        fields["premises"] = args.premise
    return VerificationJob.model_validate(fields)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run the job and return the exit status."""
    from dotenv import load_dotenv

    load_dotenv()

    args = build_parser().parse_args(argv)
    setup_logging(args.log_file, args.log_level)
    if args.cap is not None:
        settings.cap = args.cap

    try:
        if args.query == "batch":
            return run_batch(args.jobs, args.output_dir)
        try:
            job = job_from_args(args)
        except ValidationError as exc:
            raise JobError(str(exc)) from exc
        outcome = cli_run(job)
        write_outcome(job, outcome, Path(job.output) if job.output else None)
        return outcome.status
    except PrgError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
