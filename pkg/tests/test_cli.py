"""Tests for the command-line entry point and job handling."""
import argparse
import json

import pytest

from prg_verify.cli import (
    VerificationJob,
    _post_argument,
    _premise_argument,
    cli_run,
    main,
    run_batch,
)
from prg_verify.config import settings
from prg_verify.errors import JobError


def run_json(capsys, *argv):
    """Run ``main`` and decode its JSON output."""
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, json.loads(captured.out) if captured.out else None, captured.err


class TestArguments:
    """Tests for the compact argument forms."""

    def test_post(self):
        constraint = _post_argument("0, 1>=1/2")
        assert constraint.states == ["0", "1"]
        assert constraint.at_least == "1/2"

    def test_post_malformed(self):
        with pytest.raises(argparse.ArgumentTypeError):
            _post_argument("0,1")

    def test_premise(self):
        premise = _premise_argument("flip:0,1>=3/4")
        assert (premise.term, premise.target, premise.p) == ("flip", ["0", "1"], "3/4")

    def test_premise_malformed(self):
        with pytest.raises(argparse.ArgumentTypeError):
            _premise_argument("flip")


class TestJobs:
    """Tests for job validation and direct runs."""

    def test_missing_program(self):
        with pytest.raises(JobError):
            VerificationJob(query="traces", term="main").check()

    def test_missing_term(self, coin_file):
        with pytest.raises(JobError):
            VerificationJob(query="traces", input=str(coin_file)).check()

    def test_csv_only_for_sweep(self):
        with pytest.raises(JobError):
            VerificationJob(query="sieve", format="csv").check()

    def test_bound_needs_two_premises(self, coin_file):
        job = VerificationJob(query="bound", input=str(coin_file), initial="0")
        with pytest.raises(JobError):
            job.check()

    def test_sieve_job(self):
        outcome = cli_run(VerificationJob(query="sieve", n=8, p="1/2"))
        assert outcome.status == 0
        assert outcome.payload["exact"] == {"exact": "1/8", "decimal": "0.125000"}

    def test_inline_source(self, coin_source):
        outcome = cli_run(VerificationJob(query="traces", source=coin_source, term="both"))
        assert outcome.payload["count"] == 2


class TestQueries:
    """Tests for each query through ``main``."""

    def test_traces(self, capsys, coin_file):
        status, payload, _ = run_json(capsys, "traces", "-i", str(coin_file), "main")
        assert status == 0
        assert payload == {"count": 1, "traces": [["flip", "reset"]]}

    def test_traces_of_expression(self, capsys, coin_file):
        status, payload, _ = run_json(capsys, "traces", "-i", str(coin_file), "flip + set1")
        assert payload["count"] == 2

    def test_validate(self, capsys, coin_file):
        status, payload, _ = run_json(capsys, "validate", "-i", str(coin_file), "both")
        assert status == 0
        assert payload["violations"] == []
        assert [e["label"] for e in payload["structure"]["events"]] == ["reset", "set1"]

    def test_semantics(self, capsys, coin_file):
        argv = ["semantics", "-i", str(coin_file), "main", "--initial", "2"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 0
        assert payload["states"] == ["0", "1", "2"]
        assert payload["semantics"] == {"2": [["1/1", "0/1", "0/1"]]}

    def test_semantics_probabilistic(self, capsys, coin_file):
        argv = ["semantics", "-i", str(coin_file), "flip", "--initial", "0"]
        _, payload, _ = run_json(capsys, *argv)
        assert payload["semantics"]["0"] == [["1/2", "1/2", "0/1"]]

    def test_refine(self, capsys, coin_file):
        status, payload, _ = run_json(capsys, "refine", "-i", str(coin_file), "main", "main + set1")
        assert status == 0
        assert payload == {"refines": True}

    def test_refine_fails(self, capsys, coin_file):
        status, payload, _ = run_json(capsys, "refine", "-i", str(coin_file), "main + set1", "main")
        assert status == 1
        assert payload["refines"] is False
        assert payload["state"] == "0"
        assert payload["vertex"] == ["0/1", "1/1", "0/1"]

    def test_simulate(self, capsys, coin_file):
        argv = ["simulate", "-i", str(coin_file), "reset", "reset + set1"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 0
        assert payload["simulation"] == [
            {"from": [], "to": []},
            {"from": ["reset"], "to": ["reset"]},
        ]

    def test_no_simulation(self, capsys, coin_file):
        argv = ["simulate", "-i", str(coin_file), "reset + set1", "reset"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 1
        assert payload["simulation"] == "NONE"

    def test_quintuple_valid(self, capsys, coin_file):
        argv = ["quintuple", "-i", str(coin_file), "reset", "--post", "0>=1", "--verify"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 0
        assert payload["verdict"] == "VALID"
        assert payload["semantic_check"] is True
        assert payload["bound_program"]["1"] == [["1/1", "0/1", "0/1"]]

    def test_quintuple_interference(self, capsys, coin_file):
        argv = ["quintuple", "-i", str(coin_file), "reset", "--rely", "up", "--post", "0>=1"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 1
        assert payload["verdict"] == "INVALID"
        assert payload["failing_state"] == "0"
        assert payload["refinement"] is False

    def test_quintuple_with_pre(self, capsys, coin_file):
        argv = ["quintuple", "-i", str(coin_file), "set1", "--pre", "zero", "--post", "1>=1"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 0
        assert list(payload["bound_program"]) == ["0"]

    def test_quintuple_needs_post(self, capsys, coin_file):
        status = main(["quintuple", "-i", str(coin_file), "reset"])
        assert status == 2
        assert "error[dsl-cli.job]" in capsys.readouterr().err

    def test_bound(self, capsys, coin_file):
        argv = ["bound", "-i", str(coin_file), "--rely", "low", "--initial", "2"]
        argv += ["--premise", "flip:0,1>=3/4", "--premise", "skip:0,1,2>=1/2"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 0
        assert payload["bound"] == {"exact": "1/4", "decimal": "0.250000"}
        assert payload["target"] == ["0", "1"]
        assert [c["exact"] for c in payload["certified"]] == ["1/1", "1/1"]

    def test_bound_overclaimed(self, capsys, coin_file):
        argv = ["bound", "-i", str(coin_file), "--rely", "low", "--initial", "2"]
        argv += ["--premise", "flip:0>=1/2", "--premise", "skip:0,1,2>=1"]
        assert main(argv) == 2
        assert "error[rg-engine" in capsys.readouterr().err

    def test_montecarlo(self, capsys, coin_file):
        argv = ["montecarlo", "-i", str(coin_file), "main", "--initial", "2", "--trials", "200"]
        status, payload, err = run_json(capsys, *argv)
        assert status == 0
        assert payload["consistent"] is True
        assert payload["counts"] == {"0": 200}
        assert "MONTE CARLO SEMANTICS CHECK" in err

    def test_axioms(self, capsys):
        status, payload, _ = run_json(capsys, "axioms", "--samples", "3", "--seed", "1")
        assert status == 0
        assert payload["axioms"]["samples"] == 3


class TestSieveCommand:
    """Tests for the sieve query."""

    def test_bounds(self, capsys):
        status, payload, _ = run_json(capsys, "sieve", "--n", "8", "--p", "1/2")
        assert status == 0
        assert payload["f"]["exact"] == "1/8"
        assert payload["g"]["exact"] == "1/8"
        assert payload["threads"] == {"2": "u2_2 ; u2_3 ; u2_4"}
        assert payload["f_root"] == ["0/1", "0/1"]

    def test_verify(self, capsys):
        status, payload, _ = run_json(capsys, "sieve", "--n", "8", "--p", "1/2", "--verify")
        assert status == 0
        assert payload["certificate"]["passed"] is True
        assert payload["certificate"]["bound"]["exact"] == "1/8"

    def test_sweep_csv(self, capsys):
        argv = ["sieve", "--n", "15", "--sweep", "--step", "1/2", "--format", "csv"]
        assert main(argv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "p,f,g,exact"
        assert lines[2] == "1/2,-59/64,1/256,9/1024"
        assert len(lines) == 4

    def test_sweep_json(self, capsys):
        argv = ["sieve", "--n", "15", "--sweep", "--step", "1/10"]
        status, payload, _ = run_json(capsys, *argv)
        assert status == 0
        assert payload["f_root"] == ["217/250", "869/1000"]
        assert len(payload["rows"]) == 11

    def test_csv_rejected(self, capsys, coin_file):
        assert main(["traces", "-i", str(coin_file), "main", "--format", "csv"]) == 2


class TestErrors:
    """Tests for error reporting and exit status 2."""

    def test_missing_file(self, capsys, tmp_path):
        assert main(["traces", "-i", str(tmp_path / "absent.prg"), "main"]) == 2
        assert "not found" in capsys.readouterr().err

    def test_syntax_error(self, capsys, tmp_path):
        path = tmp_path / "broken.prg"
        path.write_text("states 0;\nterm t = (")
        assert main(["traces", "-i", str(path), "t"]) == 2
        assert "error[dsl-cli.syntax]: 2:" in capsys.readouterr().err

    def test_unknown_state(self, capsys, coin_file):
        assert main(["semantics", "-i", str(coin_file), "main", "--initial", "7"]) == 2

    def test_cap_exceeded(self, capsys, coin_file, monkeypatch):
        monkeypatch.setattr(settings, "cap", settings.cap)
        assert main(["--cap", "1", "traces", "-i", str(coin_file), "both"]) == 2
        assert "error[ipbes" in capsys.readouterr().err

    def test_output_file(self, tmp_path, coin_file):
        target = tmp_path / "out.json"
        assert main(["traces", "-i", str(coin_file), "main", "-o", str(target)]) == 0
        assert json.loads(target.read_text())["count"] == 1


class TestBatch:
    """Tests for batch runs."""

    def test_batch(self, tmp_path, coin_file):
        jobs = tmp_path / "jobs.json"
        jobs.write_text(
            json.dumps(
                [
                    {"query": "traces", "input": str(coin_file), "term": "main"},
                    {"query": "refine", "input": str(coin_file), "term": "set1", "other": "reset"},
                    {"query": "sieve", "n": 8, "p": "1/2"},
                ]
            )
        )
        out = tmp_path / "results"
        assert run_batch(jobs, out) == 1
        names = sorted(p.name for p in out.iterdir())
        assert names == ["000-traces.json", "001-refine.json", "002-sieve.json"]
        assert json.loads((out / "000-traces.json").read_text())["count"] == 1

    def test_invalid_job(self, tmp_path):
        jobs = tmp_path / "jobs.json"
        jobs.write_text(json.dumps([{"query": "nope"}, {"query": "traces"}]))
        out = tmp_path / "results"
        assert run_batch(jobs, out) == 2
        assert json.loads((out / "000-invalid.json").read_text())["error"] == "dsl-cli.job"
        assert json.loads((out / "001-traces.json").read_text())["error"] == "dsl-cli.job"

    def test_not_a_list(self, tmp_path):
        jobs = tmp_path / "jobs.json"
        jobs.write_text("{}")
        with pytest.raises(JobError):
            run_batch(jobs, tmp_path / "results")

    def test_batch_command(self, tmp_path, coin_file):
        jobs = tmp_path / "jobs.json"
        jobs.write_text(json.dumps([{"query": "traces", "input": str(coin_file), "term": "both"}]))
        out = tmp_path / "results"
        assert main(["batch", "--jobs", str(jobs), "--output-dir", str(out)]) == 0
        assert (out / "000-traces.json").exists()
