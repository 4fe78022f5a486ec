"""Tests for the faulty sieve model and its certificate."""
from fractions import Fraction

import pytest

from prg_verify.dsl.parser import format_term
from prg_verify.dsl.sieve import primes_up_to, sieve_generate, submasks
from prg_verify.engine.sieve_certificate import (
    never_removes_prime,
    sieve_certificate,
    sieve_thread_certificate,
    thread_quintuple,
)
from prg_verify.errors import DomainError
from prg_verify.events.traces import maximal_traces
from prg_verify.semantics.operations import is_transitive

NINE_TENTHS = Fraction(9, 10)


@pytest.fixture
def model():
    return sieve_generate(15, NINE_TENTHS)


@pytest.fixture
def small():
    """n = 8: one thread removing 4, 6 and 8."""
    return sieve_generate(8, Fraction(1, 2))


class TestHelpers:
    """Tests for the number helpers."""

    def test_primes(self):
        assert primes_up_to(15) == [2, 3, 5, 7, 11, 13]
        assert primes_up_to(1) == []

    def test_submasks(self):
        assert sorted(submasks(0b101)) == [0, 1, 4, 5]
        assert submasks(0) == [0]


class TestSieveModel:
    """Tests for the state encoding and the programs."""

    def test_layout(self, model):
        assert model.composites == (4, 6, 8, 9, 10, 12, 14, 15)
        assert len(model.space) == 256
        assert model.initial == 255
        assert list(model.thread_indices) == [2, 3]
        assert list(model.multipliers(3)) == [2, 3, 4, 5]

    def test_members(self, model):
        assert model.members(model.initial) == list(range(2, 16))
        assert model.members(0) == [2, 3, 5, 7, 11, 13]

    def test_action(self, model):
        action = model.action(2, 2)
        after = model.initial & ~model.bit(4)
        (mu,) = action.at(model.initial).vertices
        assert mu.weight_at(after) == NINE_TENTHS
        assert mu.weight_at(model.initial) == Fraction(1, 10)
        assert action.at(after).vertices[0].weight_at(after) == 1

    def test_rely_only_removes(self, model, small):
        assert model.rely.at(0b11).reach == frozenset({0b00, 0b01, 0b10, 0b11})
        assert is_transitive(small.rely)

    def test_removal_counts(self, model):
        assert model.removal_counts() == {4: 1, 6: 2, 8: 1, 9: 1, 10: 1, 12: 2, 14: 1, 15: 1}

    def test_thread_bound(self, model):
        assert model.thread_bound(2) == NINE_TENTHS**6
        assert model.thread_bound(3) == NINE_TENTHS**4

    def test_targets(self, model):
        assert model.initial not in model.target(2, 2)
        assert 0 in model.thread_target(3)
        assert model.initial & ~model.bit(9) not in model.thread_target(3)

    def test_thread_term(self, model):
        assert format_term(model.thread_term(3)) == "u3_2 ; u3_3 ; u3_4 ; u3_5"

    def test_threads(self, model):
        assert len(maximal_traces(model.thread(2))) == 1
        assert len(model.thread(2).events) == 6

    def test_interleavings(self, model):
        """Six and four actions interleave in C(10, 4) ways."""
        assert len(maximal_traces(model.composed())) == 210

    @pytest.mark.parametrize("n", [3, 37])
    def test_size_checked(self, n):
        with pytest.raises(DomainError):
            sieve_generate(n, NINE_TENTHS)

    def test_probability_checked(self):
        with pytest.raises(DomainError):
            sieve_generate(15, Fraction(3, 2))


class TestSieveCertificate:
    """Tests for certifying the threads and the composed bound."""

    def test_single_thread_instance(self, small):
        certificate = sieve_certificate(small)
        assert certificate.passed
        assert certificate.bound == Fraction(1, 8)

    def test_thread_certificate(self, small):
        certificate = sieve_thread_certificate(small, 2)
        assert certificate.passed
        assert certificate.report.passed
        assert certificate.verdict.valid

    def test_never_removes_prime(self, model):
        assert all(never_removes_prime(model, i, j) for i in (2, 3) for j in model.multipliers(i))

    def test_quintuple_shape(self, model):
        q = thread_quintuple(model, 3)
        assert q.name == "thd3"
        assert q.pre is model.pre
        assert len(q.component.events) == 4

    def test_unknown_thread(self, model):
        with pytest.raises(DomainError):
            sieve_thread_certificate(model, 5)

    def test_too_large(self):
        with pytest.raises(DomainError):
            sieve_thread_certificate(sieve_generate(20, NINE_TENTHS), 2)

    @pytest.mark.slow
    def test_fifteen(self, model):
        certificate = sieve_certificate(model)
        assert certificate.passed
        assert certificate.bound == Fraction(187541, 1000000)
        assert len(certificate.composed.component.events) == 10
