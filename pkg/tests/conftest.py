"""Pytest fixtures for prg_verify tests."""
from fractions import Fraction

import pytest

from prg_verify.events.builders import EventSupply, atomic
from prg_verify.models.distribution import Distribution
from prg_verify.models.program import ConvexProgram
from prg_verify.models.state_space import StateSpace

HALF = Fraction(1, 2)

COIN_SOURCE = """
# A fair coin, resets and two environments.
states 0 1 2;
atom flip { 0 -> 1/2:0 + 1/2:1; 1 -> 1/2:0 + 1/2:1; 2 -> 1/2:0 + 1/2:1 }
atom reset { 0 -> 0; 1 -> 0; 2 -> 0 }
atom set1 { 0 -> 1; 1 -> 1; 2 -> 1 }
atom up { 0 -> 0 | 1 | 2; 1 -> 1 | 2; 2 -> 2 }
atom low { 0 -> 0 | 1; 1 -> 0 | 1; 2 -> 0 | 1 | 2 }
guard zero { 0 }
term main = flip ; reset
term both = reset || set1
"""


@pytest.fixture
def space():
    """Three states 0, 1, 2."""
    return StateSpace.of(0, 1, 2)


@pytest.fixture
def point(space):
    """δ_s as a function of s."""
    return lambda state: Distribution.point(space, state)


@pytest.fixture
def coin(space):
    """Every state moves to ½δ₀ + ½δ₁."""
    mu = Distribution.from_weights(space, {0: HALF, 1: HALF})
    return ConvexProgram.from_mapping(space, {s: mu for s in space}, name="coin")


@pytest.fixture
def to_zero(space):
    return ConvexProgram.assign(space, 0, name="to0")


@pytest.fixture
def to_one(space):
    return ConvexProgram.assign(space, 1, name="to1")


@pytest.fixture
def to_two(space):
    return ConvexProgram.assign(space, 2, name="to2")


@pytest.fixture
def guard_zero(space):
    """The test [s = 0]."""
    return ConvexProgram.test(space, [0], name="zero")


@pytest.fixture
def step(space):
    """0 → 1 → 2 → 2, deterministic."""
    return ConvexProgram.from_mapping(
        space,
        {s: Distribution.point(space, min(s + 1, 2)) for s in (0, 1, 2)},
        name="step",
    )


@pytest.fixture
def up(space):
    """Move to any state at least as large; transitive and reflexive."""
    return ConvexProgram.from_mapping(
        space,
        {s: [Distribution.point(space, t) for t in space if t >= s] for s in space},
        name="up",
    )


@pytest.fixture
def supply():
    """Fresh event identifiers per test."""
    return EventSupply()


@pytest.fixture
def a(to_zero, supply):
    return atomic(to_zero, "a", supply)


@pytest.fixture
def b(to_one, supply):
    return atomic(to_one, "b", supply)


@pytest.fixture
def coin_source():
    return COIN_SOURCE


@pytest.fixture
def coin_file(tmp_path):
    path = tmp_path / "coin.prg"
    path.write_text(COIN_SOURCE)
    return path
