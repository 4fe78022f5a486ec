"""Monte Carlo cross-check of the exact semantics."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Hashable

import numpy as np
import pandas as pd

from prg_verify.config import settings
from prg_verify.errors import SamplingError
from prg_verify.models.distribution import Distribution
from prg_verify.models.event_structure import IpBes

logger = logging.getLogger(__name__)


@dataclass
class MonteCarloResult:
    """Empirical outcome of sampled runs."""

    trials: int
    initial: Hashable
    counts: dict[Hashable, int]
    mean_steps: float

    @property
    def frequencies(self) -> dict[Hashable, float]:
        """Relative frequency per final state."""
        return {s: c / self.trials for s, c in self.counts.items()}


class MonteCarloOracle:
    """
    Samples runs under the uniformly randomizing scheduler.

    Each step picks an enabled event whose label is defined at the current
    state, then a vertex of that label, then the next state, all uniformly
    or by the vertex's weights. The result is a soundness cross-check only.
    """

    def __init__(self, trials: int = 10_000, seed: int | None = None, step_cap: int | None = None):
        self.trials = trials
        self.rng = np.random.default_rng(seed)
        self.step_cap = step_cap or settings.monte_carlo_step_cap

    def sample_once(self, es: IpBes, initial: int) -> tuple[int, int]:
        """One run: (final state index, steps taken)."""
        configuration: frozenset[int] = frozenset()
        state = initial
        for step in range(self.step_cap + 1):
            choices = []
            for event in es.enabled(configuration):
                entry = es.labels[event].at(state)
                if entry is not None:
                    choices.append((event, entry.vertex_form(settings.cap).vertices))
            if not choices:
                if es.enabled(configuration):
                    raise SamplingError(f"Run got stuck at state {es.space.state(state)!r}")
                return state, step
            event, vertices = choices[int(self.rng.integers(0, len(choices)))]
            mu = vertices[int(self.rng.integers(0, len(vertices)))]
            targets = [i for i, _ in mu.entries]
            weights = np.array([float(w) for _, w in mu.entries])
            state = targets[int(self.rng.choice(len(targets), p=weights / weights.sum()))]
            configuration = configuration | {event}
        raise SamplingError(f"Run exceeded step cap {self.step_cap}")

    def sample(self, es: IpBes, initial: Hashable) -> MonteCarloResult:
        """
        Sample ``self.trials`` runs from ``initial``.

        Args:
            es: Feasible, terminating structure
            initial: Initial state identifier

        Returns:
            MonteCarloResult with per-state counts
        """
        start = es.space.index(initial)
        counts = np.zeros(len(es.space), dtype=np.int64)
        steps = np.zeros(self.trials, dtype=np.int64)
        for trial in range(self.trials):
            final, taken = self.sample_once(es, start)
            counts[final] += 1
            steps[trial] = taken

        result = MonteCarloResult(
            trials=self.trials,
            initial=initial,
            counts={es.space.state(i): int(c) for i, c in enumerate(counts) if c},
            mean_steps=float(steps.mean()) if self.trials else 0.0,
        )
        logger.debug(f"Sampled {self.trials} runs from {initial!r}")
        return result

    def frequency_frame(
        self, result: MonteCarloResult, reference: Distribution | None = None
    ) -> pd.DataFrame:
        """
        Per-state table of empirical frequency, exact reference probability
        and binomial standard error.

        Returns:
            DataFrame with columns state, count, frequency, reference, sigma
        """
        rows = []
        states = list(reference.space) if reference is not None else sorted(result.counts, key=repr)
        for state in states:
            count = result.counts.get(state, 0)
            ref = float(reference[state]) if reference is not None else float("nan")
            sigma = float(np.sqrt(ref * (1 - ref) / result.trials))
            rows.append(
                {
                    "state": state,
                    "count": count,
                    "frequency": count / result.trials,
                    "reference": ref,
                    "sigma": sigma,
                }
            )
        return pd.DataFrame(rows)

    def check_consistency(
        self, result: MonteCarloResult, reference: Distribution, sigmas: float = 5.0
    ) -> bool:
        """Every state's frequency within ``sigmas`` binomial standard errors of the reference."""
        frame = self.frequency_frame(result, reference)
        deviation = (frame["frequency"] - frame["reference"]).abs()
        return bool((deviation <= sigmas * frame["sigma"] + 1e-12).all())

    def print_report(self, result: MonteCarloResult, reference: Distribution | None = None) -> str:
        """Generate formatted Monte Carlo report."""
        frame = self.frequency_frame(result, reference)
        lines = [
            "=" * 50,
            "MONTE CARLO SEMANTICS CHECK",
            "=" * 50,
            f"Trials:          {result.trials:,}",
            f"Initial state:   {result.initial!r}",
            f"Mean steps:      {result.mean_steps:.2f}",
            "",
            "FINAL STATE FREQUENCIES",
            "-" * 30,
        ]
        for row in frame.itertuples(index=False):
            line = f"{row.state!r:>10}  {row.frequency:.4f}"
            if reference is not None:
                line += f"  (exact {row.reference:.4f} ± {row.sigma:.4f})"
            lines.append(line)
        if reference is not None:
            lines.append("")
            if self.check_consistency(result, reference):
                lines.append("✓ Consistent with the exact semantics (5σ)")
            else:
                lines.append("✗ Outside 5σ of the exact reference point")
        lines.append("=" * 50)
        return "\n".join(lines)
