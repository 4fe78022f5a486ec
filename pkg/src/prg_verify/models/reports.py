"""Report models shared by the law suites and validators."""
from __future__ import annotations

from pydantic import BaseModel, Field


class LawCheck(BaseModel):
    """Outcome of one law over a batch of samples."""

    law: str
    checked: int = 0
    failed: int = 0
    counterexample: str | None = None

    @property
    def passed(self) -> bool:
        """True when no sample violated the law."""
        return self.failed == 0

    def record(self, holds: bool, describe: str = "") -> None:
        self.checked += 1
        if not holds:
            self.failed += 1
            if self.counterexample is None:
                self.counterexample = describe or "unnamed sample"


class LawReport(BaseModel):
    """Batch of law checks."""

    checks: list[LawCheck] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, law: str) -> LawCheck:
        """The entry for ``law``, created on first use."""
        for entry in self.checks:
            if entry.law == law:
                return entry
        entry = LawCheck(law=law)
        self.checks.append(entry)
        return entry

    def failures(self) -> list[LawCheck]:
        return [c for c in self.checks if not c.passed]
