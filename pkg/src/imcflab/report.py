"""Check entries and reports shared by shape validation and the monitors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"


@dataclass(frozen=True)
class Check:
    """One verified statement.

    ``residual`` and ``tolerance`` are reported verbatim; how they are
    compared is documented on the function that produced the entry.
    ``location`` is a flow time, a node angle, or empty.
    """

    name: str
    status: str
    residual: float
    tolerance: float
    location: str = ""
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def line(self) -> str:
        loc = self.location or "-"
        text = f"{self.name}  {self.status}  {self.residual:.6e}  {self.tolerance:.6e}  {loc}"
        if self.note:
            text += f"  # {self.note}"
        return text


def make_check(name, ok, residual, tolerance, location="", note="") -> Check:
    residual = float(residual)
    if not math.isfinite(residual):
        ok = False
    return Check(name, PASS if ok else FAIL, residual, float(tolerance), str(location), note)


def skipped(name: str, reason: str) -> Check:
    return Check(name, SKIP, 0.0, 0.0, "", reason)


@dataclass
class CheckReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    def extend(self, other: "CheckReport | list[Check]") -> None:
        items = other.checks if isinstance(other, CheckReport) else other
        self.checks.extend(items)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"overall  {PASS if self.overall else FAIL}")
        return "\n".join(lines) + "\n"
