"""Small result containers shared by the verification modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class TailCurve:
    """Rows of (threshold t, measured tail, theoretical bound, ratio).

    measured_tail must be non-increasing in t; `constants` carries fitted
    constants and any bookkeeping the producing experiment reports.
    """

    rows: List[Dict[str, float]] = field(default_factory=list)
    constants: Dict[str, Any] = field(default_factory=dict)

    def add(self, t: float, tail: float, bound: float) -> None:
        ratio = tail / bound if bound > 0 else float("inf")
        self.rows.append({"t": t, "tail": tail, "bound": bound, "ratio": ratio})

    @property
    def tails(self) -> List[float]:
        return [r["tail"] for r in self.rows]

    def is_monotone(self, tol: float = 0.0) -> bool:
        ts = self.tails
        return all(a >= b - tol for a, b in zip(ts, ts[1:]))

    def max_ratio(self) -> float:
        return max((r["ratio"] for r in self.rows), default=0.0)

    def violations(self, tol: float = 0.0) -> List[Dict[str, float]]:
        return [r for r in self.rows if r["tail"] > r["bound"] + tol]


@dataclass
class CheckReport:
    """Outcome of an inequality sweep: per-point rows plus violations."""

    name: str
    rows: List[Dict[str, Any]] = field(default_factory=list)
    violations: List[Dict[str, Any]] = field(default_factory=list)
    constants: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, row: Dict[str, Any], violated: bool) -> None:
        self.rows.append(row)
        if violated:
            self.violations.append(row)
