"""Small report container for numerical verification checks."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a verification run: failures are reported, not raised."""
    name: str
    passed: bool
    max_abs_error: float
    tol: float
    rows: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "max_abs_error": self.max_abs_error,
            "tol": self.tol,
            "rows": [dict(r) for r in self.rows],
        }
