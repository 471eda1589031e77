"""Machine-readable verdict records for property checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict


@dataclass(frozen=True)
class CheckReport:
    """Verdict of one claim over a parameter grid.

    ``passed`` is tied to the margin by construction:
    passed  <=>  worst_margin >= -tolerance.  Strict-inequality claims are
    encoded with a small negative tolerance so that a margin of exactly
    zero fails them.  ``inconclusive`` marks failures whose magnitude is
    within the evaluation error bound at the worst point: those indicate
    the limit of double-precision certification, not a falsified claim.
    """

    claim_id: str
    grid_spec: str
    worst_margin: float
    worst_point: Dict[str, Any]
    passed: bool
    tolerance: float
    inconclusive: bool = False

    def as_dict(self) -> Dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "grid_spec": self.grid_spec,
            "worst_margin": self.worst_margin,
            "worst_point": self.worst_point,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "inconclusive": self.inconclusive,
        }


def make_report(
    claim_id: str,
    grid_spec: str,
    worst_margin: float,
    worst_point: Dict[str, Any],
    tolerance: float,
    err_bound_at_worst: float = 0.0,
) -> CheckReport:
    """Build a report, deriving passed/inconclusive from the margin."""
    passed = worst_margin >= -tolerance
    inconclusive = (not passed) and abs(worst_margin) <= err_bound_at_worst
    return CheckReport(
        claim_id=claim_id,
        grid_spec=grid_spec,
        worst_margin=float(worst_margin),
        worst_point=worst_point,
        passed=passed,
        tolerance=float(tolerance),
        inconclusive=inconclusive,
    )
