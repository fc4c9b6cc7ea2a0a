"""Identity-check reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass
class CheckReport:
    """Outcome of an identity verification on a coefficient window.

    window maps variable names to [lo, hi] bounds of fully verified
    exponents (lo is None when the check is exact all the way down).
    first_failure describes the first nonzero coefficient of the defect.
    """

    holds: bool
    window: dict
    first_failure: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "window": {k: list(v) for k, v in sorted(self.window.items())},
            "firstFailure": self.first_failure,
        }
