"""
Settlement-probability monotonicity check.
"""

from __future__ import annotations

from jubilee.core.analysis import check_k_monotonicity
from jubilee.core.checks.base import BaseCheck
from jubilee.core.mechanism import MarketParams
from jubilee.core.results import CheckResult
from jubilee.core.rules import TransferRule


class MonotonicityCheck(BaseCheck):
    """K(theta) must not increase in theta."""

    name = "monotonicity"
    description = "Settlement probability is non-increasing in the creditor's type"

    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        grid = self.settings.monotonicity_grid
        worst = check_k_monotonicity(params, grid, self.quad)
        tolerance = self.settings.monotonicity_tolerance
        return [
            CheckResult.judge(
                ok=worst <= tolerance,
                id="k-monotonicity",
                check=self.name,
                title="K non-increasing",
                value=worst,
                tolerance=tolerance,
                description=f"Largest increase of K between consecutive points of a {grid}-point grid.",
                metrics={"grid": grid},
            )
        ]
