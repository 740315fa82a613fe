"""
Incentive-compatibility check.

Truthful reporting must be a best response: on a (theta, report) grid no
report may beat the truthful one by more than the tolerance.
"""

from __future__ import annotations

from jubilee.core.analysis import check_ic
from jubilee.core.checks.base import BaseCheck
from jubilee.core.mechanism import MarketParams
from jubilee.core.results import CheckResult
from jubilee.core.rules import TransferRule


class IncentiveCheck(BaseCheck):
    """Max over the grid of U(theta, report) - U(theta, theta)."""

    name = "ic"
    description = "Truthful reporting is a best response"

    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        grid = self.settings.ic_grid
        violation = check_ic(params, grid, self.quad, rule)
        tolerance = self.settings.ic_tolerance
        return [
            CheckResult.judge(
                ok=violation <= tolerance,
                id="ic-grid",
                check=self.name,
                title="Incentive compatibility",
                value=violation,
                tolerance=tolerance,
                description=(
                    f"Largest gain from misreporting over a {grid}x{grid} grid of "
                    f"(type, report) pairs under the {rule.name} transfer rule."
                ),
                metrics={"grid": grid, "rule": rule.to_dict()},
            )
        ]
