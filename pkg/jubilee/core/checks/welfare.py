"""
Debtor welfare checks.

The debtor's expected utility is computed twice, once from the transfers
and once as virtual surplus, and the two must agree. When the virtual
surplus is non-negative (feasibility) the debtor's expected utility must be
non-negative too.
"""

from __future__ import annotations

import math

from jubilee.core.analysis import debtor_expected_utility, virtual_surplus
from jubilee.core.checks.base import BaseCheck
from jubilee.core.mechanism import MarketParams
from jubilee.core.results import CheckResult, CheckStatus
from jubilee.core.rules import TransferRule


class WelfareCheck(BaseCheck):
    name = "welfare"
    description = "Debtor expected utility matches virtual surplus and is non-negative"

    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        utility = debtor_expected_utility(params, self.quad, rule)
        surplus = virtual_surplus(params, self.quad)
        gap = abs(utility.value - surplus.value)
        tolerance = self.settings.identity_tolerance
        if self.sampled(params):
            combined = math.hypot(utility.stderr, surplus.stderr)
            tolerance = max(tolerance, self.settings.sigmas * combined)
        feasible = surplus.value >= 0.0

        metrics = {
            "debtor_utility": utility.value,
            "debtor_utility_stderr": utility.stderr,
            "virtual_surplus": surplus.value,
            "virtual_surplus_stderr": surplus.stderr,
            "feasible": feasible,
        }
        budget = CheckResult(
            id="welfare-budget-balance",
            check=self.name,
            title="Debtor expected utility non-negative",
            status=CheckStatus.SKIPPED,
            value=utility.value,
            tolerance=tolerance,
            description="Not applicable: virtual surplus is negative.",
            metrics=metrics,
        )
        if feasible:
            budget = CheckResult.judge(
                ok=utility.value >= -tolerance,
                id=budget.id,
                check=self.name,
                title=budget.title,
                value=utility.value,
                tolerance=tolerance,
                description="V >= 0 whenever the virtual surplus is non-negative.",
                metrics=metrics,
            )
        return [
            CheckResult.judge(
                ok=gap <= tolerance,
                id="welfare-identity",
                check=self.name,
                title="Debtor utility equals virtual surplus",
                value=gap,
                tolerance=tolerance,
                metrics=metrics,
            ),
            budget,
        ]
