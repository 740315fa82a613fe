"""
Participation checks: truthful utility is never negative and the top type earns no rent.
"""

from __future__ import annotations

from jubilee.core.analysis import check_ir
from jubilee.core.checks.base import BaseCheck
from jubilee.core.mechanism import MarketParams
from jubilee.core.results import CheckResult
from jubilee.core.rules import TransferRule


class ParticipationCheck(BaseCheck):
    name = "ir"
    description = "Individual rationality and zero rent at the top type"

    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        result = check_ir(params, self.settings.ic_grid, self.quad, rule)
        tolerance = self.settings.ir_tolerance
        return [
            CheckResult.judge(
                ok=result.min_utility >= -tolerance,
                id="ir-min-utility",
                check=self.name,
                title="Individual rationality",
                value=result.min_utility,
                tolerance=tolerance,
                description="Smallest truthful expected utility change over the type grid.",
            ),
            CheckResult.judge(
                ok=abs(result.top_type_utility) <= tolerance,
                id="ir-top-type",
                check=self.name,
                title="Zero rent at the top type",
                value=result.top_type_utility,
                tolerance=tolerance,
                description=f"U(hi, hi) at hi={params.hi}.",
            ),
        ]
