"""
Debtor-blessing check: revision of estimates raises the debtor's expected profit.
"""

from __future__ import annotations

from jubilee.core.analysis import blessing_delta
from jubilee.core.checks.base import BaseCheck
from jubilee.core.mechanism import MarketParams
from jubilee.core.results import CheckResult, CheckStatus
from jubilee.core.rules import TransferRule


class BlessingCheck(BaseCheck):
    """E[k sum_i e_i] < 0, with the profit gap equal to minus that integral."""

    name = "blessing"
    description = "Private-information differences raise debtor expected profit"

    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        sigmas = self.settings.sigmas
        if params.alpha <= 0.0:
            return [
                CheckResult(
                    id="blessing-integral",
                    check=self.name,
                    title="Debtor blessing",
                    status=CheckStatus.SKIPPED,
                    value=0.0,
                    tolerance=0.0,
                    description="Not applicable: the revision function is zero.",
                )
            ]

        blessing = blessing_delta(params, self.quad)
        integral = blessing.integral
        consistency = abs(blessing.profit_gap.value + integral.value)
        tolerance = self.settings.identity_tolerance + sigmas * blessing.profit_gap.stderr
        metrics = {
            "integral": integral.value,
            "integral_stderr": integral.stderr,
            "profit_gap": blessing.profit_gap.value,
            "profit_with_revision": blessing.profit_with_revision.value,
            "profit_without_revision": blessing.profit_without_revision.value,
        }
        return [
            CheckResult.judge(
                ok=integral.value < -sigmas * integral.stderr and integral.value < 0.0,
                id="blessing-integral",
                check=self.name,
                title="Debtor blessing",
                value=integral.value,
                tolerance=sigmas * integral.stderr,
                description="Expected revision paid under settlement must be negative.",
                metrics=metrics,
            ),
            CheckResult.judge(
                ok=consistency <= tolerance,
                id="blessing-profit-gap",
                check=self.name,
                title="Profit gap equals minus the revision integral",
                value=consistency,
                tolerance=tolerance,
                metrics=metrics,
            ),
        ]
