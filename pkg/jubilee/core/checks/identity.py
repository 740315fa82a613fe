"""
Transfer identity check: E[k t_i] = E[k (l_i + F/phi(theta_i))] for every creditor.
"""

from __future__ import annotations

from jubilee.core.analysis import check_transfer_identity
from jubilee.core.checks.base import BaseCheck
from jubilee.core.mechanism import MarketParams
from jubilee.core.results import CheckResult
from jubilee.core.rules import TransferRule


class TransferIdentityCheck(BaseCheck):
    name = "identity"
    description = "Expected transfers equal expected liquidation value plus informational rent"

    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        results: list[CheckResult] = []
        for creditor in range(params.n):
            identity = check_transfer_identity(params, self.quad, creditor, rule)
            tolerance = self.settings.identity_tolerance
            if self.sampled(params):
                tolerance = max(tolerance, self.settings.sigmas * identity.stderr)
            results.append(
                CheckResult.judge(
                    ok=identity.residual <= tolerance,
                    id=f"transfer-identity-{creditor + 1}",
                    check=self.name,
                    title=f"Transfer identity (creditor {creditor + 1})",
                    value=identity.residual,
                    tolerance=tolerance,
                    metrics={
                        "lhs": identity.lhs.value,
                        "rhs": identity.rhs.value,
                        "stderr": identity.stderr,
                    },
                )
            )
        return results
