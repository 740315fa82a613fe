"""
Envelope condition check, in integral and derivative form.
"""

from __future__ import annotations

from jubilee.core.analysis import check_envelope
from jubilee.core.checks.base import BaseCheck
from jubilee.core.mechanism import MarketParams
from jubilee.core.results import CheckResult
from jubilee.core.rules import TransferRule


class EnvelopeCheck(BaseCheck):
    name = "envelope"
    description = "Truthful utility equals the integrated settlement probability"

    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        grid = self.settings.envelope_grid
        residuals = check_envelope(
            params, grid, self.quad, rule, step=self.settings.finite_difference_step
        )
        tolerance = self.settings.envelope_tolerance
        return [
            CheckResult.judge(
                ok=residuals.integral_form <= tolerance,
                id="envelope-integral",
                check=self.name,
                title="Envelope condition (integral form)",
                value=residuals.integral_form,
                tolerance=tolerance,
                description="Max |U(t,t) - U(hi,hi) - integral of K over [t, hi]| on interior grid points.",
                metrics={"grid": grid},
            ),
            CheckResult.judge(
                ok=residuals.derivative_form <= tolerance,
                id="envelope-derivative",
                check=self.name,
                title="Envelope condition (derivative form)",
                value=residuals.derivative_form,
                tolerance=tolerance,
                description="Max |dU(t,t)/dt + K(t)| by centered finite differences.",
                metrics={"grid": grid, "step": self.settings.finite_difference_step},
            ),
        ]
