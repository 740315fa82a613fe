"""
Verification report: quantified check results plus an echo of the inputs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from jubilee.core.quadrature import QuadratureSpec
from jubilee.core.results import CheckCollection, CheckResult, CheckStatus
from jubilee.io import atomic_write_text
from jubilee.models.schemas import VerificationSettings

REPORT_VERSION = 1


class ReportInputs(BaseModel):
    """Everything needed to reproduce a report."""

    model_config = ConfigDict(extra="forbid")

    market: dict[str, Any] = Field(description="Economy the checks ran on")
    quadrature: QuadratureSpec
    verification: VerificationSettings
    rule: dict[str, Any] = Field(description="Transfer rule under test")
    seed: int = Field(description="Monte Carlo seed")
    config_hash: str | None = Field(default=None, description="sha256 of the resolved config")


class VerificationReport(BaseModel):
    """
    Result of the full verification suite on one economy.

    Usage:
        >>> report = run_verification(params)
        >>> print(report.summary())
        >>> report.to_json("report.json")
    """

    model_config = ConfigDict(extra="forbid")

    version: int = Field(default=REPORT_VERSION)

    # Quantities
    max_ic_violation: float
    min_ir_utility: float
    top_type_utility: float
    k_monotonicity_worst_slope: float = Field(description="Largest increase of K between grid points")
    envelope_max_residual: float
    transfer_identity_residual: float
    debtor_utility_v: float
    virtual_surplus: float
    feasibility: bool = Field(description="Virtual surplus is non-negative")
    blessing_integral: float = Field(description="E[k sum_i e_i]; 0 when the revision function is zero")
    blessing_profit_gap: float = Field(default=0.0)

    # Verdict
    passed: bool
    checks: list[CheckResult] = Field(default_factory=list)

    # Echo
    inputs: ReportInputs

    @classmethod
    def from_checks(cls, checks: CheckCollection, inputs: ReportInputs) -> VerificationReport:
        def value(result_id: str, default: float = 0.0) -> float:
            result = checks.get(result_id)
            return result.value if result is not None else default

        welfare = checks.get("welfare-identity")
        welfare_metrics = welfare.metrics if welfare is not None else {}
        blessing = checks.get("blessing-integral")
        blessing_metrics = blessing.metrics if blessing is not None else {}
        envelope = [r.value for r in checks.by_check("envelope")]
        identity = [r.value for r in checks.by_check("identity")]

        return cls(
            max_ic_violation=value("ic-grid"),
            min_ir_utility=value("ir-min-utility"),
            top_type_utility=value("ir-top-type"),
            k_monotonicity_worst_slope=value("k-monotonicity"),
            envelope_max_residual=max(envelope, default=0.0),
            transfer_identity_residual=max(identity, default=0.0),
            debtor_utility_v=float(welfare_metrics.get("debtor_utility", 0.0)),
            virtual_surplus=float(welfare_metrics.get("virtual_surplus", 0.0)),
            feasibility=bool(welfare_metrics.get("feasible", False)),
            blessing_integral=float(blessing_metrics.get("integral", 0.0)),
            blessing_profit_gap=float(blessing_metrics.get("profit_gap", 0.0)),
            passed=checks.all_passed,
            checks=list(checks),
            inputs=inputs,
        )

    @property
    def failed_checks(self) -> list[CheckResult]:
        return [c for c in self.checks if c.status is CheckStatus.FAILED]

    def summary(self) -> str:
        """Plain-text summary of the verification run."""
        lines = [
            "Jubilee Verification Report",
            "=" * 50,
            "",
            f"Transfer rule: {self.inputs.rule.get('name')}",
            f"Config hash: {self.inputs.config_hash or 'n/a'}",
            f"Seed: {self.inputs.seed}",
            "",
            f"Max IC violation:        {self.max_ic_violation:.3e}",
            f"Min IR utility:          {self.min_ir_utility:.3e}",
            f"Top-type utility:        {self.top_type_utility:.3e}",
            f"K worst increase:        {self.k_monotonicity_worst_slope:.3e}",
            f"Envelope residual:       {self.envelope_max_residual:.3e}",
            f"Transfer identity:       {self.transfer_identity_residual:.3e}",
            f"Debtor utility V:        {self.debtor_utility_v:.9f}",
            f"Virtual surplus:         {self.virtual_surplus:.9f}",
            f"Feasible:                {self.feasibility}",
            f"Blessing integral:       {self.blessing_integral:.9f}",
            "",
            f"Checks: {len(self.checks)} total, {len(self.failed_checks)} failed",
        ]
        for check in self.failed_checks:
            lines.append(f"  [FAILED] {check.title}: {check.value:.3e} (tolerance {check.tolerance:.1e})")
        lines.append("")
        lines.append("PASSED" if self.passed else "FAILED")
        return "\n".join(lines)

    def to_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def to_json(self, path: str | Path, indent: int = 2) -> None:
        """Export report as a JSON file."""
        atomic_write_text(Path(path), json.dumps(self.to_dict(), indent=indent) + "\n")

    def to_markdown(self, path: str | Path) -> None:
        """Export report as a Markdown file."""
        from jubilee.render.markdown import render_verification

        atomic_write_text(Path(path), render_verification(self))

    @classmethod
    def from_json(cls, path: str | Path) -> VerificationReport:
        return cls.model_validate_json(Path(path).read_text())
