"""
Markdown renderers for verification reports and settlement outcomes.

Suitable for documentation or attaching to a pull request.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from jubilee.core.closedform import DiscrepancyRow
    from jubilee.core.mechanism import MarketParams, Outcome
    from jubilee.core.report import VerificationReport

STATUS_MARK = {"passed": "✅", "failed": "❌", "skipped": "⏭️"}


def render_verification(report: VerificationReport) -> str:
    """Render a verification report as Markdown."""
    inputs = report.inputs
    market = inputs.market
    lines = [
        "# Jubilee Verification Report",
        "",
        f"**Verdict:** {'PASSED' if report.passed else 'FAILED'}  ",
        f"**Transfer rule:** `{inputs.rule.get('name')}`  ",
        f"**Config hash:** `{inputs.config_hash or 'n/a'}`  ",
        f"**Seed:** {inputs.seed}",
        "",
        "## Economy",
        "",
        "| Parameter | Value |",
        "|-----------|-------|",
        f"| Creditors n | {market.get('n')} |",
        f"| Debt D | {market.get('D')} |",
        f"| Continuation value A | {market.get('A')} |",
        f"| Types | {_distribution(market.get('distribution', {}))} |",
        f"| Revision | {_revision(market.get('revision', {}))} |",
        f"| Quadrature | {inputs.quadrature.scheme} |",
        "",
        "## Quantities",
        "",
        "| Quantity | Value |",
        "|----------|-------|",
        f"| Max IC violation | {report.max_ic_violation:.3e} |",
        f"| Min IR utility | {report.min_ir_utility:.3e} |",
        f"| Top-type utility | {report.top_type_utility:.3e} |",
        f"| K worst increase | {report.k_monotonicity_worst_slope:.3e} |",
        f"| Envelope residual | {report.envelope_max_residual:.3e} |",
        f"| Transfer identity residual | {report.transfer_identity_residual:.3e} |",
        f"| Debtor utility V | {report.debtor_utility_v:.9f} |",
        f"| Virtual surplus | {report.virtual_surplus:.9f} |",
        f"| Feasible | {'yes' if report.feasibility else 'no'} |",
        f"| Blessing integral | {report.blessing_integral:.9f} |",
        f"| Profit gap without revision | {report.blessing_profit_gap:.9f} |",
        "",
        "## Checks",
        "",
        "| | Check | Value | Tolerance |",
        "|---|-------|-------|-----------|",
    ]
    for check in report.checks:
        mark = STATUS_MARK.get(check.status.value, "")
        lines.append(f"| {mark} | {check.title} (`{check.id}`) | {check.value:.3e} | {check.tolerance:.1e} |")

    if report.failed_checks:
        lines.extend(["", "### Failures", ""])
        for check in report.failed_checks:
            lines.extend([f"**{check.title}**", "", check.description or "No description.", ""])

    lines.extend(["", "---", "", "*Generated by Jubilee*"])
    return "\n".join(lines)


def render_outcome(outcome: Outcome, params: MarketParams, *, config_hash: str | None, seed: int) -> str:
    """Render one settlement as Markdown."""
    lines = [
        "# Jubilee Settlement",
        "",
        f"**Decision:** {'solvent, debt restructured' if outcome.solvent else 'bankrupt, assets liquidated'}  ",
        f"**Config hash:** `{config_hash or 'n/a'}`  ",
        f"**Seed:** {seed}",
        "",
        f"Per-creditor debt d = {params.d:.6g}, continuation value A = {params.A:.6g}.",
        "",
        "| Creditor | Pivotal type | Transfer | Forgiveness |",
        "|----------|--------------|----------|-------------|",
    ]
    for i in range(len(outcome.transfers)):
        pivotal = f"{outcome.pivotal[i]:.6f}" if i < len(outcome.pivotal) else "n/a"
        lines.append(f"| {i + 1} | {pivotal} | {outcome.transfers[i]:.6f} | {outcome.forgiveness[i]:.6f} |")
    if outcome.flags:
        lines.extend(["", "**Flags:** " + ", ".join(f"`{flag}`" for flag in outcome.flags)])
    lines.append("")
    return "\n".join(lines)


def render_discrepancies(rows: Sequence[DiscrepancyRow], *, config_hash: str | None, seed: int) -> str:
    lines = [
        f"**Config hash:** `{config_hash or 'n/a'}`  ",
        f"**Seed:** {seed}",
        "",
        "| Quantity | Printed | Derived | Max deviation | Disagreement |",
        "|----------|---------|---------|---------------|--------------|",
    ]
    for row in rows:
        lines.append(
            f"| {row.quantity} | `{row.printed}` | `{row.derived}` | "
            f"{row.max_abs_deviation:.3e} | {row.disagreement_rate:.1%} |"
        )
    return "\n".join(lines)


def _distribution(spec: dict[str, Any]) -> str:
    support = spec.get("support", {})
    return f"{spec.get('kind', '?')} on [{support.get('lo')}, {support.get('hi')}]"


def _revision(spec: dict[str, Any]) -> str:
    if spec.get("kind") == "linear":
        return f"linear, alpha = {spec.get('alpha')}"
    return "zero"
