"""
Numerical verification of the mechanism's constraints.

Every quantity is an expectation over the other creditors' types, taken
with truthful reporting by everybody but (possibly) creditor i:

    U(theta, report) = E[ k(report, theta_-i) * (t_i(report, theta_-i) - l_i(theta, theta_-i)) ]
    K(theta)         = E[ k(theta, theta_-i) ]
    V                = E[ k(theta) * (A - sum_i t_i(theta)) ]

Because l_i is affine in theta with unit slope, U splits into three
report-only terms, U(theta, report) = T(report) - theta * K(report) - E(report),
which lets a whole (theta, report) grid be evaluated from one pass over
the reports.

Two-creditor economies use Gauss-Legendre on segments split where the
settlement region or the pivotal clamp changes; larger economies use seeded
Monte Carlo with common random numbers across grid points.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict

from jubilee.core.distributions import FloatArray
from jubilee.core.mechanism import (
    Clamp,
    MarketParams,
    admitted_array,
    pivotal_types_array,
    solvent_array,
)
from jubilee.core.quadrature import (
    Estimate,
    QuadratureSpec,
    draw_types,
    gauss_legendre,
    integrate_segments,
    map_segments,
    mean_estimate,
    sorted_breaks,
)
from jubilee.core.rules import OPTIMAL, TransferRule
from jubilee.errors import PremiseError, SupportError

if TYPE_CHECKING:
    from jubilee.core.report import VerificationReport
    from jubilee.models.schemas import VerificationSettings

logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE = QuadratureSpec()
FINITE_DIFFERENCE_STEP = 1e-5

ProfileFunction = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class ReportTerms:
    """Per-report expectations: K (settlement), T (transfer), E (revision)."""

    reports: FloatArray
    solvency: FloatArray
    transfer: FloatArray
    revision: FloatArray

    def utility(self, theta: FloatArray | float) -> FloatArray:
        """U(theta, report) for every report; a (len(theta), len(reports)) matrix for array theta."""
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        return self.transfer[None, :] - theta[:, None] * self.solvency[None, :] - self.revision[None, :]


class EnvelopeResiduals(BaseModel):
    """Worst residuals of the integral and derivative forms of the envelope condition."""

    model_config = ConfigDict(frozen=True)

    integral_form: float
    derivative_form: float

    @property
    def worst(self) -> float:
        return max(self.integral_form, self.derivative_form)


class ParticipationResult(BaseModel):
    """Smallest truthful utility on the grid and the top type's rent."""

    model_config = ConfigDict(frozen=True)

    min_utility: float
    top_type_utility: float


class IdentityResult(BaseModel):
    """Both sides of E[k t_i] = E[k (l_i + F/phi)]."""

    model_config = ConfigDict(frozen=True)

    creditor: int
    lhs: Estimate
    rhs: Estimate
    residual: float
    stderr: float = 0.0


class BlessingResult(BaseModel):
    """Debtor gain from private-information differences, holding k fixed."""

    model_config = ConfigDict(frozen=True)

    integral: Estimate
    profit_gap: Estimate
    profit_with_revision: Estimate
    profit_without_revision: Estimate

    @property
    def negative(self) -> bool:
        """Integral below zero beyond three standard errors (strictly below zero for quadrature)."""
        return self.integral.value < -3.0 * self.integral.stderr and self.integral.value < 0.0


# ---------------------------------------------------------------------------
# Settlement-region geometry (two creditors)
# ---------------------------------------------------------------------------


def _cut(params: MarketParams, reports: FloatArray) -> FloatArray:
    """
    Largest counterparty type that still settles against each report.

    Returns lo when no counterparty settles (measure-zero region) and hi
    when every counterparty does.
    """
    pivots, _ = pivotal_types_array(params, np.asarray(reports, dtype=np.float64).reshape(-1, 1))
    return pivots


def _cut_scalar(params: MarketParams, report: float) -> float:
    return float(_cut(params, np.array([report]))[0])


def _region_bounds(params: MarketParams) -> tuple[float, float]:
    """(always, ever): below ``always`` every counterparty settles; above ``ever`` none does."""
    return _cut_scalar(params, params.hi), _cut_scalar(params, params.lo)


def _region_integral(params: MarketParams, func: ProfileFunction, nodes: int) -> float:
    """Integrate ``func`` over the two-creditor settlement region against phi x phi."""
    lo = params.lo
    always, ever = _region_bounds(params)
    dist = params.distribution
    x, w = gauss_legendre(nodes)

    total = 0.0
    for left, right in ((lo, always), (always, ever)):
        if right <= left:
            continue
        half = 0.5 * (right - left)
        outer = left + half * (x + 1.0)
        outer_weights = half * w * dist.pdf(outer)
        cut = _cut(params, outer)
        knee = np.minimum(always, cut)
        for seg_left, seg_right in ((np.full(nodes, lo), knee), (knee, cut)):
            inner, inner_weights = map_segments(seg_left, seg_right, nodes)
            inner_weights = inner_weights * dist.pdf(inner)
            profiles = np.column_stack([np.repeat(outer, nodes), inner.ravel()])
            values = func(profiles).reshape(nodes, nodes)
            total += float(np.sum(outer_weights[:, None] * inner_weights * values))
    return total


# ---------------------------------------------------------------------------
# Per-report expectations
# ---------------------------------------------------------------------------


def report_terms(
    params: MarketParams,
    reports: FloatArray,
    quad: QuadratureSpec | None = None,
    rule: TransferRule | None = None,
) -> ReportTerms:
    """K, T and E for each report of creditor 0, others truthful."""
    quad = quad or DEFAULT_QUADRATURE
    rule = rule or OPTIMAL
    reports = np.atleast_1d(np.asarray(reports, dtype=np.float64))
    _check_support(params, reports)
    if quad.deterministic_for(params.n):
        return _report_terms_quadrature(params, reports, quad.nodes, rule)
    return _report_terms_sampled(params, reports, quad, rule)


def _report_terms_quadrature(
    params: MarketParams, reports: FloatArray, nodes: int, rule: TransferRule
) -> ReportTerms:
    lo = params.lo
    always, _ = _region_bounds(params)
    cut = _cut(params, reports)
    knee = np.minimum(always, cut)
    dist = params.distribution

    m = reports.size
    solvency = np.zeros(m)
    transfer = np.zeros(m)
    revision = np.zeros(m)
    for seg_left, seg_right in ((np.full(m, lo), knee), (knee, cut)):
        points, weights = map_segments(seg_left, seg_right, nodes)
        weights = weights * dist.pdf(points)
        paid = rule.transfers(params, np.repeat(reports, nodes), points.reshape(-1, 1)).reshape(m, nodes)
        solvency += weights.sum(axis=1)
        transfer += (weights * paid).sum(axis=1)
        revision += (weights * params.revision_of(points)).sum(axis=1)
    return ReportTerms(reports=reports, solvency=solvency, transfer=transfer, revision=revision)


def _report_terms_sampled(
    params: MarketParams, reports: FloatArray, quad: QuadratureSpec, rule: TransferRule
) -> ReportTerms:
    others = draw_types(params.distribution, quad, params.n - 1)
    pivots, clamps = pivotal_types_array(params, others)
    revision_sums = np.asarray(params.revision_of(others)).sum(axis=1)

    solvency = np.empty(reports.size)
    transfer = np.empty(reports.size)
    revision = np.empty(reports.size)
    for j, report in enumerate(reports):
        settled = admitted_array(pivots, clamps, report)
        paid = rule.transfers(params, report, others)
        solvency[j] = settled.mean()
        transfer[j] = np.mean(settled * paid)
        revision[j] = np.mean(settled * revision_sums)
    return ReportTerms(reports=reports, solvency=solvency, transfer=transfer, revision=revision)


def _check_support(params: MarketParams, values: FloatArray) -> None:
    support = params.distribution.support
    if not all(support.contains(float(v)) for v in values):
        raise SupportError(f"types {list(values)} outside support [{support.lo}, {support.hi}]")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def expected_utility_change(
    params: MarketParams,
    theta: float,
    report: float,
    quad: QuadratureSpec | None = None,
    rule: TransferRule | None = None,
) -> float:
    """U(theta, report): expected gain over liquidation from reporting ``report`` with type ``theta``."""
    _check_support(params, np.array([theta]))
    terms = report_terms(params, np.array([report]), quad, rule)
    return float(terms.utility(theta)[0, 0])


def solvency_probability(params: MarketParams, theta: float, quad: QuadratureSpec | None = None) -> float:
    """K(theta): probability of settlement given own type, others truthful."""
    return float(report_terms(params, np.array([theta]), quad).solvency[0])


def _transfer_matrix(params: MarketParams, profiles: FloatArray, rule: TransferRule) -> FloatArray:
    """(m, n) payments for (m, n) profiles."""
    columns = [
        rule.transfers(params, profiles[:, i], np.delete(profiles, i, axis=1)) for i in range(params.n)
    ]
    return np.column_stack(columns)


def _virtual_cost_matrix(params: MarketParams, profiles: FloatArray) -> FloatArray:
    """(m, n) values of l_i + F/phi(theta_i)."""
    revisions = np.asarray(params.revision_of(profiles))
    liquidation = profiles + revisions.sum(axis=1, keepdims=True) - revisions
    return liquidation + params.distribution.inverse_hazard(profiles)


def _expectation(params: MarketParams, func: ProfileFunction, quad: QuadratureSpec) -> Estimate:
    """E[k(theta) * func(theta)] under truthful reporting."""
    if quad.deterministic_for(params.n):
        return Estimate(value=_region_integral(params, func, quad.nodes))
    profiles = draw_types(params.distribution, quad, params.n)
    settled = solvent_array(params, profiles)
    values = np.zeros(profiles.shape[0])
    if np.any(settled):
        values[settled] = func(profiles[settled])
    return mean_estimate(values)


def debtor_expected_utility(
    params: MarketParams, quad: QuadratureSpec | None = None, rule: TransferRule | None = None
) -> Estimate:
    """V = E[k (A - sum_i t_i)]."""
    quad = quad or DEFAULT_QUADRATURE
    rule = rule or OPTIMAL
    return _expectation(
        params, lambda p: params.A - _transfer_matrix(params, p, rule).sum(axis=1), quad
    )


def virtual_surplus(params: MarketParams, quad: QuadratureSpec | None = None) -> Estimate:
    """E[k (A - sum_i [l_i + F/phi(theta_i)])], computed without touching transfers."""
    quad = quad or DEFAULT_QUADRATURE
    return _expectation(params, lambda p: params.A - _virtual_cost_matrix(params, p).sum(axis=1), quad)


def check_ic(
    params: MarketParams,
    grid_size: int = 41,
    quad: QuadratureSpec | None = None,
    rule: TransferRule | None = None,
) -> float:
    """Max over a (theta, report) grid of U(theta, report) - U(theta, theta)."""
    if grid_size < 11:
        raise ValueError(f"IC grid needs at least 11 points, got {grid_size}")
    grid = np.linspace(params.lo, params.hi, grid_size)
    utility = report_terms(params, grid, quad, rule).utility(grid)
    truthful = np.diag(utility)
    violation = float(np.max(utility - truthful[:, None]))
    logger.debug("IC grid %dx%d: max violation %.3e", grid_size, grid_size, violation)
    return violation


def check_ir(
    params: MarketParams,
    grid_size: int = 41,
    quad: QuadratureSpec | None = None,
    rule: TransferRule | None = None,
) -> ParticipationResult:
    """Smallest U(theta, theta) on the grid and U(hi, hi)."""
    grid = np.linspace(params.lo, params.hi, grid_size)
    truthful = np.diag(report_terms(params, grid, quad, rule).utility(grid))
    return ParticipationResult(min_utility=float(truthful.min()), top_type_utility=float(truthful[-1]))


def check_k_monotonicity(params: MarketParams, grid_size: int = 101, quad: QuadratureSpec | None = None) -> float:
    """Largest increase of K between consecutive grid points (positive values are violations)."""
    grid = np.linspace(params.lo, params.hi, grid_size)
    solvency = report_terms(params, grid, quad).solvency
    return float(np.max(np.diff(solvency)))


def _integrated_solvency(params: MarketParams, theta: float, quad: QuadratureSpec) -> float:
    """Integral of K(u) over [theta, hi]."""
    if quad.deterministic_for(params.n):
        always, ever = _region_bounds(params)
        breaks = sorted_breaks(theta, params.hi, always, ever)
        return integrate_segments(
            lambda u: report_terms(params, u, quad).solvency, breaks, quad.nodes
        )
    # K is a step function of u under sampling; its integral is exact per draw.
    others = draw_types(params.distribution, quad, params.n - 1)
    pivots, clamps = pivotal_types_array(params, others)
    reach = np.where(clamps == Clamp.LOW, theta, np.maximum(pivots, theta))
    return float(np.mean(reach - theta))


def check_envelope(
    params: MarketParams,
    grid_size: int = 101,
    quad: QuadratureSpec | None = None,
    rule: TransferRule | None = None,
    step: float = FINITE_DIFFERENCE_STEP,
) -> EnvelopeResiduals:
    """
    Residuals of U(theta, theta) = U(hi, hi) + integral_theta^hi K(u) du and of dU/dtheta = -K.

    Both forms are evaluated on the interior points of the grid.
    """
    quad = quad or DEFAULT_QUADRATURE
    grid = np.linspace(params.lo, params.hi, grid_size)[1:-1]
    if grid.size == 0:
        raise ValueError(f"envelope grid needs interior points, got {grid_size}")

    def truthful(points: FloatArray) -> FloatArray:
        return np.diag(report_terms(params, points, quad, rule).utility(points))

    top = float(truthful(np.array([params.hi]))[0])
    utility = truthful(grid)
    integral = np.array([_integrated_solvency(params, float(t), quad) for t in grid])
    integral_residual = float(np.max(np.abs(utility - (top + integral))))

    slope = (truthful(grid + step) - truthful(grid - step)) / (2.0 * step)
    solvency = report_terms(params, grid, quad).solvency
    derivative_residual = float(np.max(np.abs(slope + solvency)))

    return EnvelopeResiduals(integral_form=integral_residual, derivative_form=derivative_residual)


def check_transfer_identity(
    params: MarketParams,
    quad: QuadratureSpec | None = None,
    creditor: int = 0,
    rule: TransferRule | None = None,
) -> IdentityResult:
    """E[k t_i] against E[k (l_i + F/phi(theta_i))], each side integrated separately."""
    quad = quad or DEFAULT_QUADRATURE
    rule = rule or OPTIMAL
    if not 0 <= creditor < params.n:
        raise IndexError(f"creditor index {creditor} out of range for n={params.n}")

    def paid(p: FloatArray) -> FloatArray:
        return rule.transfers(params, p[:, creditor], np.delete(p, creditor, axis=1))

    def virtual(p: FloatArray) -> FloatArray:
        return _virtual_cost_matrix(params, p)[:, creditor]

    lhs = _expectation(params, paid, quad)
    rhs = _expectation(params, virtual, quad)
    gap = _expectation(params, lambda p: paid(p) - virtual(p), quad)
    return IdentityResult(
        creditor=creditor,
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs.value - rhs.value),
        stderr=gap.stderr,
    )


def blessing_delta(params: MarketParams, quad: QuadratureSpec | None = None) -> BlessingResult:
    """
    E[k sum_i e_i(theta_-i)] and the debtor profit gap it implies.

    The profit without revision keeps the same investment rule and pays
    t0_i = theta~(theta_-i), so the gap equals minus the integral.
    """
    if params.alpha <= 0.0:
        raise PremiseError("debtor-blessing comparison needs a revision weight alpha > 0")
    quad = quad or DEFAULT_QUADRATURE
    n = params.n

    def revision_total(p: FloatArray) -> FloatArray:
        return (n - 1) * np.asarray(params.revision_of(p)).sum(axis=1)

    def pivots(p: FloatArray) -> FloatArray:
        columns = [pivotal_types_array(params, np.delete(p, i, axis=1))[0] for i in range(n)]
        return np.column_stack(columns)

    def profit_with(p: FloatArray) -> FloatArray:
        return params.A - _transfer_matrix(params, p, OPTIMAL).sum(axis=1)

    def profit_without(p: FloatArray) -> FloatArray:
        return params.A - pivots(p).sum(axis=1)

    integral = _expectation(params, revision_total, quad)
    with_revision = _expectation(params, profit_with, quad)
    without_revision = _expectation(params, profit_without, quad)
    gap = _expectation(params, lambda p: profit_with(p) - profit_without(p), quad)
    return BlessingResult(
        integral=integral,
        profit_gap=gap,
        profit_with_revision=with_revision,
        profit_without_revision=without_revision,
    )


def run_verification(
    params: MarketParams,
    settings: VerificationSettings | None = None,
    quad: QuadratureSpec | None = None,
    rule: TransferRule | None = None,
    *,
    config_hash: str | None = None,
) -> VerificationReport:
    """
    Run every check on the economy and collect a VerificationReport.

    Example:
        >>> report = run_verification(params)
        >>> report.passed
        True

        # Negative control
        >>> report = run_verification(params, rule=PerturbedTransferRule(0.5))
        >>> report.max_ic_violation > 0.01
        True
    """
    from jubilee.core.checks import get_all_checks
    from jubilee.core.report import ReportInputs, VerificationReport
    from jubilee.core.results import CheckCollection
    from jubilee.models.schemas import VerificationSettings

    settings = settings or VerificationSettings()
    quad = quad or DEFAULT_QUADRATURE
    rule = rule or OPTIMAL

    collection = CheckCollection()
    for check_cls in get_all_checks():
        check = check_cls(settings=settings, quad=quad)
        logger.info("running %s check", check.name)
        for result in check.run(params, rule):
            collection.add(result)

    inputs = ReportInputs(
        market=params.model_dump(mode="json"),
        quadrature=quad,
        verification=settings,
        rule=rule.to_dict(),
        seed=quad.seed,
        config_hash=config_hash,
    )
    report = VerificationReport.from_checks(collection, inputs)
    for failed in report.failed_checks:
        logger.warning("check %s failed: %.3e (tolerance %.1e)", failed.id, failed.value, failed.tolerance)
    return report
