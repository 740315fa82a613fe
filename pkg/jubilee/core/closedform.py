"""
Two-creditor uniform economy in closed form.

With types uniform on [lo, hi], F/phi(theta) = theta - lo and
e(theta) = alpha * (theta - mu) with mu the midpoint, so

    B(theta) = (2 + alpha) * theta - lo - alpha * mu

and the investment rule becomes a threshold on the sum of types:

    k = 1  iff  theta_1 + theta_2 <= tau,   tau = (A + 2 * alpha * mu + 2 * lo) / (2 + alpha)

The pivotal type is tau - theta_other clamped into the support, and the
transfer is affine in theta_other on each clamping branch. On [0, 1]:

    theta~(theta_2) = (A + alpha) / (2 + alpha) - theta_2
    t_1(theta_2)    = (2A - alpha^2) / (2 alpha + 4) - theta_2 (1 - alpha)

``discrepancy_table`` compares these with the printed constants of the
worked example and quantifies each difference.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from jubilee.core.distributions import DistributionKind, TypeDistribution
from jubilee.core.mechanism import MarketParams, RevisionSpec
from jubilee.errors import PremiseError, SupportError


class TwoCreditorEconomy(BaseModel):
    """Two creditors, uniform types on [lo, hi], linear revision with weight alpha."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    A: float = Field(gt=0.0, description="Continuation value")
    D: float = Field(gt=0.0, description="Total outstanding debt")
    alpha: float = Field(default=0.0, ge=0.0, description="Revision weight")
    lo: float = Field(default=0.0, ge=0.0, description="Support lower bound")
    hi: float = Field(default=1.0, description="Support upper bound")

    @model_validator(mode="after")
    def _check_support(self) -> TwoCreditorEconomy:
        if not self.lo < self.hi:
            raise ValueError(f"support requires lo < hi, got [{self.lo}, {self.hi}]")
        if self.hi > self.D:
            raise ValueError(f"support upper bound {self.hi} exceeds total debt D={self.D}")
        return self

    @classmethod
    def from_market(cls, params: MarketParams) -> TwoCreditorEconomy:
        """Convert a two-creditor uniform MarketParams."""
        if params.n != 2 or params.distribution.kind is not DistributionKind.UNIFORM:
            raise PremiseError("closed form needs two creditors with uniform types")
        return cls(A=params.A, D=params.D, alpha=params.alpha, lo=params.lo, hi=params.hi)

    def to_market(self) -> MarketParams:
        revision = RevisionSpec.linear(self.alpha) if self.alpha > 0.0 else RevisionSpec()
        return MarketParams(
            D=self.D,
            n=2,
            A=self.A,
            distribution=TypeDistribution.uniform(self.lo, self.hi),
            revision=revision,
        )

    @property
    def d(self) -> float:
        return self.D / 2

    @property
    def mu(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def tau(self) -> float:
        """Settlement threshold on theta_1 + theta_2."""
        return (self.A + 2.0 * self.alpha * self.mu + 2.0 * self.lo) / (2.0 + self.alpha)

    def revision(self, theta: float) -> float:
        return self.alpha * (theta - self.mu)

    def clamped_high(self, theta_other: float) -> bool:
        """Every report of the creditor settles against this counterparty."""
        return theta_other <= self.tau - self.hi

    def transfer_coefficients(self, clamped_high: bool) -> tuple[float, float]:
        """(intercept, slope) of the transfer as an affine function of theta_other."""
        if clamped_high:
            return self.hi - self.alpha * self.mu, self.alpha
        return self.tau - self.alpha * self.mu, self.alpha - 1.0

    def _check(self, *values: float) -> None:
        outside = [v for v in values if not self.lo - 1e-12 <= v <= self.hi + 1e-12]
        if outside:
            raise SupportError(f"types {outside} outside support [{self.lo}, {self.hi}]")


def cf_investment_rule(econ: TwoCreditorEconomy, theta_1: float, theta_2: float) -> bool:
    """A >= (2 + alpha)(theta_1 + theta_2) - 2 lo - 2 alpha mu; (2 + alpha)(theta_1 + theta_2) - alpha on [0, 1]."""
    econ._check(theta_1, theta_2)
    virtual_cost = (2.0 + econ.alpha) * (theta_1 + theta_2) - 2.0 * econ.lo - 2.0 * econ.alpha * econ.mu
    return econ.A >= virtual_cost


def cf_pivotal(econ: TwoCreditorEconomy, theta_other: float) -> float:
    """tau - theta_other, clamped into [lo, hi]."""
    econ._check(theta_other)
    return float(np.clip(econ.tau - theta_other, econ.lo, econ.hi))


def cf_transfer(econ: TwoCreditorEconomy, i: int, theta_other: float) -> float:
    """Payment to creditor ``i`` (0 or 1); identical for both by symmetry."""
    if i not in (0, 1):
        raise IndexError(f"creditor index {i} out of range for two creditors")
    return cf_pivotal(econ, theta_other) + econ.revision(theta_other)


def cf_forgiveness(econ: TwoCreditorEconomy, i: int, theta_other: float) -> float:
    """d - t_i; meaningful only under settlement."""
    return econ.d - cf_transfer(econ, i, theta_other)


# ---------------------------------------------------------------------------
# Printed constants of the worked example
# ---------------------------------------------------------------------------


def printed_investment_rule(econ: TwoCreditorEconomy, theta_1: float, theta_2: float) -> bool:
    return econ.A >= (theta_1 + theta_2) * (1.0 + econ.alpha) - econ.alpha


def printed_pivotal(econ: TwoCreditorEconomy, theta_other: float) -> float:
    return (4.0 / (2.0 + econ.alpha)) * (econ.A - econ.alpha / 2.0) - 2.0 * theta_other


def printed_transfer(econ: TwoCreditorEconomy, theta_other: float) -> float:
    alpha = econ.alpha
    return (4.0 * econ.A - alpha**2) / (2.0 * alpha + 4.0) - theta_other * (1.0 - alpha)


class DiscrepancyRow(BaseModel):
    """Printed formula against the one derived from the general rule."""

    model_config = ConfigDict(frozen=True)

    quantity: str
    printed: str
    derived: str
    max_abs_deviation: float = Field(description="Largest |printed - derived| over the samples")
    disagreement_rate: float = Field(description="Share of samples where the two disagree")


def discrepancy_table(econ: TwoCreditorEconomy, samples: int = 1000, seed: int = 0) -> list[DiscrepancyRow]:
    """
    Evaluate the printed example formulas next to the derived ones on random types.

    Only meaningful on [0, 1], where the printed formulas were stated.
    """
    if (econ.lo, econ.hi) != (0.0, 1.0):
        raise PremiseError("printed formulas are stated for types on [0, 1]")
    rng = np.random.default_rng(seed)
    draws = rng.random((samples, 2))

    printed_k = np.array([printed_investment_rule(econ, a, b) for a, b in draws])
    derived_k = np.array([cf_investment_rule(econ, a, b) for a, b in draws])
    printed_p = np.array([printed_pivotal(econ, b) for _, b in draws])
    derived_p = np.array([econ.tau - b for _, b in draws])
    printed_t = np.array([printed_transfer(econ, b) for _, b in draws])
    derived_t = np.array([econ.tau - econ.alpha * econ.mu + (econ.alpha - 1.0) * b for _, b in draws])
    derived_f = np.array([cf_forgiveness(econ, 0, b) for _, b in draws])
    printed_f = econ.d - draws[:, 0]

    def row(quantity: str, printed: str, derived: str, p: np.ndarray, q: np.ndarray) -> DiscrepancyRow:
        deviation = np.abs(p.astype(np.float64) - q.astype(np.float64))
        return DiscrepancyRow(
            quantity=quantity,
            printed=printed,
            derived=derived,
            max_abs_deviation=float(deviation.max()),
            disagreement_rate=float(np.mean(deviation > 1e-12)),
        )

    return [
        row(
            "investment rule",
            "A >= (t1 + t2)(1 + a) - a",
            "A >= (t1 + t2)(2 + a) - a",
            printed_k,
            derived_k,
        ),
        row(
            "pivotal type",
            "(4 / (2 + a))(A - a/2) - 2 t_other",
            "(A + a) / (2 + a) - t_other",
            printed_p,
            derived_p,
        ),
        row(
            "transfer",
            "(4A - a^2) / (2a + 4) - t_other (1 - a)",
            "(2A - a^2) / (2a + 4) - t_other (1 - a)",
            printed_t,
            derived_t,
        ),
        row("forgiveness", "d - theta_own", "d - t_own", printed_f, derived_f),
    ]
