"""
The optimal revelation mechanism for debt settlement.

Creditor i with private recovery value theta_i has liquidation value
l_i = theta_i + sum_{j != i} e(theta_j). The entity stays solvent when the
continuation value A covers every creditor's liquidation value plus the
informational rent F/phi:

    k(theta) = 1  iff  A >= sum_i [ l_i + F(theta_i)/phi(theta_i) ]

Splitting that sum into B(theta_i) + Q(theta_-i) gives the pivotal type
theta~(theta_-i), the largest report creditor i can make without forcing
bankruptcy. Under settlement creditor i receives
t_i = theta~(theta_-i) + e_i(theta_-i), which never reads i's own report,
and forgives d - t_i.

Scalar functions follow the operation signatures; the ``*_array`` variants
evaluate many profiles at once and back the analysis module.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from enum import Enum, IntEnum
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from scipy import integrate

from jubilee.core.distributions import FloatArray, TypeDistribution
from jubilee.errors import AssumptionError, SupportError

logger = logging.getLogger(__name__)

BISECTION_XTOL = 1e-12
BISECTION_MAX_ITER = 200
ZERO_MEAN_TOLERANCE = 1e-9
IR_TOLERANCE = 1e-9

BoolArray = npt.NDArray[np.bool_]
ClampArray = npt.NDArray[np.int8]


class RevisionKind(str, Enum):
    """How a creditor revises its recovery estimate on learning another's type."""

    ZERO = "zero"
    LINEAR = "linear"

    def __str__(self) -> str:
        return self.value


class RevisionSpec(BaseModel):
    """
    Revision function e, shared by all creditors.

    ``linear`` means e(theta) = alpha * (theta - mu) with mu the mean of the
    type distribution; ``zero`` means e = 0 (differences in preferences only).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: RevisionKind = Field(default=RevisionKind.ZERO, description="Revision family")
    alpha: float = Field(default=0.0, ge=0.0, allow_inf_nan=False, description="Weight on others' types")

    @model_validator(mode="after")
    def _zero_has_no_weight(self) -> RevisionSpec:
        if self.kind is RevisionKind.ZERO and self.alpha != 0.0:
            raise ValueError("revision kind 'zero' takes no alpha")
        return self

    @classmethod
    def linear(cls, alpha: float) -> RevisionSpec:
        return cls(kind=RevisionKind.LINEAR, alpha=alpha)

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.kind is RevisionKind.LINEAR else 0.0


class MarketParams(BaseModel):
    """
    Public economy: debt, creditors, continuation value and type distribution.

    Every creditor holds an identical share d = D / n of the debt.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    D: float = Field(gt=0.0, allow_inf_nan=False, description="Total outstanding debt")
    n: int = Field(ge=2, description="Number of creditors")
    A: float = Field(gt=0.0, allow_inf_nan=False, description="Continuation value (DCF of assets plus investment)")
    I: float = Field(default=0.0, ge=0.0, description="Investment amount (informational)")  # noqa: E741
    distribution: TypeDistribution = Field(description="Distribution of creditor types")
    revision: RevisionSpec = Field(default_factory=RevisionSpec, description="Revision function e")

    _mu: float = PrivateAttr(default=0.0)

    @model_validator(mode="after")
    def _check_economy(self) -> MarketParams:
        if self.distribution.support.hi > self.D:
            raise ValueError(
                f"type support upper bound {self.distribution.support.hi} exceeds total debt D={self.D}"
            )
        return self

    def model_post_init(self, __context: Any) -> None:
        self._mu = self.distribution.mean if self.revision.effective_alpha > 0.0 else 0.0
        self._check_zero_mean()
        if self.max_liquidation_value > self.d:
            logger.warning(
                "liquidation value can reach %.6g, above the per-creditor debt d=%.6g",
                self.max_liquidation_value,
                self.d,
            )

    def _check_zero_mean(self) -> None:
        if self.revision.effective_alpha == 0.0:
            return
        support = self.distribution.support
        value, _ = integrate.quad(
            lambda t: self.revision_of(t) * self.distribution.pdf(t), support.lo, support.hi
        )
        if abs(value) > ZERO_MEAN_TOLERANCE:
            raise AssumptionError(f"revision function is not zero-mean (integral {value:.3e})")

    @property
    def d(self) -> float:
        """Per-creditor debt."""
        return self.D / self.n

    @property
    def alpha(self) -> float:
        return self.revision.effective_alpha

    @property
    def lo(self) -> float:
        return self.distribution.support.lo

    @property
    def hi(self) -> float:
        return self.distribution.support.hi

    @property
    def max_liquidation_value(self) -> float:
        return self.hi + (self.n - 1) * float(self.revision_of(self.hi))

    def revision_of(self, theta: Any) -> Any:
        """e(theta) for a float or an array."""
        alpha = self.revision.effective_alpha
        if alpha == 0.0:
            return np.zeros_like(np.asarray(theta, dtype=np.float64)) if np.ndim(theta) else 0.0
        value = alpha * (np.asarray(theta, dtype=np.float64) - self._mu)
        return float(value) if np.ndim(theta) == 0 else value

    def with_continuation_value(self, A: float) -> MarketParams:
        return self.model_copy(update={"A": A})

    def with_revision(self, revision: RevisionSpec) -> MarketParams:
        return MarketParams(
            D=self.D, n=self.n, A=self.A, I=self.I, distribution=self.distribution, revision=revision
        )


class TypeProfile(BaseModel):
    """Vector of creditor recovery values theta = (theta_1, ..., theta_n)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    theta: tuple[float, ...] = Field(min_length=2, description="Private recovery values")

    @field_validator("theta")
    @classmethod
    def _finite(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not all(np.isfinite(value)):
            raise ValueError("types must be finite")
        return value

    @classmethod
    def of(cls, *theta: float) -> TypeProfile:
        return cls(theta=tuple(float(t) for t in theta))

    def __len__(self) -> int:
        return len(self.theta)

    def others(self, i: int) -> tuple[float, ...]:
        """theta_-i."""
        return self.theta[:i] + self.theta[i + 1 :]

    def as_array(self) -> FloatArray:
        return np.asarray(self.theta, dtype=np.float64)


class Clamp(IntEnum):
    """Regime of the pivotal-type equation."""

    NONE = 0
    LOW = 1  # bankruptcy for every report
    HIGH = 2  # solvency for every report


class PivotalType(BaseModel):
    """theta~(theta_-i) together with the clamping regime."""

    model_config = ConfigDict(frozen=True)

    value: float
    clamp: Clamp = Clamp.NONE

    def admits(self, report: float) -> bool:
        """Whether a report keeps the entity solvent."""
        return self.clamp is not Clamp.LOW and report <= self.value


class OutcomeFlag(str, Enum):
    """Diagnostics attached to a settlement outcome."""

    TRANSFER_EXCEEDS_DEBT = "transfer-exceeds-debt"
    PIVOTAL_CLAMPED_LOW = "pivotal-clamped-low"
    PIVOTAL_CLAMPED_HIGH = "pivotal-clamped-high"
    LIQUIDATION_EXCEEDS_DEBT = "liquidation-exceeds-debt"
    QUANTIZATION_BAND = "quantization-band"

    def __str__(self) -> str:
        return self.value


class Outcome(BaseModel):
    """Settlement decision, transfers and forgiveness for one profile."""

    model_config = ConfigDict(frozen=True)

    solvent: bool = Field(description="Investment decision k")
    pivotal: tuple[float, ...] = Field(description="theta~(theta_-i) per creditor")
    transfers: tuple[float, ...] = Field(description="Payment t_i (0 when bankrupt)")
    forgiveness: tuple[float, ...] = Field(description="Debt written down d - t_i (0 when bankrupt)")
    flags: tuple[OutcomeFlag, ...] = Field(default=(), description="Diagnostics")

    def has_flag(self, flag: OutcomeFlag) -> bool:
        return flag in self.flags


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------


def check_profile(params: MarketParams, profile: TypeProfile) -> None:
    """Raise SupportError unless the profile has n entries inside the support."""
    if len(profile) != params.n:
        raise SupportError(f"profile has {len(profile)} types, economy has n={params.n}")
    support = params.distribution.support
    outside = [t for t in profile.theta if not support.contains(t)]
    if outside:
        raise SupportError(f"types {outside} outside support [{support.lo}, {support.hi}]")


def _check_index(params: MarketParams, i: int) -> None:
    if not 0 <= i < params.n:
        raise IndexError(f"creditor index {i} out of range for n={params.n}")


def _check_others(params: MarketParams, others: Sequence[float]) -> FloatArray:
    values = np.asarray(others, dtype=np.float64)
    if values.shape != (params.n - 1,):
        raise SupportError(f"expected {params.n - 1} other types, got {values.shape}")
    support = params.distribution.support
    if not all(support.contains(float(t)) for t in values):
        raise SupportError(f"other types {list(values)} outside support [{support.lo}, {support.hi}]")
    return values


# ---------------------------------------------------------------------------
# Scalar operations
# ---------------------------------------------------------------------------


def liquidation_value(params: MarketParams, i: int, profile: TypeProfile) -> float:
    """l_i(theta_i, theta_-i) = theta_i + sum_{j != i} e(theta_j)."""
    _check_index(params, i)
    check_profile(params, profile)
    value = float(liquidation_values_array(params, profile.as_array()[None, :])[0, i])
    if value > params.d:
        logger.debug("creditor %d liquidation value %.6g exceeds d=%.6g", i, value, params.d)
    return value


def b_term(params: MarketParams, theta_i: Any) -> Any:
    """B(theta_i) = theta_i + F/phi(theta_i) + sum_{j != i} e_j(theta_i)."""
    dist = params.distribution
    return theta_i + dist.inverse_hazard(theta_i) + (params.n - 1) * params.revision_of(theta_i)


def q_term(params: MarketParams, i: int, others: Sequence[float]) -> float:
    """
    Q(theta_-i) = sum_j sum_{k != j,i} e_j(theta_k) + sum_{j != i} [theta_j + F/phi(theta_j)].

    Every theta_k with k != i is revised by the n - 1 creditors other than k.
    """
    _check_index(params, i)
    values = _check_others(params, others)
    return float(q_term_array(params, values[None, :])[0])


def pivotal_type(params: MarketParams, i: int, others: Sequence[float]) -> PivotalType:
    """
    theta~(theta_-i): the root of B(theta) = A - Q(theta_-i) on the support.

    Returns ``(lo, Clamp.LOW)`` when even the lowest report forces bankruptcy
    and ``(hi, Clamp.HIGH)`` when every report keeps the entity solvent.
    """
    _check_index(params, i)
    values = _check_others(params, others)
    pivots, clamps = pivotal_types_array(params, values[None, :])
    return PivotalType(value=float(pivots[0]), clamp=Clamp(int(clamps[0])))


def investment_rule(params: MarketParams, profile: TypeProfile) -> bool:
    """k(theta) = 1 iff A >= sum_i [l_i + F/phi(theta_i)]; equality counts as solvent."""
    check_profile(params, profile)
    return bool(solvent_array(params, profile.as_array()[None, :])[0])


def optimal_transfer(params: MarketParams, i: int, others: Sequence[float]) -> float:
    """t_i(theta_-i) = theta~(theta_-i) + sum_{j != i} e(theta_j)."""
    _check_index(params, i)
    values = _check_others(params, others)
    return float(transfers_array(params, values[None, :])[0])


def settle(params: MarketParams, profile: TypeProfile) -> Outcome:
    """
    Evaluate the mechanism on reported types, as the trusted party would.

    Example:
        >>> params = MarketParams(D=2, n=2, A=2.0, distribution=TypeDistribution.uniform(0, 1),
        ...                       revision=RevisionSpec.linear(1.0))
        >>> [round(f, 6) for f in settle(params, TypeProfile.of(0.3, 0.6)).forgiveness]
        [0.5, 0.5]
    """
    check_profile(params, profile)
    theta = profile.as_array()
    n = params.n

    others = np.stack([np.delete(theta, i) for i in range(n)])
    pivots, clamps = pivotal_types_array(params, others)
    solvent = bool(solvent_array(params, theta[None, :])[0])

    flags: set[OutcomeFlag] = set()
    if np.any(clamps == Clamp.LOW):
        flags.add(OutcomeFlag.PIVOTAL_CLAMPED_LOW)
    if np.any(clamps == Clamp.HIGH):
        flags.add(OutcomeFlag.PIVOTAL_CLAMPED_HIGH)

    liquidation = liquidation_values_array(params, theta[None, :])[0]
    if np.any(liquidation > params.d):
        flags.add(OutcomeFlag.LIQUIDATION_EXCEEDS_DEBT)

    if solvent:
        transfers = pivots + _revision_sums(params, others)
        forgiveness = params.d - transfers
        if np.any(transfers > params.d):
            flags.add(OutcomeFlag.TRANSFER_EXCEEDS_DEBT)
        shortfall = transfers - liquidation
        if np.any(shortfall < -IR_TOLERANCE):
            logger.warning("transfer below liquidation value under settlement: %s", shortfall)
    else:
        transfers = np.zeros(n)
        forgiveness = np.zeros(n)

    return Outcome(
        solvent=solvent,
        pivotal=tuple(float(v) for v in pivots),
        transfers=tuple(float(v) for v in transfers),
        forgiveness=tuple(float(v) for v in forgiveness),
        flags=tuple(sorted(flags, key=lambda f: f.value)),
    )


# ---------------------------------------------------------------------------
# Vectorized kernels
# ---------------------------------------------------------------------------


def _revision_sums(params: MarketParams, others: FloatArray) -> FloatArray:
    """e_i(theta_-i) = sum over the row of e(theta_j)."""
    return np.asarray(params.revision_of(others), dtype=np.float64).sum(axis=-1)


def liquidation_values_array(params: MarketParams, profiles: FloatArray) -> FloatArray:
    """(m, n) liquidation values for (m, n) profiles."""
    revisions = np.asarray(params.revision_of(profiles), dtype=np.float64)
    return profiles + revisions.sum(axis=1, keepdims=True) - revisions


def virtual_costs_array(params: MarketParams, profiles: FloatArray) -> FloatArray:
    """(m,) values of sum_i [l_i + F/phi(theta_i)]."""
    rents = np.asarray(params.distribution.inverse_hazard(profiles), dtype=np.float64)
    return (liquidation_values_array(params, profiles) + rents).sum(axis=1)


def solvent_array(params: MarketParams, profiles: FloatArray) -> BoolArray:
    """(m,) investment decisions for (m, n) profiles."""
    return params.A >= virtual_costs_array(params, profiles)


def q_term_array(params: MarketParams, others: FloatArray) -> FloatArray:
    """(m,) values of Q for (m, n-1) rows of other creditors' types."""
    revisions = np.asarray(params.revision_of(others), dtype=np.float64)
    rents = np.asarray(params.distribution.inverse_hazard(others), dtype=np.float64)
    return (params.n - 1) * revisions.sum(axis=1) + (others + rents).sum(axis=1)


def pivotal_types_array(params: MarketParams, others: FloatArray) -> tuple[FloatArray, ClampArray]:
    """(m,) pivotal types and clamp codes for (m, n-1) rows of other creditors' types."""
    targets = params.A - q_term_array(params, others)
    return solve_pivotal(params, targets)


def solve_pivotal(params: MarketParams, targets: FloatArray) -> tuple[FloatArray, ClampArray]:
    """
    Solve B(theta) = target for every target by bisection on the support.

    B is strictly increasing, so the bracket [lo, hi] always converges. The
    returned value is the lower end of the final bracket, so B(value) never
    exceeds its target.
    """
    lo, hi = params.lo, params.hi
    targets = np.asarray(targets, dtype=np.float64)
    b_lo = float(b_term(params, lo))
    b_hi = float(b_term(params, hi))

    clamps = np.full(targets.shape, Clamp.NONE, dtype=np.int8)
    clamps[b_lo > targets] = Clamp.LOW
    clamps[b_hi <= targets] = Clamp.HIGH

    pivots = np.where(clamps == Clamp.HIGH, hi, lo).astype(np.float64)
    active = clamps == Clamp.NONE
    if np.any(active):
        target = targets[active]
        left = np.full(target.shape, lo)
        right = np.full(target.shape, hi)
        for _ in range(BISECTION_MAX_ITER):
            if float(np.max(right - left)) <= BISECTION_XTOL:
                break
            mid = 0.5 * (left + right)
            below = np.asarray(b_term(params, mid)) <= target
            left = np.where(below, mid, left)
            right = np.where(below, right, mid)
        pivots[active] = left
    return pivots, clamps


def transfers_array(params: MarketParams, others: FloatArray) -> FloatArray:
    """(m,) optimal transfers for (m, n-1) rows of other creditors' types."""
    pivots, _ = pivotal_types_array(params, others)
    return pivots + _revision_sums(params, others)


def admitted_array(pivots: FloatArray, clamps: ClampArray, reports: Any) -> BoolArray:
    """Whether each report keeps the entity solvent given its pivotal type."""
    return (clamps != Clamp.LOW) & (np.asarray(reports) <= pivots)

