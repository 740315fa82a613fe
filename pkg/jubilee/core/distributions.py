"""
Creditor-type distributions on a bounded support.

Each family is a scipy frozen distribution truncated and renormalized to
[lo, hi], so F(lo) = 0 and F(hi) = 1 exactly. The inverse hazard F/phi is
the informational-rent term of the optimal mechanism and must be strictly
increasing on the support; construction rejects parameterizations that
fail that check.
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Union, overload

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy import integrate, stats

from jubilee.errors import AssumptionError, SupportError

FloatArray = npt.NDArray[np.float64]
ArrayLike = Union[float, FloatArray]

ASSUMPTION_GRID_POINTS = 1000
ENDPOINT_TOLERANCE = 1e-12


class DistributionKind(str, Enum):
    """Supported type-distribution families."""

    UNIFORM = "uniform"
    TRUNCATED_EXPONENTIAL = "truncated-exponential"
    TRUNCATED_PARETO = "truncated-pareto"
    TRUNCATED_POSITIVE_NORMAL = "truncated-positive-normal"

    def __str__(self) -> str:
        return self.value


# Parameters each family needs beyond its support.
FAMILY_PARAMETERS: dict[DistributionKind, tuple[str, ...]] = {
    DistributionKind.UNIFORM: (),
    DistributionKind.TRUNCATED_EXPONENTIAL: ("rate",),
    DistributionKind.TRUNCATED_PARETO: ("shape", "scale"),
    DistributionKind.TRUNCATED_POSITIVE_NORMAL: ("sigma",),
}


class SupportInterval(BaseModel):
    """Closed interval [lo, hi] of admissible recovery values."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lo: float = Field(ge=0.0, allow_inf_nan=False, description="Lowest recovery value")
    hi: float = Field(allow_inf_nan=False, description="Highest recovery value")

    @model_validator(mode="after")
    def _ordered(self) -> SupportInterval:
        if not self.lo < self.hi:
            raise ValueError(f"support requires lo < hi, got [{self.lo}, {self.hi}]")
        return self

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, tol: float = ENDPOINT_TOLERANCE) -> bool:
        return self.lo - tol <= value <= self.hi + tol


class TypeDistribution(BaseModel):
    """
    Distribution F of a creditor's private recovery value.

    Family parameters: ``rate`` for the exponential, ``shape`` and ``scale``
    for the Pareto (``lo`` must be at least ``scale``), ``sigma`` for the
    positive normal. All operations accept a float or a numpy array and
    return the same kind.

    Example:
        >>> dist = TypeDistribution.uniform(0.0, 1.0)
        >>> dist.cdf(0.5)
        0.5
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DistributionKind = Field(description="Distribution family")
    support: SupportInterval = Field(description="Bounded support [lo, hi]")
    rate: float | None = Field(default=None, gt=0.0, description="Exponential rate")
    shape: float | None = Field(default=None, gt=0.0, description="Pareto shape")
    scale: float | None = Field(default=None, gt=0.0, description="Pareto scale")
    sigma: float | None = Field(default=None, gt=0.0, description="Positive-normal sigma")

    _base: Any = PrivateAttr(default=None)
    _mass_lo: float = PrivateAttr(default=0.0)
    _mass: float = PrivateAttr(default=1.0)
    _mean: float | None = PrivateAttr(default=None)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> TypeDistribution:
        return cls(kind=DistributionKind.UNIFORM, support=SupportInterval(lo=lo, hi=hi))

    @classmethod
    def from_flat(cls, spec: dict[str, Any]) -> TypeDistribution:
        """Build from the flat config form ``{"kind", "lo", "hi", ...family params}``."""
        data = dict(spec)
        support = SupportInterval(lo=data.pop("lo"), hi=data.pop("hi"))
        return cls(support=support, **data)

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {
            "kind": self.kind.value,
            "lo": self.support.lo,
            "hi": self.support.hi,
        }
        for name in ("rate", "shape", "scale", "sigma"):
            value = getattr(self, name)
            if value is not None:
                flat[name] = value
        return flat

    def model_post_init(self, __context: Any) -> None:
        self._base = self._build_base()
        lo, hi = self.support.lo, self.support.hi
        self._mass_lo = float(self._base.cdf(lo))
        self._mass = float(self._base.cdf(hi)) - self._mass_lo
        if not self._mass > 0.0:
            raise AssumptionError(f"{self.kind} puts no mass on [{lo}, {hi}]")
        self._check_positive_density()
        self._check_inverse_hazard_increasing()

    def _build_base(self) -> Any:
        lo = self.support.lo
        if self.kind is DistributionKind.UNIFORM:
            return stats.uniform(loc=lo, scale=self.support.width)
        if self.kind is DistributionKind.TRUNCATED_EXPONENTIAL:
            if self.rate is None:
                raise AssumptionError("truncated-exponential requires 'rate'")
            return stats.expon(scale=1.0 / self.rate)
        if self.kind is DistributionKind.TRUNCATED_PARETO:
            if self.shape is None or self.scale is None:
                raise AssumptionError("truncated-pareto requires 'shape' and 'scale'")
            if lo < self.scale:
                raise AssumptionError(
                    f"truncated-pareto support must start at or above scale={self.scale}, got lo={lo}"
                )
            return stats.pareto(b=self.shape, scale=self.scale)
        if self.sigma is None:
            raise AssumptionError("truncated-positive-normal requires 'sigma'")
        return stats.norm(loc=0.0, scale=self.sigma)

    def _check_positive_density(self) -> None:
        # Closed support: a zero density at lo would leave F/phi undefined there.
        grid = np.linspace(self.support.lo, self.support.hi, ASSUMPTION_GRID_POINTS)
        density = self._base.pdf(grid)
        if not np.all(density > 0.0):
            raise AssumptionError(f"{self.kind} density vanishes on the support")

    def _check_inverse_hazard_increasing(self) -> None:
        grid = np.linspace(self.support.lo, self.support.hi, ASSUMPTION_GRID_POINTS)
        ratio = self.inverse_hazard(grid)
        steps = np.diff(ratio)
        # every grid step must rise; a flat stretch fails
        if not np.all(steps > 0.0):
            worst = float(steps.min())
            raise AssumptionError(
                f"F/phi is not strictly increasing for {self.kind} on "
                f"[{self.support.lo}, {self.support.hi}] (worst step {worst:.3e})"
            )

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    @overload
    def cdf(self, theta: float) -> float: ...

    @overload
    def cdf(self, theta: FloatArray) -> FloatArray: ...

    def cdf(self, theta: ArrayLike) -> ArrayLike:
        """F(theta), clamped at the endpoints."""
        x = np.clip(np.asarray(theta, dtype=np.float64), self.support.lo, self.support.hi)
        value = (self._base.cdf(x) - self._mass_lo) / self._mass
        value = np.where(x <= self.support.lo, 0.0, value)
        value = np.where(x >= self.support.hi, 1.0, value)
        return _like(theta, np.clip(value, 0.0, 1.0))

    @overload
    def pdf(self, theta: float) -> float: ...

    @overload
    def pdf(self, theta: FloatArray) -> FloatArray: ...

    def pdf(self, theta: ArrayLike) -> ArrayLike:
        """phi(theta); raises SupportError outside [lo, hi]."""
        x = self._within_support(theta)
        return _like(theta, self._base.pdf(x) / self._mass)

    @overload
    def inverse_hazard(self, theta: float) -> float: ...

    @overload
    def inverse_hazard(self, theta: FloatArray) -> FloatArray: ...

    def inverse_hazard(self, theta: ArrayLike) -> ArrayLike:
        """F(theta)/phi(theta), the informational rent; zero at lo."""
        x = self._within_support(theta)
        density = self._base.pdf(x) / self._mass
        if np.any(density <= 0.0):
            raise AssumptionError("inverse hazard undefined where the density is zero")
        return _like(theta, self.cdf(x) / density)

    @overload
    def quantile(self, u: float) -> float: ...

    @overload
    def quantile(self, u: FloatArray) -> FloatArray: ...

    def quantile(self, u: ArrayLike) -> ArrayLike:
        """Inverse of cdf on [0, 1]."""
        p = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
        x = self._base.ppf(self._mass_lo + p * self._mass)
        return _like(u, np.clip(x, self.support.lo, self.support.hi))

    def sample(self, seed: int | None, count: int) -> FloatArray:
        """
        Draw ``count`` types by inverse transform from a seeded PCG64 generator.

        The same seed always yields the same draws.
        """
        if count < 1:
            raise ValueError(f"count must be at least 1, got {count}")
        rng = np.random.default_rng(seed)
        return np.asarray(self.quantile(rng.random(count)), dtype=np.float64)

    def sample_matrix(self, rng: np.random.Generator, rows: int, cols: int) -> FloatArray:
        """Draw a (rows, cols) matrix of i.i.d. types from an existing generator."""
        return np.asarray(self.quantile(rng.random((rows, cols))), dtype=np.float64)

    @property
    def mean(self) -> float:
        """E[theta], by adaptive quadrature (cached)."""
        if self._mean is None:
            value, _ = integrate.quad(
                lambda t: t * self.pdf(t), self.support.lo, self.support.hi, epsabs=1e-13
            )
            self._mean = float(value)
        return self._mean

    def _within_support(self, theta: ArrayLike) -> FloatArray:
        x = np.asarray(theta, dtype=np.float64)
        lo, hi = self.support.lo, self.support.hi
        if np.any(x < lo - ENDPOINT_TOLERANCE) or np.any(x > hi + ENDPOINT_TOLERANCE):
            raise SupportError(f"type outside support [{lo}, {hi}]: {theta}")
        return np.clip(x, lo, hi)


def _like(original: ArrayLike, value: Any) -> ArrayLike:
    """Return a float for scalar input, an array otherwise."""
    if np.ndim(original) == 0:
        return float(np.asarray(value))
    return np.asarray(value, dtype=np.float64)
