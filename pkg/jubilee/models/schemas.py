"""
Pydantic models for the Jubilee configuration file.

Every section rejects unknown keys. The resolved config is hashed and the
hash embedded in every output file, so results can be matched to the exact
inputs that produced them.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from jubilee.core.distributions import FAMILY_PARAMETERS, DistributionKind, TypeDistribution
from jubilee.core.mechanism import MarketParams, RevisionSpec
from jubilee.core.quadrature import QuadratureSpec
from jubilee.errors import ConfigError

SCHEMA_VERSION = 1


class DistributionSection(BaseModel):
    """Type distribution in flat form: ``{"kind", "lo", "hi", ...family params}``."""

    model_config = ConfigDict(extra="forbid")

    kind: DistributionKind = Field(default=DistributionKind.UNIFORM, description="Distribution family")
    lo: float = Field(default=0.0, ge=0.0, description="Lowest recovery value")
    hi: float = Field(default=1.0, description="Highest recovery value")
    rate: float | None = Field(default=None, gt=0.0, description="Exponential rate")
    shape: float | None = Field(default=None, gt=0.0, description="Pareto shape")
    scale: float | None = Field(default=None, gt=0.0, description="Pareto scale")
    sigma: float | None = Field(default=None, gt=0.0, description="Positive-normal sigma")

    @model_validator(mode="after")
    def _family_parameters(self) -> DistributionSection:
        missing = [name for name in FAMILY_PARAMETERS[self.kind] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} requires " + " and ".join(repr(name) for name in missing))
        if self.kind is DistributionKind.TRUNCATED_PARETO and self.scale is not None and self.lo < self.scale:
            raise ValueError(f"truncated-pareto support must start at or above scale={self.scale}, got lo={self.lo}")
        if not self.lo < self.hi:
            raise ValueError(f"support requires lo < hi, got [{self.lo}, {self.hi}]")
        return self

    def to_distribution(self) -> TypeDistribution:
        return TypeDistribution.from_flat(self.model_dump(mode="json", exclude_none=True))


class MarketSection(BaseModel):
    """Public economy. Defaults are the two-creditor uniform example."""

    model_config = ConfigDict(extra="forbid")

    D: float = Field(default=2.0, gt=0.0, description="Total outstanding debt")
    n: int = Field(default=2, ge=2, description="Number of creditors")
    A: float = Field(default=2.0, gt=0.0, description="Continuation value")
    I: float = Field(default=0.0, ge=0.0, description="Investment amount (informational)")  # noqa: E741
    distribution: DistributionSection = Field(default_factory=DistributionSection)
    revision: RevisionSpec = Field(default_factory=lambda: RevisionSpec.linear(1.0))

    def to_params(self) -> MarketParams:
        """Build MarketParams; schema-level inconsistencies become ConfigError."""
        try:
            return MarketParams(
                D=self.D,
                n=self.n,
                A=self.A,
                I=self.I,
                distribution=self.distribution.to_distribution(),
                revision=self.revision,
            )
        except ValidationError as e:
            raise ConfigError(f"invalid market section: {e}") from e


class VerificationSettings(BaseModel):
    """Grid sizes and tolerances for the verification suite."""

    model_config = ConfigDict(extra="forbid")

    # Grids
    ic_grid: int = Field(default=41, ge=11, description="Points per axis of the (theta, report) grid")
    envelope_grid: int = Field(default=101, ge=3, description="Grid for the envelope condition")
    monotonicity_grid: int = Field(default=101, ge=2, description="Grid for K-monotonicity")

    # Tolerances
    ic_tolerance: float = Field(default=1e-6, gt=0.0, description="Max allowed gain from misreporting")
    ir_tolerance: float = Field(default=1e-9, gt=0.0, description="Max allowed negative truthful utility")
    envelope_tolerance: float = Field(default=1e-4, gt=0.0, description="Envelope residual bound")
    monotonicity_tolerance: float = Field(default=1e-6, gt=0.0, description="Allowed increase of K")
    identity_tolerance: float = Field(default=1e-6, gt=0.0, description="Quadrature identity residual bound")
    sigmas: float = Field(default=3.0, gt=0.0, description="Standard errors allowed for Monte Carlo checks")

    # Negative control
    negative_control_beta: float = Field(
        default=0.5,
        gt=0.0,
        description="Coefficient of the report term added by the perturbed transfer rule",
    )
    finite_difference_step: float = Field(default=1e-5, gt=0.0, description="Step for dU/dtheta")


class SimulationSettings(BaseModel):
    """Comparative statics over the revision weight."""

    model_config = ConfigDict(extra="forbid")

    alphas: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0], min_length=1)
    draws: int = Field(default=100_000, ge=1, description="Profiles drawn per alpha")

    @field_validator("alphas")
    @classmethod
    def _non_negative(cls, value: list[float]) -> list[float]:
        if any(a < 0.0 for a in value):
            raise ValueError("revision weights must be non-negative")
        return value


class ProtocolSettings(BaseModel):
    """Secret-shared settlement session."""

    model_config = ConfigDict(extra="forbid")

    transport: Literal["local", "tcp"] = Field(default="local", description="Message transport")
    endpoints: dict[str, str] = Field(
        default_factory=dict,
        description="Role name to host:port, e.g. {'creditor-1': '127.0.0.1:7101'}",
    )
    seed: int | None = Field(default=0, ge=0, description="Share randomness seed; null uses system entropy")
    fractional_bits: int = Field(default=20, ge=8, le=24, description="Fixed-point fractional bits")
    timeout_s: float = Field(default=10.0, gt=0.0, description="Per-round timeout in seconds")
    session_id: str | None = Field(default=None, description="Session identifier (derived from seed if unset)")

    @field_validator("endpoints")
    @classmethod
    def _host_port(cls, value: dict[str, str]) -> dict[str, str]:
        for role, address in value.items():
            host, sep, port = address.rpartition(":")
            if not sep or not host or not port.isdigit():
                raise ValueError(f"endpoint for {role} must be host:port, got {address!r}")
        return value


class OutputSettings(BaseModel):
    """Where results go when --out is not given."""

    model_config = ConfigDict(extra="forbid")

    path: Path | None = Field(default=None, description="Output file or directory")


class Config(BaseModel):
    """Resolved configuration for every command."""

    model_config = ConfigDict(extra="forbid")

    version: int = Field(default=SCHEMA_VERSION, description="Config schema version")
    market: MarketSection = Field(default_factory=MarketSection)
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    verification: VerificationSettings = Field(default_factory=VerificationSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    protocol: ProtocolSettings = Field(default_factory=ProtocolSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)

    @field_validator("version")
    @classmethod
    def _known_version(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported config version {value}, expected {SCHEMA_VERSION}")
        return value

    @classmethod
    def load(cls, path: Path | None) -> Config:
        """Read a JSON config, or return defaults when ``path`` is None."""
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Any) -> Config:
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"config failed validation:\n{e}") from e

    def with_seed(self, seed: int | None) -> Config:
        """Apply --seed to every seeded section."""
        if seed is None:
            return self
        return self.model_copy(
            update={
                "quadrature": self.quadrature.model_copy(update={"seed": seed}),
                "protocol": self.protocol.model_copy(update={"seed": seed}),
            }
        )

    @property
    def seed(self) -> int:
        return self.quadrature.seed

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form."""
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()
