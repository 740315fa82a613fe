"""Configuration models for Jubilee."""

from jubilee.models.schemas import (
    Config,
    DistributionSection,
    MarketSection,
    OutputSettings,
    ProtocolSettings,
    SimulationSettings,
    VerificationSettings,
)

__all__ = [
    "Config",
    "DistributionSection",
    "MarketSection",
    "OutputSettings",
    "ProtocolSettings",
    "SimulationSettings",
    "VerificationSettings",
]
