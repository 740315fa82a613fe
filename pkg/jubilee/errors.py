"""
Exception hierarchy for Jubilee.

Library code raises these; only the CLI turns them into exit codes.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DOMAIN = 2
EXIT_BANKRUPT = 3
EXIT_VERIFICATION_FAILED = 4
EXIT_PROTOCOL = 5
EXIT_TIMEOUT = 6


class JubileeError(Exception):
    """Base error for the package."""

    exit_code: int = EXIT_DOMAIN


class ConfigError(JubileeError):
    """Configuration is malformed, fails schema validation, or has unknown keys."""

    exit_code = EXIT_CONFIG


class DomainError(JubileeError):
    """Inputs violate the economic model."""

    exit_code = EXIT_DOMAIN


class SupportError(DomainError):
    """A type or report lies outside the distribution support."""


class AssumptionError(DomainError):
    """A distribution or revision spec fails a model assumption."""


class PremiseError(DomainError):
    """A check was requested for an economy where its premise does not hold."""


class ProtocolError(JubileeError):
    """A protocol session failed."""

    exit_code = EXIT_PROTOCOL


class MalformedMessageError(ProtocolError):
    """A frame or payload could not be decoded or is out of place."""


class ProtocolVersionMismatchError(ProtocolError):
    """A peer speaks a different wire version."""


class FieldOverflowError(ProtocolError):
    """Inputs fall outside the range the fixed-point circuit can carry."""


class PartyConnectionError(ProtocolError):
    """A peer endpoint refused or dropped the connection."""


class PartyTimeoutError(ProtocolError):
    """A round did not complete within the configured timeout."""

    exit_code = EXIT_TIMEOUT
