"""
Jubilee - optimal debt-relief settlements from private creditor recovery values.

Basic usage:
    >>> from jubilee import MarketParams, TypeProfile, settle
    >>> outcome = settle(params, TypeProfile.of(0.3, 0.6))
    >>> outcome.forgiveness

    >>> from jubilee import run_verification
    >>> run_verification(params).to_json("report.json")
"""

from jubilee.core.analysis import run_verification
from jubilee.core.distributions import TypeDistribution
from jubilee.core.mechanism import MarketParams, Outcome, RevisionSpec, TypeProfile, settle
from jubilee.core.report import VerificationReport

__version__ = "0.1.0"

__all__ = [
    # Main entry points
    "settle",
    "run_verification",
    # Domain models
    "MarketParams",
    "RevisionSpec",
    "TypeDistribution",
    "TypeProfile",
    "Outcome",
    "VerificationReport",
    # Version
    "__version__",
]
