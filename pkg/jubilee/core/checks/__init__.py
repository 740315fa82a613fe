"""
Verification checks for the settlement mechanism.

Each check measures one property of a transfer rule on an economy and
produces CheckResult objects.
"""

from jubilee.core.checks.base import BaseCheck
from jubilee.core.checks.blessing import BlessingCheck
from jubilee.core.checks.envelope import EnvelopeCheck
from jubilee.core.checks.ic import IncentiveCheck
from jubilee.core.checks.identity import TransferIdentityCheck
from jubilee.core.checks.ir import ParticipationCheck
from jubilee.core.checks.monotonicity import MonotonicityCheck
from jubilee.core.checks.welfare import WelfareCheck


def get_all_checks() -> list[type[BaseCheck]]:
    """Return all available check classes."""
    return [
        IncentiveCheck,
        ParticipationCheck,
        MonotonicityCheck,
        EnvelopeCheck,
        TransferIdentityCheck,
        WelfareCheck,
        BlessingCheck,
    ]


__all__ = [
    "BaseCheck",
    "IncentiveCheck",
    "ParticipationCheck",
    "MonotonicityCheck",
    "EnvelopeCheck",
    "TransferIdentityCheck",
    "WelfareCheck",
    "BlessingCheck",
    "get_all_checks",
]
