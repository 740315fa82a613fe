"""
Base check interface.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

from jubilee.core.mechanism import MarketParams
from jubilee.core.quadrature import QuadratureSpec
from jubilee.core.results import CheckResult
from jubilee.core.rules import TransferRule
from jubilee.models.schemas import VerificationSettings


class BaseCheck(ABC):
    """
    Abstract base class for all verification checks.

    Each check measures one property of a transfer rule on an economy and
    returns CheckResult objects comparing the measurement to a tolerance.
    """

    name: str = "base"
    description: str = "Base check"

    def __init__(self, settings: VerificationSettings, quad: QuadratureSpec) -> None:
        self.settings = settings
        self.quad = quad

    @abstractmethod
    def run(self, params: MarketParams, rule: TransferRule) -> list[CheckResult]:
        """
        Measure the property and judge it.

        Args:
            params: The economy under test.
            rule: Transfer rule paid under settlement.

        Returns:
            One or more CheckResult objects.
        """

    def sampled(self, params: MarketParams) -> bool:
        return not self.quad.deterministic_for(params.n)
