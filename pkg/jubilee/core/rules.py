"""
Transfer rules evaluated by the analysis suite.

The optimal rule pays t_i = theta~(theta_-i) + e_i(theta_-i). The perturbed
rule adds beta * report, which makes the payment depend on creditor i's own
report and breaks truthful reporting; it serves as the negative control.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from jubilee.core.distributions import FloatArray
from jubilee.core.mechanism import MarketParams, pivotal_types_array


class TransferRule(ABC):
    """Maps a creditor's report and the others' types to a payment under settlement."""

    name: str = "base"
    description: str = "Base transfer rule"

    @abstractmethod
    def transfers(self, params: MarketParams, reports: Any, others: FloatArray) -> FloatArray:
        """
        Evaluate payments for many rows at once.

        Args:
            params: The public economy.
            reports: Creditor i's report, a float or an (m,) array.
            others: (m, n-1) array of the other creditors' types.

        Returns:
            (m,) array of payments.
        """

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name}


class OptimalTransferRule(TransferRule):
    """t_i = theta~(theta_-i) + sum_{j != i} e(theta_j)."""

    name = "optimal"
    description = "Optimal report-independent transfer"

    def transfers(self, params: MarketParams, reports: Any, others: FloatArray) -> FloatArray:
        pivots, _ = pivotal_types_array(params, others)
        revisions = np.asarray(params.revision_of(others), dtype=np.float64).sum(axis=1)
        return pivots + revisions


class PerturbedTransferRule(OptimalTransferRule):
    """Optimal transfer plus ``beta`` times the creditor's own report."""

    name = "perturbed"
    description = "Report-dependent transfer (negative control)"

    def __init__(self, beta: float = 0.5) -> None:
        if beta <= 0.0:
            raise ValueError(f"perturbation beta must be positive, got {beta}")
        self.beta = beta

    def transfers(self, params: MarketParams, reports: Any, others: FloatArray) -> FloatArray:
        return super().transfers(params, reports, others) + self.beta * np.asarray(reports, dtype=np.float64)

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "beta": self.beta}


OPTIMAL = OptimalTransferRule()
