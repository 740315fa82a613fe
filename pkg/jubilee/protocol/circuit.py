"""
The two-creditor settlement circuit over additive shares.

On the uniform economy every step is affine in the creditors' encoded
types, so each evaluator works on its own shares plus public constants:

* solvency:   tau - (theta_1 + theta_2) >= 0, opened once under a
  random mask known only to the evaluators;
* clamping:   (tau - hi) - theta_other >= 0 per creditor, opened the
  same way after a solvent decision;
* transfers:  intercept + slope * theta_other at double scale, where
  (intercept, slope) depends on the now public clamping bit.

Only signs of masked values and, under settlement, the transfers
themselves are ever reconstructed.
"""

from __future__ import annotations

import logging

from jubilee.core.closedform import TwoCreditorEconomy
from jubilee.core.distributions import DistributionKind
from jubilee.core.mechanism import MarketParams
from jubilee.errors import FieldOverflowError, PremiseError
from jubilee.protocol.fixedpoint import HALF, PRIME, Evaluator, FixedPointCodec, to_signed

logger = logging.getLogger(__name__)

MASK_BITS = 20
MASK_BOUND = 1 << MASK_BITS
TRANSFER_BOUND_BITS = 60


def combine_mask(first: int, second: int) -> int:
    """Joint mask in [1, 2**20] from both evaluators' contributions."""
    return 1 + ((first + second) % MASK_BOUND)


class SettlementCircuit:
    """
    Public constants and share arithmetic of one session.

    Both evaluators and the debtor hold an identical circuit built from the
    public economy.
    """

    def __init__(self, economy: TwoCreditorEconomy, codec: FixedPointCodec | None = None) -> None:
        self.economy = economy
        self.codec = codec or FixedPointCodec()
        self._check_overflow()
        self.tau_raw = self.codec.encode(economy.tau)
        self.clamp_raw = self.codec.encode(economy.tau - economy.hi)

    @classmethod
    def from_params(cls, params: MarketParams, fractional_bits: int = 20) -> SettlementCircuit:
        if params.n != 2 or params.distribution.kind is not DistributionKind.UNIFORM:
            raise PremiseError("the secret-shared circuit covers two creditors with uniform types")
        return cls(TwoCreditorEconomy.from_market(params), FixedPointCodec(fractional_bits=fractional_bits))

    @property
    def scale_bits(self) -> int:
        return self.codec.fractional_bits

    def _check_overflow(self) -> None:
        econ = self.economy
        scale = self.codec.scale
        bound = max(abs(econ.lo), abs(econ.hi))
        comparison = (abs(econ.tau) + 2.0 * bound + 1.0) * scale * MASK_BOUND
        if comparison >= HALF:
            raise FieldOverflowError(
                f"masked comparison magnitude {comparison:.3g} exceeds the field half-range {HALF}"
            )
        limit = 2.0 ** (TRANSFER_BOUND_BITS - 2 * self.codec.fractional_bits)
        for clamped in (False, True):
            intercept, slope = econ.transfer_coefficients(clamped)
            if abs(intercept) + abs(slope) * bound >= limit:
                raise FieldOverflowError(f"transfer bound exceeds 2**{TRANSFER_BOUND_BITS - 2 * self.scale_bits}")

    # -- evaluator side -----------------------------------------------------

    def _public(self, evaluator: Evaluator, raw: int) -> int:
        """A public constant enters through E1's share only."""
        return raw if evaluator is Evaluator.E1 else 0

    def solvency_share(self, evaluator: Evaluator, share_1: int, share_2: int) -> int:
        """Share of enc(tau) - x_1 - x_2."""
        return (self._public(evaluator, self.tau_raw) - share_1 - share_2) % PRIME

    def clamp_share(self, evaluator: Evaluator, share_other: int) -> int:
        """Share of enc(tau - hi) - x_other."""
        return (self._public(evaluator, self.clamp_raw) - share_other) % PRIME

    def transfer_share(self, evaluator: Evaluator, share_other: int, clamped_high: bool) -> int:
        """Share of the transfer at scale 2**(2f)."""
        intercept, slope = self.economy.transfer_coefficients(clamped_high)
        intercept_raw = self.codec.encode(intercept, scale_bits=2 * self.scale_bits)
        slope_raw = self.codec.encode(slope)
        return (self._public(evaluator, intercept_raw) + slope_raw * share_other) % PRIME

    @staticmethod
    def masked(share_value: int, mask: int) -> int:
        return (mask * share_value) % PRIME

    # -- debtor side --------------------------------------------------------

    @staticmethod
    def non_negative(opened: int) -> bool:
        """Sign of a reconstructed masked value; zero counts as non-negative."""
        return to_signed(opened) >= 0

    def decode_transfer(self, opened: int) -> float:
        return self.codec.decode(opened, scale_bits=2 * self.scale_bits)

    # -- harness ------------------------------------------------------------

    @property
    def band_width(self) -> float:
        """Half-width of the region where rounding may flip the solvency test, in units of A - S."""
        return (2.0 + self.economy.alpha) * 2.0 ** (1 - self.scale_bits)

    def virtual_cost(self, theta_1: float, theta_2: float) -> float:
        """S = (2 + alpha)(theta_1 + theta_2) - 2 lo - 2 alpha mu."""
        econ = self.economy
        return (2.0 + econ.alpha) * (theta_1 + theta_2) - 2.0 * econ.lo - 2.0 * econ.alpha * econ.mu

    def in_quantization_band(self, theta_1: float, theta_2: float) -> bool:
        return abs(self.economy.A - self.virtual_cost(theta_1, theta_2)) < self.band_width

    def transfer_tolerance(self) -> float:
        """Worst-case reconstruction error of an opened transfer."""
        return 2.0 ** -self.scale_bits * (2.0 + self.economy.alpha + 1.0)
