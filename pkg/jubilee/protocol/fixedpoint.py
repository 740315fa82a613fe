"""
Fixed-point encoding over the prime field Z_p, p = 2**61 - 1, and two-party
additive secret sharing.

Reals are scaled by 2**f and rounded half away from zero; values above
(p - 1) / 2 read back as negative. Products of two encodings carry scale
2**(2f) and are decoded with ``scale_bits=2 * f``.
"""

from __future__ import annotations

import secrets
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from jubilee.errors import FieldOverflowError

PRIME = 2**61 - 1
HALF = (PRIME - 1) // 2
ENCODABLE_BOUND = 2**30


class Evaluator(str, Enum):
    """The two non-colluding share holders."""

    E1 = "evaluator-1"
    E2 = "evaluator-2"

    def __str__(self) -> str:
        return self.value


class Share(BaseModel):
    """One evaluator's additive share of a field element."""

    model_config = ConfigDict(frozen=True)

    party: Evaluator
    value: int = Field(ge=0, lt=PRIME)


class FieldRandomness:
    """
    Uniform field elements from a seeded PCG64 generator, or from system
    entropy when no seed is given.
    """

    def __init__(self, seed: int | list[int] | None) -> None:
        self._rng = None if seed is None else np.random.default_rng(seed)

    @property
    def seeded(self) -> bool:
        return self._rng is not None

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if self._rng is None:
            return secrets.randbelow(bound)
        return int(self._rng.integers(0, bound, dtype=np.int64))

    def element(self) -> int:
        return self.below(PRIME)


class FixedPointCodec(BaseModel):
    """
    Encoder for f fractional bits.

    Example:
        >>> codec = FixedPointCodec(fractional_bits=20)
        >>> codec.encode(0.4)
        419430
    """

    model_config = ConfigDict(frozen=True)

    fractional_bits: int = Field(default=20, ge=1, le=28)

    @property
    def scale(self) -> int:
        return 1 << self.fractional_bits

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.fractional_bits

    def fixed(self, x: float, scale_bits: int | None = None) -> int:
        """round(x * 2**scale_bits) as a signed integer, half away from zero."""
        bits = self.fractional_bits if scale_bits is None else scale_bits
        if not abs(x) < ENCODABLE_BOUND:
            raise FieldOverflowError(f"value {x} outside the encodable range (|x| < 2**30)")
        scaled = Decimal(float(x)) * (1 << bits)
        return int(scaled.quantize(Decimal(1), rounding=ROUND_HALF_UP))

    def encode(self, x: float, scale_bits: int | None = None) -> int:
        """Field element representing x."""
        return self.fixed(x, scale_bits) % PRIME

    def decode(self, raw: int, scale_bits: int | None = None) -> float:
        bits = self.fractional_bits if scale_bits is None else scale_bits
        return to_signed(raw) / float(1 << bits)


def to_signed(raw: int) -> int:
    """Map a field element to (-p/2, p/2]."""
    raw %= PRIME
    return raw - PRIME if raw > HALF else raw


def share(raw: int, randomness: FieldRandomness) -> tuple[Share, Share]:
    """Split a field element into (r, raw - r) for E1 and E2."""
    r = randomness.element()
    return (
        Share(party=Evaluator.E1, value=r),
        Share(party=Evaluator.E2, value=(raw - r) % PRIME),
    )


def reconstruct(first: Share | int, second: Share | int) -> int:
    a = first.value if isinstance(first, Share) else first
    b = second.value if isinstance(second, Share) else second
    return (a + b) % PRIME


def share_input(theta: float, codec: FixedPointCodec, randomness: FieldRandomness) -> tuple[Share, Share]:
    """Encode a creditor's type and split it between the evaluators."""
    return share(codec.encode(theta), randomness)
