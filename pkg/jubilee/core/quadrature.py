"""
Integration schemes for the expectations the analysis suite evaluates.

Two-creditor economies integrate over one or two dimensions with
Gauss-Legendre nodes on piecewise-smooth segments. Larger economies fall
back to seeded Monte Carlo and carry a standard error.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre
from pydantic import BaseModel, ConfigDict, Field

from jubilee.core.distributions import FloatArray, TypeDistribution

Integrand = Callable[[FloatArray], FloatArray]


class QuadratureScheme(str, Enum):
    """Integration scheme."""

    GAUSS_LEGENDRE = "gauss-legendre"
    MONTE_CARLO = "monte-carlo"

    def __str__(self) -> str:
        return self.value


class QuadratureSpec(BaseModel):
    """
    How integrals over the other creditors' types are evaluated.

    ``gauss-legendre`` applies to two-creditor economies; with three or
    more creditors the Monte Carlo settings are used regardless of scheme.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: QuadratureScheme = Field(default=QuadratureScheme.GAUSS_LEGENDRE, description="Integration scheme")
    nodes: int = Field(default=64, ge=16, description="Gauss-Legendre nodes per segment")
    samples: int = Field(default=100_000, ge=10_000, description="Monte Carlo draws")
    seed: int = Field(default=0, ge=0, description="Monte Carlo seed")

    @classmethod
    def monte_carlo(cls, samples: int = 100_000, seed: int = 0) -> QuadratureSpec:
        return cls(scheme=QuadratureScheme.MONTE_CARLO, samples=samples, seed=seed)

    def deterministic_for(self, n: int) -> bool:
        """Whether an n-creditor economy is integrated by Gauss-Legendre."""
        return self.scheme is QuadratureScheme.GAUSS_LEGENDRE and n == 2

    def generator(self, offset: int = 0) -> np.random.Generator:
        """PCG64 generator for this spec; ``offset`` derives per-worker streams."""
        return np.random.default_rng(self.seed + offset)


class Estimate(BaseModel):
    """A numerical expectation with its standard error (0 for quadrature)."""

    model_config = ConfigDict(frozen=True)

    value: float
    stderr: float = 0.0

    def __float__(self) -> float:
        return self.value

    def within(self, target: float, sigmas: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.value - target) <= max(sigmas * self.stderr, floor)


@lru_cache(maxsize=8)
def gauss_legendre(nodes: int) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights on [-1, 1]."""
    x, w = legendre.leggauss(nodes)
    return x, w


def integrate_segments(func: Integrand, breaks: Sequence[float], nodes: int) -> float:
    """
    Integrate ``func`` over [breaks[0], breaks[-1]], one rule per segment.

    Breakpoints sit where the integrand has kinks or jumps so every segment
    is smooth. Zero-length segments contribute nothing.
    """
    x, w = gauss_legendre(nodes)
    total = 0.0
    for left, right in zip(breaks[:-1], breaks[1:]):
        if right <= left:
            continue
        half = 0.5 * (right - left)
        points = left + half * (x + 1.0)
        total += half * float(np.dot(w, func(points)))
    return total


def map_segments(left: FloatArray, right: FloatArray, nodes: int) -> tuple[FloatArray, FloatArray]:
    """
    Per-row Gauss-Legendre points and weights for segments [left_r, right_r].

    Returns (rows, nodes) arrays; rows with right <= left get zero weights.
    """
    x, w = gauss_legendre(nodes)
    half = np.maximum(0.5 * (right - left), 0.0)
    points = left[:, None] + half[:, None] * (x[None, :] + 1.0)
    weights = half[:, None] * w[None, :]
    return points, weights


def sorted_breaks(lo: float, hi: float, *inner: float) -> list[float]:
    """Segment boundaries on [lo, hi], keeping only the interior points."""
    return [lo, *sorted(b for b in inner if lo < b < hi), hi]


def mean_estimate(values: FloatArray) -> Estimate:
    """Sample mean with its standard error."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return Estimate(value=float(values.mean()), stderr=0.0)
    return Estimate(
        value=float(values.mean()),
        stderr=float(values.std(ddof=1) / np.sqrt(values.size)),
    )


def draw_types(dist: TypeDistribution, spec: QuadratureSpec, cols: int, offset: int = 0) -> FloatArray:
    """(samples, cols) i.i.d. types from the spec's seeded generator."""
    return dist.sample_matrix(spec.generator(offset), spec.samples, cols)
