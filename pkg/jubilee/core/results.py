"""
Check result and status models for verification runs.
"""

from __future__ import annotations

from collections.abc import Iterator
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field


class CheckStatus(str, Enum):
    """Outcome of a single verification check."""

    PASSED = "passed"
    FAILED = "failed"
    SKIPPED = "skipped"

    def __str__(self) -> str:
        return self.value


class CheckResult(BaseModel):
    """A quantified verification check against its tolerance."""

    # Identity
    id: str = Field(description="Unique check identifier (e.g., 'ic-grid')")
    check: str = Field(description="Name of the check that produced this (e.g., 'ic')")

    # Classification
    title: str = Field(description="Short, human-readable title")
    status: CheckStatus = Field(description="Whether the property holds within tolerance")

    # Evidence
    value: float = Field(description="Measured quantity")
    tolerance: float = Field(description="Bound the measured quantity is compared against")
    description: str = Field(default="", description="What was measured and how")
    metrics: dict[str, Any] = Field(default_factory=dict, description="Supporting numbers")

    @property
    def passed(self) -> bool:
        return self.status is not CheckStatus.FAILED

    @classmethod
    def judge(cls, *, ok: bool, **fields: Any) -> CheckResult:
        return cls(status=CheckStatus.PASSED if ok else CheckStatus.FAILED, **fields)


class CheckCollection(BaseModel):
    """Collection of check results with helper methods."""

    results: list[CheckResult] = Field(default_factory=list)

    def add(self, result: CheckResult) -> None:
        self.results.append(result)

    def by_status(self, status: CheckStatus) -> list[CheckResult]:
        return [r for r in self.results if r.status == status]

    def by_check(self, check: str) -> list[CheckResult]:
        return [r for r in self.results if r.check == check]

    def get(self, result_id: str) -> CheckResult | None:
        return next((r for r in self.results if r.id == result_id), None)

    @property
    def failed(self) -> list[CheckResult]:
        return self.by_status(CheckStatus.FAILED)

    @property
    def all_passed(self) -> bool:
        return not self.failed

    def __len__(self) -> int:
        return len(self.results)

    def __iter__(self) -> Iterator[CheckResult]:  # type: ignore[override]
        return iter(self.results)
