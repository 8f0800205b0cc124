"""
Shared base classes for kackit.

Verification operations never raise on a falsified property; they return one
of the report types below, whose truth value is the verdict.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Protocol, TypeVar

import numpy as np

T = TypeVar("T")


class AsyncContextManageable:
    """
    Simple mixin to add async context manager support.

    Classes using this mixin must implement an async close() method.
    """

    async def __aenter__(self: T) -> T:
        """Async context manager entry."""
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """Async context manager exit."""
        await self.close()  # type: ignore


class AlgebraLike(Protocol):
    """Anything with coordinates, a product, an involution and a unit."""

    @property
    def dim(self) -> int: ...

    def multiply(self, u: np.ndarray, v: np.ndarray) -> np.ndarray: ...

    def star(self, u: np.ndarray) -> np.ndarray: ...

    def unit_vector(self) -> np.ndarray: ...


@dataclass(frozen=True)
class AxiomReport:
    """
    Per-axiom residuals of a verification suite.

    Attributes:
        residuals: Largest deviation observed for each named identity.
        tolerance: Threshold a residual must not exceed.
        flags: Named boolean conditions that are not residual based.
    """

    residuals: Dict[str, float]
    tolerance: float
    flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def failures(self) -> List[str]:
        failed = [name for name, value in self.residuals.items() if not value <= self.tolerance]
        failed.extend(name for name, value in self.flags.items() if not value)
        return failed

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def worst(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "residuals": dict(self.residuals),
            "flags": dict(self.flags),
            "failures": self.failures,
        }


@dataclass(frozen=True)
class CheckResult:
    """A single verdict with the residual that decided it."""

    passed: bool
    residual: float
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "residual": self.residual, "detail": self.detail}
