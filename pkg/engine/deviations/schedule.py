"""Moderate-deviation speed schedules λ(ε) = ε^{-a}."""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

logger = logging.getLogger(__name__)

PRESETS: Dict[str, float] = {
    "eps^-1/4": 0.25,
    "eps^-1/3": 1.0 / 3.0,
    "eps^-1/2": 0.5,
}


@dataclass(frozen=True)
class ScheduleCheck:
    """Validity flags of a schedule on one ε grid."""

    diverges: bool
    vanishing_product: bool
    monotone: bool

    @property
    def valid(self) -> bool:
        return self.diverges and self.vanishing_product and self.monotone


@dataclass(frozen=True)
class LambdaSchedule:
    """λ(ε) = ε^{-exponent}; a moderate-deviation speed needs exponent in (0, ½)."""

    exponent: float
    name: str = ""

    def __post_init__(self):
        if not np.isfinite(self.exponent):
            raise ValueError(f"Schedule exponent must be finite, got {self.exponent}")

    @classmethod
    def from_preset(cls, name: str) -> "LambdaSchedule":
        if name not in PRESETS:
            raise ValueError(f"Unknown schedule preset '{name}', expected one of {list(PRESETS)}")
        return cls(PRESETS[name], name)

    def __call__(self, eps) -> np.ndarray:
        return np.asarray(eps, dtype=float) ** (-self.exponent)

    def check(self, epsilons: Sequence[float]) -> ScheduleCheck:
        """
        Check λ → ∞ and √ε λ → 0 along a decreasing ε grid.

        Endpoints must move in the right direction and both sequences must be
        monotone in between.
        """
        eps = np.asarray(epsilons, dtype=float)
        if len(eps) < 2 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
            raise ValueError(
                f"Schedule check needs a strictly decreasing positive ε grid, got {list(eps)}"
            )
        lam = self(eps)
        product = np.sqrt(eps) * lam
        diverges = bool(lam[-1] > lam[0])
        vanishing = bool(product[-1] < product[0])
        monotone = bool(np.all(np.diff(lam) > 0) and np.all(np.diff(product) < 0))
        result = ScheduleCheck(diverges, vanishing, monotone)
        logger.debug(
            f"Schedule {self.name or self.exponent}: lambda {lam[0]:.3e} -> {lam[-1]:.3e}, "
            f"sqrt(eps)*lambda {product[0]:.3e} -> {product[-1]:.3e}, valid={result.valid}"
        )
        return result

    def require_valid(self, epsilons: Sequence[float]) -> None:
        check = self.check(epsilons)
        if not check.valid:
            raise ValueError(
                f"Schedule {self.name or f'eps^-{self.exponent}'} is not a moderate-deviation "
                f"speed on this grid (diverges={check.diverges}, "
                f"vanishing_product={check.vanishing_product}, monotone={check.monotone})"
            )
