"""Configuration for tangent solves and CLT experiments."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from engine.drivers import RoughDriver
from engine.rough_paths import TwoIndexMap
from engine.spde.config import EQUATIONS, SolverConfig

REFERENCES = ("tangent", "richardson")
DEFAULT_EPSILONS = tuple(2.0**-k for k in range(4, 13))


@dataclass
class TangentConfig:
    """
    Configuration for the tangent equation DΦ[G](W) and the √ε CLT sweep.

    `base` is the driver G (use `ScalarDriver.zero` / `SphericalDriver.zero`
    for G = 0), `direction` carries the direction lift W with its own
    coefficients. The crossed maps [GW], [WG] are required when G ≠ 0.
    """

    equation: str
    u0: np.ndarray
    base: RoughDriver
    direction: RoughDriver
    base_direction: Optional[TwoIndexMap] = None
    direction_base: Optional[TwoIndexMap] = None

    # ε schedule, strictly decreasing
    epsilons: Sequence[float] = DEFAULT_EPSILONS

    solver: SolverConfig = field(default_factory=SolverConfig)

    # Reference for X^ε: the tangent solution or a Richardson limit of X^ε
    reference: str = "tangent"

    # Pass band on the fitted log-log slope
    min_slope: float = 0.4
    slope_band: Optional[Tuple[float, float]] = None

    seed: Optional[int] = None

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ValueError(f"Unknown equation '{self.equation}', expected one of {EQUATIONS}")
        if self.reference not in REFERENCES:
            raise ValueError(f"Unknown reference '{self.reference}', expected one of {REFERENCES}")
        eps = np.asarray(self.epsilons, dtype=float)
        if eps.ndim != 1 or len(eps) == 0:
            raise ValueError("ε schedule must be a non-empty sequence")
        if np.any(eps <= 0) or not np.all(np.isfinite(eps)):
            raise ValueError(f"ε values must be positive and finite, got {list(eps)}")
        if np.any(np.diff(eps) >= 0):
            raise ValueError(f"ε values must be strictly decreasing, got {list(eps)}")
        self.epsilons = tuple(float(e) for e in eps)
        if type(self.base) is not type(self.direction):
            raise ValueError(
                f"Base and direction drivers differ in kind: "
                f"{self.base.kind} vs {self.direction.kind}"
            )
        self.base.grid.require_same(self.direction.grid, "base and direction time grids")
        if self.base.space != self.direction.space:
            raise ValueError(
                f"Mismatched space grids: base {self.base.space}, direction {self.direction.space}"
            )
        crossed = (self.base_direction, self.direction_base)
        if any(c is None for c in crossed) and not self.base_is_zero:
            raise ValueError("Crossed maps [GW], [WG] are required when the base driver is nonzero")
        if self.slope_band is not None and self.slope_band[0] > self.slope_band[1]:
            raise ValueError(f"Slope band {self.slope_band} is empty")

    @property
    def base_is_zero(self) -> bool:
        lift = self.base.lift
        coefficients_zero = not np.any(self.base.coefficients)
        return coefficients_zero or (not np.any(lift.level1) and not np.any(lift.level2))

    def to_dict(self) -> dict:
        """Convert config to dictionary."""
        return {
            "equation": self.equation,
            "driver_kind": self.base.kind,
            "n_points": self.base.space.n_points,
            "space_dim": self.base.space.dim,
            "base_is_zero": self.base_is_zero,
            "direction_channels": self.direction.channels,
            "epsilons": list(self.epsilons),
            "solver": self.solver.to_dict(),
            "reference": self.reference,
            "min_slope": self.min_slope,
            "slope_band": list(self.slope_band) if self.slope_band else None,
            "seed": self.seed,
        }
