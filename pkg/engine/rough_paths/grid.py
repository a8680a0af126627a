"""Time grids for discrete rough paths."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing times 0 = t_0 < t_1 < ... < t_n = T."""

    points: np.ndarray
    is_uniform: bool = False

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or points.size < 2:
            raise ValueError(
                f"TimeGrid needs at least two points in a 1-D array, got shape {points.shape}"
            )
        if points[0] != 0.0:
            raise ValueError(f"TimeGrid must start at t_0 = 0, got {points[0]}")
        if np.any(np.diff(points) <= 0.0):
            raise ValueError("TimeGrid points must be strictly increasing")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def uniform(cls, n: int, horizon: float = 1.0) -> "TimeGrid":
        """
        Build a uniform grid with n steps on [0, horizon].

        Args:
            n: Number of steps (n + 1 points)
            horizon: Final time T > 0

        Returns:
            Uniform TimeGrid
        """
        if n < 1:
            raise ValueError(f"Uniform grid needs n >= 1 steps, got {n}")
        if horizon <= 0:
            raise ValueError(f"Horizon must be positive, got {horizon}")
        return cls(np.linspace(0.0, horizon, n + 1), is_uniform=True)

    @classmethod
    def from_step(cls, dt: float, horizon: float) -> "TimeGrid":
        """Uniform grid whose step is dt (horizon must be a multiple of dt up to rounding)."""
        n = int(round(horizon / dt))
        if n < 1 or abs(n * dt - horizon) > 1e-9 * max(1.0, horizon):
            raise ValueError(f"Horizon {horizon} is not a multiple of dt={dt}")
        return cls.uniform(n, horizon)

    @property
    def n(self) -> int:
        """Number of steps."""
        return self.points.size - 1

    @property
    def horizon(self) -> float:
        return float(self.points[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def dt(self) -> float:
        """Step size of a uniform grid."""
        if not self.is_uniform:
            raise ValueError("dt is only defined for uniform grids")
        return self.horizon / self.n

    def refine(self, refinement: int) -> "TimeGrid":
        """Split every step into `refinement` equal sub-steps."""
        if refinement < 1:
            raise ValueError(f"Refinement must be >= 1, got {refinement}")
        if refinement == 1:
            return self
        fractions = np.arange(refinement) / refinement
        fine = (self.points[:-1, None] + fractions[None, :] * self.steps[:, None]).ravel()
        return TimeGrid(np.append(fine, self.points[-1]), is_uniform=self.is_uniform)

    def same_as(self, other: "TimeGrid") -> bool:
        return self.points.shape == other.points.shape and bool(
            np.array_equal(self.points, other.points)
        )

    def require_same(self, other: "TimeGrid", what: str = "grids") -> None:
        if not self.same_as(other):
            raise ValueError(
                f"Mismatched {what}: {self.n} steps on [0, {self.horizon}] vs "
                f"{other.n} steps on [0, {other.horizon}]"
            )
