"""
Drift-then-noise splitting solvers for rough-driver SPDEs on the torus.

Each step maps u_k to u_{k+1} = N(D(u_k)) where the drift sub-step is

    D(u) = (I - Δt Δ_h)^{-1} (u + Δt γ(u))

with γ = 0 (heat), u(1 - |u|²) (reaction-diffusion) or u × Δ_h u + u|D u|²
(LLG), and the noise sub-step N applies the driver increment on the step:
(1 + W + 𝕎) for scalar drivers, a pointwise rotation for spherical ones.

The exact rotation mode rotates by exp(W + Anti(𝕎)): the antisymmetric part
of 𝕎 carries the Lévy area of the step. With `include_area=False` it is
exp(W) alone. The affine mode applies (1 + W + 𝕎) and renormalizes.
"""

import logging
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from engine.drivers import RoughDriver, ScalarDriver, SphericalDriver, axial_vector
from engine.drivers.space import SpaceGrid
from engine.spde.config import EQUATIONS, SolverConfig
from engine.spde.field import Field
from engine.spde.operators import REACTIONS, HeatStep

logger = logging.getLogger(__name__)

SPHERE_TOLERANCE = 1e-12


class BlowUpError(RuntimeError):
    """Raised when a solve produces non-finite or exploding values."""

    def __init__(self, step: int, time: float, detail: str = ""):
        self.step = step
        self.time = time
        message = f"Solver blew up at step {step} (t={time:.6g})"
        super().__init__(f"{message}: {detail}" if detail else message)


def antisymmetric_part(matrices: np.ndarray) -> np.ndarray:
    return 0.5 * (matrices - np.swapaxes(matrices, -1, -2))


def rotate(vectors: np.ndarray, generators: np.ndarray) -> np.ndarray:
    """exp(A) v pointwise for antisymmetric A of shape (*space, 3, 3)."""
    flat_vectors = vectors.reshape(-1, 3)
    rotvecs = axial_vector(generators).reshape(-1, 3)
    return Rotation.from_rotvec(rotvecs).apply(flat_vectors).reshape(vectors.shape)


def normalize(vectors: np.ndarray) -> np.ndarray:
    return vectors / np.linalg.norm(vectors, axis=-1, keepdims=True)


def as_components(space: SpaceGrid, values: np.ndarray) -> np.ndarray:
    """Return a field as (*space, n), adding a trailing axis to scalar fields."""
    values = np.asarray(values, dtype=float)
    if values.shape == space.shape:
        values = values[..., None]
    return space.check_field(values, "initial condition")


class SplittingSolver:
    """Lie splitting solver for one equation on a fixed space grid."""

    def __init__(self, equation: str, space: SpaceGrid, config: Optional[SolverConfig] = None):
        """
        Initialize solver.

        Args:
            equation: "heat", "reaction-diffusion" or "llg"
            space: Periodic spatial grid
            config: Solver configuration, or None for defaults
        """
        if equation not in EQUATIONS:
            raise ValueError(f"Unknown equation '{equation}', expected one of {EQUATIONS}")
        if equation == "llg" and space.dim != 1:
            raise ValueError(f"LLG solver runs in one spatial dimension, got dim={space.dim}")
        self.equation = equation
        self.space = space
        self.config = config or SolverConfig()
        self.heat_step = HeatStep(space, self.config.dt, self.config.implicit_laplacian)
        self.reaction = REACTIONS[equation]

    def check_driver(self, driver: RoughDriver) -> None:
        grid = driver.grid
        if not grid.is_uniform or abs(grid.dt - self.config.dt) > 1e-12 * self.config.dt:
            raise ValueError(
                f"Mismatched time grids: driver has {grid.n} steps on [0, {grid.horizon}], "
                f"solver step is dt={self.config.dt}"
            )
        if driver.space != self.space:
            raise ValueError(f"Mismatched space grids: driver {driver.space}, solver {self.space}")
        expected = SphericalDriver if self.equation == "llg" else ScalarDriver
        if not isinstance(driver, expected):
            raise ValueError(f"{self.equation} needs a {expected.kind} driver, got {driver.kind}")

    def drift(self, values: np.ndarray) -> np.ndarray:
        """D(u) = heat step of u + Δt γ(u)."""
        if self.equation == "heat":
            return self.heat_step(values)
        return self.heat_step(values + self.config.dt * self.reaction(self.space, values))

    def noise_generators(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        """Rotation generators W + Anti(𝕎) (or W alone without the area term)."""
        if self.config.include_area:
            return first + antisymmetric_part(second)
        return first

    def noise(self, values: np.ndarray, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        """
        Apply one driver increment.

        Args:
            values: Field after the drift sub-step, shape (*space, n)
            first: Level-1 operator on the step, (*space) for scalar drivers
                or (*space, 3, 3) for spherical ones
            second: Level-2 operator on the step, same shape as `first`

        Returns:
            Field after the noise sub-step (before renormalization)
        """
        if self.equation != "llg":
            return values * (1.0 + first + second)[..., None]
        if self.config.rotation_mode == "exact":
            return rotate(values, self.noise_generators(first, second))
        identity = np.eye(3)
        return np.einsum("...ij,...j->...i", identity + first + second, values)

    def _check_step(self, values: np.ndarray, step: int, time: float) -> None:
        if not np.all(np.isfinite(values)):
            raise BlowUpError(step, time, "non-finite values")
        peak = float(np.max(np.abs(values)))
        if peak > self.config.blowup_threshold:
            raise BlowUpError(step, time, f"max |u| = {peak:.3e}")

    def solve(self, u0: np.ndarray, driver: RoughDriver) -> Field:
        """
        Run the splitting scheme over the driver's time grid.

        Args:
            u0: Initial field, shape `space.shape` or (*space, n)
            driver: Scalar driver (heat, reaction-diffusion) or spherical driver (LLG)

        Returns:
            Field on the driver's time grid

        Raises:
            ValueError: On grid mismatch or an initial condition off the sphere (LLG)
            BlowUpError: On non-finite or exploding values
        """
        self.check_driver(driver)
        values = as_components(self.space, u0)
        if not np.all(np.isfinite(values)):
            raise ValueError("Initial condition contains non-finite values")
        if self.equation == "llg":
            if values.shape[-1] != 3:
                raise ValueError(f"LLG needs a 3-component field, got {values.shape[-1]}")
            deviation = float(np.max(np.abs(np.linalg.norm(values, axis=-1) - 1.0)))
            if deviation > SPHERE_TOLERANCE:
                raise ValueError(f"LLG initial condition is off the sphere by {deviation:.3e}")

        grid = driver.grid
        first_ops, second_ops = driver.step_levels
        out = np.empty((grid.n + 1,) + values.shape)
        out[0] = values
        max_drift = 0.0
        max_sphere = 0.0
        logger.info(
            f"Solving {self.equation}: N={self.space.n_points}, steps={grid.n}, dt={self.config.dt}"
        )
        for k in range(grid.n):
            values = self.noise(self.drift(values), first_ops[k], second_ops[k])
            if self.equation == "llg":
                drift = float(np.max(np.abs(np.linalg.norm(values, axis=-1) - 1.0)))
                if drift > self.config.sphere_warning:
                    logger.warning(
                        f"Sphere violation {drift:.3e} before renormalization at step {k + 1}"
                    )
                max_drift = max(max_drift, drift)
                if self.config.renormalize:
                    values = normalize(values)
                max_sphere = max(
                    max_sphere, float(np.max(np.abs(np.linalg.norm(values, axis=-1) - 1.0)))
                )
            self._check_step(values, k + 1, float(grid.points[k + 1]))
            out[k + 1] = values

        diagnostics = {}
        if self.equation == "llg":
            diagnostics = {"max_sphere_drift": max_drift, "max_sphere_deviation": max_sphere}
            logger.debug(f"LLG sphere drift before renormalization: {max_drift:.3e}")
        return Field(self.space, grid, out, diagnostics)


def solve_heat(u0: np.ndarray, driver: ScalarDriver, cfg: Optional[SolverConfig] = None) -> Field:
    return SplittingSolver("heat", driver.space, cfg).solve(u0, driver)


def solve_reaction_diffusion(
    u0: np.ndarray, driver: ScalarDriver, cfg: Optional[SolverConfig] = None
) -> Field:
    return SplittingSolver("reaction-diffusion", driver.space, cfg).solve(u0, driver)


def solve_llg(u0: np.ndarray, driver: SphericalDriver, cfg: Optional[SolverConfig] = None) -> Field:
    return SplittingSolver("llg", driver.space, cfg).solve(u0, driver)


def solve(
    equation: str, u0: np.ndarray, driver: RoughDriver, cfg: Optional[SolverConfig] = None
) -> Field:
    """Dispatch to the solver for `equation`."""
    return SplittingSolver(equation, driver.space, cfg).solve(u0, driver)
