"""
Tangent equation solver: the derivative of the splitting scheme in the direction W.

The forward step is u_{k+1} = N_k(D(u_k)) with the driver {G + τ_η W}. At
η = 0 its derivative is linear in X_k and in the level-1 increments of W:

    scalar:  X_{k+1} = (1 + G_k + 𝔾_k) D'(u_k) X_k + (W_k + C_k) D(u_k)
    LLG:     Y = e^{Ω_k} D'(u_k) X_k + L(Ω_k, W_k + Anti(C_k)) D(u_k)
             X_{k+1} = (Y - n (n · Y)) / |e^{Ω_k} D(u_k)|

where C_k = ([GW] + [WG])_k is the mixed second level, Ω_k = G_k + Anti(𝔾_k)
the base rotation generator, L the Fréchet derivative of the matrix
exponential and n the renormalized base value. The level-2 of W never enters.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.linalg import expm

from engine.drivers import crossed_step_operators
from engine.spde.field import Field
from engine.spde.operators import REACTION_DERIVATIVES
from engine.spde.solvers import BlowUpError, SplittingSolver, antisymmetric_part
from engine.tangent.config import TangentConfig

logger = logging.getLogger(__name__)


def exponential_with_derivative(
    generators: np.ndarray, directions: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (e^A, L(A, E)) for batches of 3×3 matrices via the block exponential.

    expm([[A, E], [0, A]]) = [[e^A, L(A, E)], [0, e^A]].
    """
    block = np.zeros(generators.shape[:-2] + (6, 6))
    block[..., :3, :3] = generators
    block[..., :3, 3:] = directions
    block[..., 3:, 3:] = generators
    exponential = expm(block)
    return exponential[..., :3, :3], exponential[..., :3, 3:]


class TangentSolver:
    """Derivative of a `SplittingSolver` along a direction driver."""

    def __init__(self, cfg: TangentConfig):
        self.cfg = cfg
        self.solver = SplittingSolver(cfg.equation, cfg.base.space, cfg.solver)
        self.space = cfg.base.space
        self.reaction_derivative = REACTION_DERIVATIVES[cfg.equation]

    def drift_derivative(self, base: np.ndarray, direction: np.ndarray) -> np.ndarray:
        """D'(u) X = heat step of X + Δt γ'(u) X."""
        if self.cfg.equation == "heat":
            return self.solver.heat_step(direction)
        dt = self.solver.config.dt
        return self.solver.heat_step(
            direction + dt * self.reaction_derivative(self.space, base, direction)
        )

    def forcing_operators(self) -> np.ndarray:
        """Per-step W_k + C_k in the driver's native form."""
        cfg = self.cfg
        first = cfg.direction.step_first_level
        if cfg.base_direction is None or cfg.direction_base is None:
            return first
        mixed = crossed_step_operators(
            cfg.base, cfg.direction, cfg.base_direction, cfg.direction_base
        )
        return first + mixed

    def scalar_step(self, base, tangent, base_first, base_second, forcing):
        propagated = (1.0 + base_first + base_second)[..., None] * self.drift_derivative(
            base, tangent
        )
        return propagated + forcing[..., None] * self.solver.drift(base)

    def llg_step(self, base, tangent, base_first, base_second, forcing):
        config = self.solver.config
        drifted = self.solver.drift(base)
        dtangent = self.drift_derivative(base, tangent)
        if config.rotation_mode == "affine":
            propagator = np.eye(3) + base_first + base_second
            value = np.einsum("...ij,...j->...i", propagator, drifted)
            out = np.einsum("...ij,...j->...i", propagator, dtangent) + np.einsum(
                "...ij,...j->...i", forcing, drifted
            )
        else:
            generators = self.solver.noise_generators(base_first, base_second)
            if np.any(generators):
                rotation, derivative = exponential_with_derivative(generators, forcing)
            else:
                rotation, derivative = np.eye(3), forcing
            value = np.einsum("...ij,...j->...i", rotation, drifted)
            out = np.einsum("...ij,...j->...i", rotation, dtangent) + np.einsum(
                "...ij,...j->...i", derivative, drifted
            )
        if not config.renormalize:
            return out
        length = np.linalg.norm(value, axis=-1, keepdims=True)
        unit = value / length
        return (out - unit * np.sum(unit * out, axis=-1, keepdims=True)) / length

    def solve(self, base_solution: Field) -> Field:
        cfg = self.cfg
        self.solver.check_driver(cfg.base)
        self.solver.check_driver(cfg.direction)
        grid = cfg.base.grid
        base_solution.times.require_same(grid, "base solution and driver time grids")
        if base_solution.space != self.space:
            raise ValueError(
                f"Base solution lives on {base_solution.space}, drivers on {self.space}"
            )

        base_first, base_second = cfg.base.step_levels
        forcing = self.forcing_operators()
        if cfg.equation == "llg" and self.solver.config.rotation_mode == "exact":
            if self.solver.config.include_area:
                # W_k + Anti(C_k): the level-1 part is already antisymmetric
                forcing = cfg.direction.step_first_level + antisymmetric_part(
                    forcing - cfg.direction.step_first_level
                )
            else:
                forcing = cfg.direction.step_first_level
        step = self.llg_step if cfg.equation == "llg" else self.scalar_step

        values = np.zeros_like(base_solution.values)
        tangent = values[0]
        logger.info(
            f"Solving {cfg.equation} tangent: N={self.space.n_points}, steps={grid.n}, "
            f"direction channels={cfg.direction.channels}, base zero={cfg.base_is_zero}"
        )
        for k in range(grid.n):
            tangent = step(
                base_solution.values[k], tangent, base_first[k], base_second[k], forcing[k]
            )
            if not np.all(np.isfinite(tangent)):
                raise BlowUpError(k + 1, float(grid.points[k + 1]), "non-finite tangent")
            peak = float(np.max(np.abs(tangent)))
            if peak > self.solver.config.blowup_threshold:
                raise BlowUpError(k + 1, float(grid.points[k + 1]), f"max |X| = {peak:.3e}")
            values[k + 1] = tangent
        return Field(self.space, grid, values)


def solve_tangent(base_solution: Field, cfg: TangentConfig) -> Field:
    """
    Solve the tangent equation X = DΦ[G](W) with X_0 = 0.

    The additive forcing of each step is taken at the drift output D(u_k) of the
    base step, not at u_k, so X is the exact derivative of the discrete splitting
    map u_k -> N(D(u_k)) in the direction of W.

    Args:
        base_solution: Φ(G) on the drivers' grids, from the same solver configuration
        cfg: Tangent configuration

    Returns:
        Field X on the driver time grid

    Raises:
        ValueError: On grid or space mismatch
        BlowUpError: On non-finite or exploding values
    """
    return TangentSolver(cfg).solve(base_solution)
