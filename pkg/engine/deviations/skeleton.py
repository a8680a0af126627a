"""Skeleton equation and rate-function certificates."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from engine.deviations.cameron_martin import CameronMartinPath, cm_energy, lift_cm
from engine.drivers import (
    RoughDriver,
    ScalarDriver,
    SphericalDriver,
    make_llg_driver,
    make_scalar_driver,
)
from engine.spde.config import SolverConfig
from engine.spde.field import Field
from engine.tangent import TangentConfig, solve_tangent

logger = logging.getLogger(__name__)


def skeleton_direction(
    h: CameronMartinPath, base: Field, equation: str, profiles: Optional[np.ndarray] = None
) -> RoughDriver:
    """Driver of the lifted Cameron–Martin path; unit profiles by default."""
    space = base.space
    if equation == "llg":
        if profiles is None:
            profiles = np.ones((3,) + space.shape)
        return make_llg_driver(lift_cm(h), profiles, space)
    if profiles is None:
        profiles = np.ones((h.d,) + space.shape)
    return make_scalar_driver(lift_cm(h), profiles, space)


def solve_skeleton(
    h: CameronMartinPath,
    base: Field,
    equation: str = "heat",
    profiles: Optional[np.ndarray] = None,
    cfg: Optional[SolverConfig] = None,
) -> Field:
    """
    Solve the skeleton equation X^h = DΦ[0](lift_cm(h)).

    Args:
        h: Cameron–Martin path on the base solution's time grid
        base: Φ(0), solved with the zero driver
        equation: "heat", "reaction-diffusion" or "llg"
        profiles: Driver profiles (m, *space); unit profiles when None
        cfg: Solver configuration used for `base`; derived from its grid when None

    Returns:
        Field X^h
    """
    h.grid.require_same(base.times, "Cameron-Martin path and base solution time grids")
    cfg = cfg or SolverConfig(dt=base.times.dt, horizon=base.times.horizon)
    direction = skeleton_direction(h, base, equation, profiles)
    zero_base = (
        SphericalDriver.zero(base.times, base.space)
        if equation == "llg"
        else ScalarDriver.zero(base.times, base.space, direction.channels)
    )
    tangent_cfg = TangentConfig(
        equation=equation,
        u0=base.initial,
        base=zero_base,
        direction=direction,
        solver=cfg,
    )
    return solve_tangent(base, tangent_cfg)


@dataclass
class RatePoint:
    """One admissible pair (X^h, E(h)): E(h) bounds the rate at X^h from above."""

    solution: Field
    energy: float
    integrand: str = "derivative"


def rate_point(
    h: CameronMartinPath,
    base: Field,
    equation: str = "heat",
    profiles: Optional[np.ndarray] = None,
    cfg: Optional[SolverConfig] = None,
    integrand: str = "derivative",
) -> RatePoint:
    """(X^h, E(h)) for a single Cameron–Martin path; no infimum is taken."""
    solution = solve_skeleton(h, base, equation, profiles, cfg)
    energy = cm_energy(h, integrand)
    logger.info(f"Rate point ({equation}): E(h) = {energy:.6e} [{integrand}]")
    return RatePoint(solution, energy, integrand)
