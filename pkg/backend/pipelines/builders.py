"""Build engine objects from an ExperimentConfig."""

import logging
from typing import Optional

import numpy as np

from backend.schemas.experiment_schemas import ExperimentConfig, ProfileSpec
from engine.deviations import LambdaSchedule, MonteCarloConfig
from engine.drivers import (
    RoughDriver,
    ScalarDriver,
    SpaceGrid,
    SphericalDriver,
    crossed_maps,
    make_llg_driver,
    make_scalar_driver,
    sample_profile,
)
from engine.rough_paths import (
    PathLift,
    brownian_lift,
    derive_seed,
    dilate,
    piecewise_linear_lift,
)
from engine.spde import SolverConfig, smooth_direction_lifts
from engine.tangent import TangentConfig

logger = logging.getLogger(__name__)

# Sub-stream identifiers under the master seed
DIRECTION_STREAM = 0
BASE_STREAM = 1
CONTINUITY_STREAM = 2
WONG_ZAKAI_STREAM = 3
LIFT_CHECK_STREAM = 4
MONTE_CARLO_STREAM = 5


def build_space(config: ExperimentConfig) -> SpaceGrid:
    return SpaceGrid(config.grid.n_points, config.grid.space_dim)


def build_solver_config(config: ExperimentConfig) -> SolverConfig:
    return SolverConfig(
        dt=config.grid.dt,
        horizon=config.grid.horizon,
        implicit_laplacian=config.solver.implicit_laplacian,
        rotation_mode=config.solver.rotation_mode,
        include_area=config.solver.include_area,
        renormalize=config.solver.renormalize,
    )


def build_profile(space: SpaceGrid, spec: ProfileSpec) -> np.ndarray:
    return sample_profile(space, spec.name, spec.amplitude, spec.mode, spec.offset)


def build_initial(config: ExperimentConfig, space: Optional[SpaceGrid] = None) -> np.ndarray:
    """u0 from the `initial` profile; LLG gets a unit field tilted by that profile."""
    space = space or build_space(config)
    values = build_profile(space, config.initial)
    if config.equation != "llg":
        return values
    phase = 2.0 * np.pi * max(config.initial.mode, 1) * space.coordinates()[0]
    tilt = config.initial.amplitude
    field = np.stack([tilt * np.cos(phase), tilt * np.sin(phase), np.ones(space.shape)], axis=-1)
    return field / np.linalg.norm(field, axis=-1, keepdims=True)


def build_direction_lift(config: ExperimentConfig, stream: int = DIRECTION_STREAM) -> PathLift:
    """Direction lift W on the solver grid, seeded by (lift seed, stream)."""
    grid = build_solver_config(config).time_grid()
    channels = 3 if config.equation == "llg" else config.lift.channels
    if config.lift.kind == "linear":
        values = np.repeat(grid.points[:, None], channels, axis=1)
        return piecewise_linear_lift(grid, values, p=config.lift.p)
    seed = derive_seed(config.lift_seed, stream)
    logger.info(f"Brownian lift: seed={seed} (master {config.lift_seed}, stream {stream})")
    return brownian_lift(seed, grid, config.lift.refinement, d=channels, p=config.lift.p)


def build_driver(config: ExperimentConfig, lift: PathLift) -> RoughDriver:
    space = build_space(config)
    profile = build_profile(space, config.driver.profile)
    if config.equation == "llg":
        return make_llg_driver(lift, np.stack([profile] * 3), space)
    return make_scalar_driver(lift, np.stack([profile] * lift.d), space)


def build_base(config: ExperimentConfig) -> RoughDriver:
    """Base driver G: zero, or a smooth path through the driver profile."""
    space = build_space(config)
    grid = build_solver_config(config).time_grid()
    if config.driver.base == "zero":
        if config.equation == "llg":
            return SphericalDriver.zero(grid, space)
        return ScalarDriver.zero(grid, space, config.lift.channels)
    channels = 3 if config.equation == "llg" else config.lift.channels
    (lift,) = smooth_direction_lifts(
        grid, 1, derive_seed(config.seed, BASE_STREAM), channels=channels
    )
    return build_driver(config, dilate(lift, config.driver.base_amplitude))


def build_tangent_config(config: ExperimentConfig) -> TangentConfig:
    base = build_base(config)
    direction = build_driver(config, build_direction_lift(config))
    forward = backward = None
    if config.driver.base != "zero":
        forward, backward = crossed_maps(base.lift, direction.lift, base_exponent=1.0)
    schedule = config.schedule
    return TangentConfig(
        equation=config.equation,
        u0=build_initial(config),
        base=base,
        direction=direction,
        base_direction=forward,
        direction_base=backward,
        epsilons=tuple(schedule.epsilons),
        solver=build_solver_config(config),
        reference=schedule.reference,
        min_slope=schedule.min_slope,
        slope_band=schedule.slope_band,
        seed=config.lift_seed,
    )


def build_monte_carlo_config(config: ExperimentConfig) -> MonteCarloConfig:
    space = build_space(config)
    schedule = config.schedule
    return MonteCarloConfig(
        u0=build_initial(config, space),
        profile=build_profile(space, config.driver.profile),
        space=space,
        epsilons=schedule.epsilons,
        schedule=LambdaSchedule.from_preset(schedule.lambda_preset),
        delta=schedule.delta,
        n_samples=schedule.n_samples,
        seed=derive_seed(config.lift_seed, MONTE_CARLO_STREAM),
        equation=config.equation,
        solver=build_solver_config(config),
        refinement=config.lift.refinement,
        eta=schedule.eta,
    )
