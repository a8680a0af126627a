"""
Brownian lifts with shared randomness across refinements.

Coarse increments come from stream 0 of the master seed. Each refinement
level l = 1, 2, ... halves every sub-step with a Lévy midpoint drawn from
stream l, so a path at refinement 2^L restricted to the points of refinement
2^K (K < L) is exactly the path at refinement 2^K.
"""

import logging
from typing import Tuple

import numpy as np

from engine.rough_paths.grid import TimeGrid
from engine.rough_paths.lift import PathLift, piecewise_linear_lift

logger = logging.getLogger(__name__)

DEFAULT_REFINEMENT = 32


def derive_seed(master: int, stream: int) -> int:
    """Counter-based sub-seed of `master` for stream `stream`."""
    sequence = np.random.SeedSequence(master, spawn_key=(stream,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def stream_rng(master: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=(stream,)))


def _levels(refinement: int) -> int:
    if refinement < 1 or refinement & (refinement - 1):
        raise ValueError(f"Refinement must be a power of two, got {refinement}")
    return refinement.bit_length() - 1


def brownian_path(
    seed: int, grid: TimeGrid, refinement: int = DEFAULT_REFINEMENT, d: int = 1
) -> Tuple[TimeGrid, np.ndarray]:
    """
    Sample a d-dimensional Brownian path on the refined grid.

    Args:
        seed: Master seed
        grid: Coarse grid
        refinement: Fine steps per coarse step (power of two)
        d: Number of channels

    Returns:
        Tuple of (fine grid, samples of shape (n * refinement + 1, d))
    """
    levels = _levels(refinement)
    steps = grid.steps
    increments = stream_rng(seed, 0).standard_normal((grid.n, d)) * np.sqrt(steps)[:, None]
    values = np.zeros((grid.n + 1, d))
    values[1:] = np.cumsum(increments, axis=0)

    widths = steps
    for level in range(1, levels + 1):
        noise = stream_rng(seed, level).standard_normal((values.shape[0] - 1, d))
        midpoints = 0.5 * (values[:-1] + values[1:]) + noise * np.sqrt(widths / 4.0)[:, None]
        refined = np.empty((2 * values.shape[0] - 1, d))
        refined[0::2] = values
        refined[1::2] = midpoints
        values = refined
        widths = np.repeat(widths / 2.0, 2)

    return grid.refine(refinement), values


def brownian_lift(
    seed: int,
    grid: TimeGrid,
    refinement: int = DEFAULT_REFINEMENT,
    d: int = 1,
    p: float = 2.5,
) -> PathLift:
    """
    Stratonovich-consistent Brownian lift on `grid`.

    The second level is the exact iterated integral of the piecewise-linear
    interpolant on the refined grid, read off at the coarse points.
    """
    fine_grid, values = brownian_path(seed, grid, refinement, d)
    fine = piecewise_linear_lift(fine_grid, values, p=p)
    coarse = np.arange(0, fine_grid.n + 1, refinement)
    logger.debug(
        f"Brownian lift: d={d}, n={grid.n}, refinement={refinement}, seed={seed}"
    )
    return PathLift(
        grid,
        fine.level1[coarse],
        fine.level2[coarse],
        p=p,
        geometric=True,
        seed=seed,
        refinement=refinement,
    )
