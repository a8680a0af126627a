"""Driver metric ρ(G, H) in variation norms of the sup-over-space gaps."""

import logging
from typing import Optional

import numpy as np

from engine.drivers.drivers import RoughDriver
from engine.rough_paths.variation import partition_variation

logger = logging.getLogger(__name__)


def _sup_gap(first: np.ndarray, second: Optional[np.ndarray]) -> np.ndarray:
    gap = first if second is None else first - second
    return np.max(np.abs(gap.reshape(gap.shape[0], -1)), axis=1)


def driver_distance(
    first: RoughDriver, second: Optional[RoughDriver] = None, p: Optional[float] = None
) -> float:
    """
    ρ(G, H) = ‖G - H‖_{p-var} + ‖𝔾 - ℍ‖_{p/2-var}.

    Interval sizes are sup over x of the largest matrix entry of the operator
    gap; both sums are maximized over partitions by dynamic programming.

    Args:
        first: Driver G
        second: Driver H, or None for the zero driver
        p: Variation exponent (defaults to the larger declared lift exponent)

    Returns:
        Nonnegative distance

    Raises:
        ValueError: On mismatched grids or operator sizes
    """
    if second is not None:
        first.grid.require_same(second.grid, "driver time grids")
        if first.space != second.space or first.target_dim != second.target_dim:
            raise ValueError(
                f"Drivers act on different spaces: {first.space}/{first.target_dim} "
                f"vs {second.space}/{second.target_dim}"
            )
        p = max(first.lift.p, second.lift.p) if p is None else p
    else:
        p = first.lift.p if p is None else p

    def level_gaps(i: int, level: int) -> np.ndarray:
        s = np.arange(i)
        gap_first = first.operators(s, i)[level]
        gap_second = None if second is None else second.operators(s, i)[level]
        return _sup_gap(gap_first, gap_second)

    n_points = first.grid.n + 1
    level1 = partition_variation(n_points, p, lambda i: level_gaps(i, 0))
    level2 = partition_variation(n_points, p / 2, lambda i: level_gaps(i, 1))
    distance = level1 ** (1.0 / p) + level2 ** (2.0 / p)
    logger.debug(f"Driver distance {distance:.6e} (p={p})")
    return distance


def driver_norm(driver: RoughDriver, p: Optional[float] = None) -> float:
    """ρ(G, 0)."""
    return driver_distance(driver, None, p)
