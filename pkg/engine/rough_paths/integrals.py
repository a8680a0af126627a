"""Crossed integrals, sums of rough paths and joint lifts."""

import logging
from dataclasses import dataclass

import numpy as np

from engine.rough_paths.lift import (
    PathLift,
    TwoIndexMap,
    as_samples,
    piecewise_linear_lift,
)

logger = logging.getLogger(__name__)


def young_cross(
    first: np.ndarray,
    second: np.ndarray,
    grid,
    q1: float = 1.0,
    q2: float = 1.0,
) -> TwoIndexMap:
    """
    Crossed integral [AB]_{s,t} = ∫_s^t A_{s,r} ⊗ dB_r by trapezoid sums.

    Stored anchored: I_{0,t} = sum_k ½(a_k + a_{k+1}) ⊗ δb_k, and blocks
    [AB]_{s,t} = I_{0,t} - I_{0,s} - A_{0,s} ⊗ B_{s,t}, so that
    δ[AB]_{s,r,t} = A_{s,r} ⊗ B_{r,t} holds exactly on the grid.

    Args:
        first: Samples of A, shape (n + 1,) or (n + 1, d1)
        second: Samples of B, shape (n + 1,) or (n + 1, d2)
        grid: Shared TimeGrid
        q1: Declared variation exponent of A
        q2: Declared variation exponent of B

    Returns:
        TwoIndexMap with blocks of shape (d1, d2)

    Raises:
        ValueError: On mismatched grids or 1/q1 + 1/q2 <= 1
    """
    a = as_samples(first)
    b = as_samples(second)
    if a.shape[0] != grid.n + 1 or b.shape[0] != grid.n + 1:
        raise ValueError(
            f"Mismatched grids: paths with {a.shape[0]} and {b.shape[0]} samples "
            f"on a grid with {grid.n + 1} points"
        )
    if 1.0 / q1 + 1.0 / q2 <= 1.0:
        raise ValueError(f"Young pairing needs 1/q1 + 1/q2 > 1, got q1={q1}, q2={q2}")
    a = a - a[0]
    b = b - b[0]
    midpoints = 0.5 * (a[:-1] + a[1:])
    anchor = np.zeros((grid.n + 1, a.shape[1], b.shape[1]))
    anchor[1:] = np.cumsum(np.einsum("ki,kj->kij", midpoints, np.diff(b, axis=0)), axis=0)
    return TwoIndexMap(grid, anchor, ((1.0, a, b),))


def _check_pair(
    first: PathLift, second: PathLift, first_cross: TwoIndexMap, second_cross: TwoIndexMap
) -> None:
    first.grid.require_same(second.grid, "lift grids")
    if first.d != second.d:
        raise ValueError(f"Lift dimensions differ: {first.d} vs {second.d}")
    for name, cross in (("XY", first_cross), ("YX", second_cross)):
        first.grid.require_same(cross.grid, f"crossed map {name} grid")
        if cross.shape != (first.d, first.d):
            raise ValueError(
                f"Crossed map {name} has block shape {cross.shape}, expected {(first.d, first.d)}"
            )


def sum_lifts(
    first: PathLift, second: PathLift, first_cross: TwoIndexMap, second_cross: TwoIndexMap
) -> PathLift:
    """
    {X + Y} = (X + Y, 𝕏 + 𝕐 + [XY] + [YX]).

    The result is stored anchored from the row-0 blocks, so its Chen defect
    vanishes up to rounding whatever the storage of the inputs.
    """
    _check_pair(first, second, first_cross, second_cross)
    level2 = (
        first.second_level_map().row(0)
        + second.second_level_map().row(0)
        + first_cross.row(0)
        + second_cross.row(0)
    )
    return PathLift(
        first.grid,
        first.level1 + second.level1,
        level2,
        p=max(first.p, second.p),
        geometric=first.geometric and second.geometric,
        seed=first.seed,
        refinement=first.refinement,
    )


@dataclass(frozen=True, eq=False)
class LiftIncrement:
    """
    Element-wise difference {X + τ_ε Y} - X.

    Not a rough path: level2 does not satisfy Chen's relation against level1.
    """

    level1: TwoIndexMap
    level2: TwoIndexMap


def increment(
    first: PathLift,
    second: PathLift,
    first_cross: TwoIndexMap,
    second_cross: TwoIndexMap,
    eps: float,
) -> LiftIncrement:
    """(εY, ε²𝕐 + ε[XY] + ε[YX]) as two-index maps."""
    _check_pair(first, second, first_cross, second_cross)
    level1 = TwoIndexMap.additive(first.grid, eps * second.level1)
    level2 = (
        second.second_level_map().scaled(eps**2)
        + first_cross.scaled(eps)
        + second_cross.scaled(eps)
    )
    return LiftIncrement(level1=level1, level2=level2)


def joint_lift(
    first: PathLift, second: PathLift, first_cross: TwoIndexMap, second_cross: TwoIndexMap
) -> PathLift:
    """Lift of (X, Y) on R^{dX + dY} with second level [[𝕏, XY], [YX, 𝕐]]."""
    first.grid.require_same(second.grid, "lift grids")
    dx, dy = first.d, second.d
    if first_cross.shape != (dx, dy) or second_cross.shape != (dy, dx):
        raise ValueError(
            f"Crossed maps of shapes {first_cross.shape}, {second_cross.shape} "
            f"do not match dimensions ({dx}, {dy})"
        )
    n_points = first.grid.n + 1
    level2 = np.zeros((n_points, dx + dy, dx + dy))
    level2[:, :dx, :dx] = first.second_level_map().row(0)
    level2[:, :dx, dx:] = first_cross.row(0)
    level2[:, dx:, :dx] = second_cross.row(0)
    level2[:, dx:, dx:] = second.second_level_map().row(0)
    return PathLift(
        first.grid,
        np.hstack([first.level1, second.level1]),
        level2,
        p=max(first.p, second.p),
        geometric=first.geometric and second.geometric,
        seed=first.seed,
        refinement=first.refinement,
    )


def joint_lift_young(lift: PathLift, direction: np.ndarray, q: float = 1.0) -> PathLift:
    """
    Joint lift Z = (V, h) of a rough path and a Young-regular path.

    Args:
        lift: Rough path V with declared exponent p
        direction: Samples of h on the same grid
        q: Declared variation exponent of h, 1/p + 1/q > 1

    Returns:
        PathLift on R^{dV + dh} with blocks (𝕍, [Vh]; [hV], [hh])
    """
    samples = as_samples(direction)
    if samples.shape[0] != lift.grid.n + 1:
        raise ValueError(
            f"Mismatched grids: direction has {samples.shape[0]} samples, "
            f"lift has {lift.grid.n + 1} points"
        )
    cross_vh = young_cross(lift.level1, samples, lift.grid, lift.p, q)
    cross_hv = young_cross(samples, lift.level1, lift.grid, q, lift.p)
    direction_lift = piecewise_linear_lift(lift.grid, samples, p=lift.p)
    return joint_lift(lift, direction_lift, cross_vh, cross_hv)
