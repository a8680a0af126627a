"""
Rough drivers with product spatial structure.

A driver combines a lift (X, 𝕏) with m channels and spatial coefficients
σ_{ak}(x), a = 0..K-1, k = 0..m-1:

    H^a_{s,t}(x)    = sum_k σ_{ak}(x) X^k_{s,t}
    ℍ^{ab}_{s,t}(x) = sum_{k,l} σ_{ak}(x) σ_{bl}(x) 𝕏^{kl}_{s,t}

The scalar driver (K = 1) acts by multiplication with (H, ℍ). The spherical
driver (K = 3) acts on R³ through the antisymmetric W = [H]_× and
𝕎 = ℍ - tr(ℍ)·Id, which gives δ𝕎_{s,r,t} = W_{r,t} W_{s,r}.
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import ClassVar, Optional, Tuple, Union

import h5py
import numpy as np

from engine.drivers.space import SpaceGrid
from engine.rough_paths import (
    PathLift,
    TimeGrid,
    TwoIndexMap,
    dilate,
    joint_lift,
    sum_lifts,
    young_cross,
)
from engine.rough_paths.lift import grid_triples
from engine.rough_paths.serialization import lift_header, load_lift

logger = logging.getLogger(__name__)

CHEN_SAMPLES = 512


def antisymmetric(vectors: np.ndarray) -> np.ndarray:
    """Matrices [[0, h3, -h2], [-h3, 0, h1], [h2, -h1, 0]] for h in the last axis."""
    h1, h2, h3 = vectors[..., 0], vectors[..., 1], vectors[..., 2]
    zero = np.zeros_like(h1)
    return np.stack(
        [
            np.stack([zero, h3, -h2], axis=-1),
            np.stack([-h3, zero, h1], axis=-1),
            np.stack([h2, -h1, zero], axis=-1),
        ],
        axis=-2,
    )


def axial_vector(matrices: np.ndarray) -> np.ndarray:
    """Rotation vector ω with A v = ω × v for antisymmetric A."""
    return np.stack([matrices[..., 2, 1], matrices[..., 0, 2], matrices[..., 1, 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class RoughDriver:
    """Driver built from a lift and spatial coefficients of shape (K, m, *space)."""

    lift: PathLift
    space: SpaceGrid
    coefficients: np.ndarray
    chen_samples: int = CHEN_SAMPLES

    n_outputs: ClassVar[int] = 1
    kind: ClassVar[str] = "generic"

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        expected = (self.n_outputs, self.lift.d) + self.space.shape
        if coefficients.shape != expected:
            raise ValueError(
                f"{type(self).__name__} coefficients must have shape {expected}, "
                f"got {coefficients.shape}"
            )
        if not np.all(np.isfinite(coefficients)):
            raise ValueError(f"{type(self).__name__} profiles contain non-finite entries")
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def grid(self) -> TimeGrid:
        return self.lift.grid

    @property
    def channels(self) -> int:
        return self.lift.d

    @property
    def target_dim(self) -> int:
        """Size n of the matrices returned by `operators`."""
        return self.n_outputs

    @cached_property
    def _flat(self) -> np.ndarray:
        return self.coefficients.reshape(self.n_outputs, self.channels, self.space.size)

    def _space_shape(self, flat: np.ndarray, trailing: int) -> np.ndarray:
        lead = flat.shape[: flat.ndim - 1 - trailing]
        return flat.reshape(lead + self.space.shape + flat.shape[flat.ndim - trailing :])

    def modulate_first(self, level1: np.ndarray) -> np.ndarray:
        """H^a = sum_k σ_{ak} X^k for increments of shape (..., m); returns (..., *space, K)."""
        return self._space_shape(np.einsum("akp,...k->...pa", self._flat, level1), 1)

    def modulate_second(self, level2: np.ndarray) -> np.ndarray:
        """ℍ^{ab} = sum_kl σ_{ak} σ_{bl} 𝕏^{kl}; returns (..., *space, K, K)."""
        sigma = self._flat
        return self._space_shape(np.einsum("akp,blp,...kl->...pab", sigma, sigma, level2), 2)

    def assemble_first(self, h: np.ndarray) -> np.ndarray:
        """Level-1 operator W from H in the driver's native form."""
        raise NotImplementedError

    def assemble_second(self, hh: np.ndarray) -> np.ndarray:
        """Level-2 operator 𝕎 from ℍ in the driver's native form."""
        raise NotImplementedError

    def as_matrices(self, first: np.ndarray, second: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return first, second

    def levels(self, s, t) -> Tuple[np.ndarray, np.ndarray]:
        """(W_{s,t}, 𝕎_{s,t}) in native form: scalar fields or (*space, 3, 3) matrices."""
        level1, level2 = self.lift.increments(s, t)
        return (
            self.assemble_first(self.modulate_first(level1)),
            self.assemble_second(self.modulate_second(level2)),
        )

    def operators(self, s, t) -> Tuple[np.ndarray, np.ndarray]:
        """(W_{s,t}, 𝕎_{s,t}) as arrays of shape (..., *space, n, n)."""
        return self.as_matrices(*self.levels(s, t))

    @cached_property
    def step_levels(self) -> Tuple[np.ndarray, np.ndarray]:
        """Native levels on consecutive grid steps, leading axis n_steps."""
        level1, level2 = self.lift.steps
        return (
            self.assemble_first(self.modulate_first(level1)),
            self.assemble_second(self.modulate_second(level2)),
        )

    @cached_property
    def step_first_level(self) -> np.ndarray:
        """Level-1 operators on consecutive steps, computed from X alone."""
        return self.assemble_first(self.modulate_first(np.diff(self.lift.level1, axis=0)))

    @cached_property
    def chen_defect(self) -> float:
        """max |𝕎_{s,t} - 𝕎_{s,r} - 𝕎_{r,t} - W_{r,t} W_{s,r}| over sampled triples."""
        return driver_chen_defect(self, n_samples=self.chen_samples)

    def dilated(self, eps: float) -> "RoughDriver":
        return replace(self, lift=dilate(self.lift, eps))

    def with_lift(self, lift: PathLift) -> "RoughDriver":
        return replace(self, lift=lift)


@dataclass(frozen=True, eq=False)
class ScalarDriver(RoughDriver):
    """(g(x)X, g(x)²𝕏) for m channels: W = sum_i g_i X^i, 𝕎 = sum_ij g_i g_j 𝕏^ij."""

    n_outputs: ClassVar[int] = 1
    kind: ClassVar[str] = "scalar"

    @property
    def profiles(self) -> np.ndarray:
        return self.coefficients[0]

    def assemble_first(self, h: np.ndarray) -> np.ndarray:
        return h[..., 0]

    def assemble_second(self, hh: np.ndarray) -> np.ndarray:
        return hh[..., 0, 0]

    def as_matrices(self, first: np.ndarray, second: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return first[..., None, None], second[..., None, None]

    @classmethod
    def zero(cls, grid: TimeGrid, space: SpaceGrid, channels: int = 1) -> "ScalarDriver":
        return cls(PathLift.zeros(grid, channels), space, np.zeros((1, channels) + space.shape))


@dataclass(frozen=True, eq=False)
class SphericalDriver(RoughDriver):
    """Antisymmetric driver on R³ for sphere-valued fields."""

    n_outputs: ClassVar[int] = 3
    kind: ClassVar[str] = "spherical"

    def assemble_first(self, h: np.ndarray) -> np.ndarray:
        return antisymmetric(h)

    def assemble_second(self, hh: np.ndarray) -> np.ndarray:
        trace = np.trace(hh, axis1=-2, axis2=-1)
        return hh - trace[..., None, None] * np.eye(3)

    @classmethod
    def zero(cls, grid: TimeGrid, space: SpaceGrid) -> "SphericalDriver":
        return cls(PathLift.zeros(grid, 3), space, np.zeros((3, 3) + space.shape))


def driver_chen_defect(
    driver: RoughDriver, n_samples: int = CHEN_SAMPLES, seed: int = 0, exhaustive_limit: int = 32
) -> float:
    """
    Operator Chen defect max |δ𝕎_{s,r,t} - W_{r,t} W_{s,r}| over grid triples.

    Small grids are scanned exhaustively, larger ones on `n_samples` triples.
    """
    n_points = driver.grid.n + 1
    if n_points < 3:
        return 0.0
    triples = grid_triples(n_points, exhaustive_limit, n_samples, seed)
    if triples is None:
        triples = np.array(
            [
                (s, r, t)
                for s in range(n_points)
                for r in range(s + 1, n_points)
                for t in range(r + 1, n_points)
            ]
        )
    s, r, t = triples[:, 0], triples[:, 1], triples[:, 2]
    defect = 0.0
    for chunk in np.array_split(np.arange(len(triples)), max(1, len(triples) // 64)):
        w_sr, ww_sr = driver.operators(s[chunk], r[chunk])
        w_rt, ww_rt = driver.operators(r[chunk], t[chunk])
        _, ww_st = driver.operators(s[chunk], t[chunk])
        residual = ww_st - ww_sr - ww_rt - w_rt @ w_sr
        defect = max(defect, float(np.max(np.abs(residual))))
    return defect


def make_scalar_driver(lift: PathLift, profiles: np.ndarray, space: SpaceGrid) -> ScalarDriver:
    """
    Build the scalar driver (g(x)X, g(x)²𝕏).

    Args:
        lift: Lift with m channels
        profiles: Array of shape (m, *space), or `space.shape` when m = 1
        space: Spatial grid the profiles are sampled on

    Returns:
        ScalarDriver with its Chen defect computed

    Raises:
        ValueError: On non-finite or misshaped profiles
    """
    profiles = np.asarray(profiles, dtype=float)
    if profiles.shape == space.shape:
        profiles = profiles[None]
    driver = ScalarDriver(lift, space, profiles[None])
    logger.info(
        f"Scalar driver: {lift.d} channel(s), N={space.n_points}, "
        f"Chen defect {driver.chen_defect:.3e}"
    )
    return driver


def make_llg_driver(lift: PathLift, profiles: np.ndarray, space: SpaceGrid) -> SphericalDriver:
    """
    Build the spherical driver from a three-channel lift.

    `profiles` of shape (3, *space) modulates channel a by g_a(x); a full
    (3, m, *space) coefficient array is accepted as well.
    """
    profiles = np.asarray(profiles, dtype=float)
    if profiles.shape == (3,) + space.shape:
        if lift.d != 3:
            raise ValueError(f"Spherical driver needs a 3-channel lift, got {lift.d} channel(s)")
        coefficients = np.zeros((3, 3) + space.shape)
        for a in range(3):
            coefficients[a, a] = profiles[a]
    elif profiles.ndim == 2 + space.dim and profiles.shape[0] == 3:
        coefficients = profiles
    else:
        raise ValueError(
            f"Spherical driver needs 3 channel profiles, got array of shape {profiles.shape}"
        )
    driver = SphericalDriver(lift, space, coefficients)
    logger.info(f"Spherical driver: N={space.n_points}, Chen defect {driver.chen_defect:.3e}")
    return driver


def _is_zero(lift: PathLift) -> bool:
    return not np.any(lift.level1) and not np.any(lift.level2)


def crossed_step_operators(
    base: RoughDriver,
    direction: RoughDriver,
    base_direction: TwoIndexMap,
    direction_base: TwoIndexMap,
) -> np.ndarray:
    """
    Per-step derivative of the level-2 operator of {G + τ_ε W} at ε = 0.

    The mixed second level is ∫ G dW + ∫ W dG, modulated by the base
    coefficients on the left and the direction coefficients on the right
    (and the other way round), then assembled like any level-2 operator.

    Returns:
        Native level-2 operators with leading axis n_steps
    """
    base.grid.require_same(direction.grid, "driver time grids")
    k = np.arange(base.grid.n)
    forward = base_direction.block(k, k + 1)
    backward = direction_base.block(k, k + 1)
    sigma_g = base._flat
    sigma_w = direction._flat
    mixed = np.einsum("akp,blp,nkl->npab", sigma_g, sigma_w, forward) + np.einsum(
        "akp,blp,nkl->npab", sigma_w, sigma_g, backward
    )
    return base.assemble_second(base._space_shape(mixed, 2))


def crossed_maps(
    base: PathLift,
    direction: PathLift,
    base_exponent: Optional[float] = None,
    direction_exponent: Optional[float] = None,
) -> Tuple[TwoIndexMap, TwoIndexMap]:
    """
    Crossed integrals ([GW], [WG]) of a base and a direction lift.

    Exponents default to the declared lift exponents. A Young-compatible pair
    (1/q_G + 1/q_W > 1) uses the Young pairing; otherwise both paths are
    paired as the piecewise-linear interpolants they are on the grid, which is
    experimental for two rough paths.
    """
    q_base = base.p if base_exponent is None else base_exponent
    q_direction = direction.p if direction_exponent is None else direction_exponent
    if 1.0 / q_base + 1.0 / q_direction <= 1.0:
        logger.warning(
            f"Rough pair (exponents {q_base}, {q_direction}): crossed integrals taken "
            "from piecewise-linear interpolants (experimental)"
        )
        q_base, q_direction = 1.0, 1.0
    forward = young_cross(base.level1, direction.level1, base.grid, q_base, q_direction)
    backward = young_cross(direction.level1, base.level1, base.grid, q_direction, q_base)
    return forward, backward


def dilate_driver(driver: RoughDriver, eps: float) -> RoughDriver:
    """τ_ε on the lift: (εX, ε²𝕏), coefficients unchanged."""
    return driver.dilated(eps)


def perturbed_driver(
    base: RoughDriver,
    direction: RoughDriver,
    eps: float,
    base_direction: Optional[TwoIndexMap] = None,
    direction_base: Optional[TwoIndexMap] = None,
) -> RoughDriver:
    """
    Driver of {G + τ_ε W}.

    Shared channels and coefficients use sum_lifts; otherwise the joint lift
    of both channel sets drives stacked coefficients.

    Args:
        base: Driver G
        direction: Driver W, same kind and grids as G
        eps: Dilation of the direction
        base_direction: [GW] between lift channels (unscaled)
        direction_base: [WG] between lift channels (unscaled)

    Returns:
        Driver of the same kind as `base`
    """
    if type(base) is not type(direction):
        raise ValueError(f"Cannot combine {base.kind} and {direction.kind} drivers")
    base.grid.require_same(direction.grid, "driver time grids")
    if base.space != direction.space:
        raise ValueError(f"Mismatched space grids: {base.space} vs {direction.space}")
    if base_direction is None or direction_base is None:
        if not _is_zero(base.lift):
            raise ValueError("Crossed maps [GW], [WG] are required when the base driver is nonzero")
        base_direction = TwoIndexMap.zeros(base.grid, (base.channels, direction.channels))
        direction_base = TwoIndexMap.zeros(base.grid, (direction.channels, base.channels))

    scaled = dilate(direction.lift, eps)
    cross_gw = base_direction.scaled(eps)
    cross_wg = direction_base.scaled(eps)
    same_channels = base.coefficients.shape == direction.coefficients.shape and np.array_equal(
        base.coefficients, direction.coefficients
    )
    if same_channels:
        lift = sum_lifts(base.lift, scaled, cross_gw, cross_wg)
        return replace(base, lift=lift)

    lift = joint_lift(base.lift, scaled, cross_gw, cross_wg)
    coefficients = np.concatenate([base.coefficients, direction.coefficients], axis=1)
    return replace(base, lift=lift, coefficients=coefficients)


def save_driver(driver: RoughDriver, path: Union[str, Path], extra: Optional[dict] = None) -> Path:
    """HDF5 layout of the lift plus a `coefficients` dataset (K, m, *space)."""
    if driver.lift.is_dense:
        raise ValueError("Drivers over a dense second level cannot be serialized")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = lift_header(driver.lift)
    header.update(
        {"kind": driver.kind, "n_points": driver.space.n_points, "space_dim": driver.space.dim}
    )
    header.update(extra or {})
    with h5py.File(path, "w") as handle:
        handle.create_dataset("times", data=driver.grid.points)
        handle.create_dataset("level1", data=driver.lift.level1)
        handle.create_dataset("level2", data=driver.lift.level2)
        handle.create_dataset("coefficients", data=driver.coefficients)
        for key, value in header.items():
            if value is not None:
                handle.attrs[key] = value
    logger.info(f"Saved {driver.kind} driver to {path}")
    return path


def load_driver(path: Union[str, Path]) -> RoughDriver:
    path = Path(path)
    lift = load_lift(path)
    try:
        with h5py.File(path, "r") as handle:
            coefficients = handle["coefficients"][()]
            kind = str(handle.attrs["kind"])
            space = SpaceGrid(int(handle.attrs["n_points"]), int(handle.attrs["space_dim"]))
    except (OSError, KeyError) as e:
        raise ValueError(f"Failed to load driver from {path}: {str(e)}") from e
    classes = {"scalar": ScalarDriver, "spherical": SphericalDriver}
    if kind not in classes:
        raise ValueError(f"Unknown driver kind '{kind}' in {path}")
    return classes[kind](lift, space, coefficients)
