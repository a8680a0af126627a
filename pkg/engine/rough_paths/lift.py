"""Discrete rough paths stored anchored at time 0.

A lift keeps X_{0,t_i} and 𝕏_{0,t_i}; every other block is rebuilt through
Chen's relation

    X_{s,t} = X_{0,t} - X_{0,s}
    𝕏_{s,t} = 𝕏_{0,t} - 𝕏_{0,s} - X_{0,s} ⊗ X_{s,t}

so the Chen defect of anchored data vanishes up to rounding.
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from engine.rough_paths.grid import TimeGrid

logger = logging.getLogger(__name__)

GEOMETRIC_TOLERANCE = 1e-10


def _outer(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...j->...ij", left, right)


def as_samples(values: np.ndarray) -> np.ndarray:
    """Return path samples as a (n + 1, d) float array."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ValueError(f"Path samples must be 1-D or 2-D, got shape {values.shape}")
    return values


@dataclass(frozen=True, eq=False)
class TwoIndexMap:
    """
    Map (s, t) -> A_{s,t} on grid pairs.

    Stored either as anchored values A_{0,t_i} plus correction terms

        A_{s,t} = A_{0,t} - A_{0,s} - sum_k c_k L^k_{0,s} ⊗ R^k_{s,t}

    or as a dense (n + 1, n + 1, ...) array.
    """

    grid: TimeGrid
    anchor: np.ndarray
    terms: Tuple[Tuple[float, np.ndarray, np.ndarray], ...] = ()
    dense: Optional[np.ndarray] = None

    def __post_init__(self):
        anchor = np.asarray(self.anchor, dtype=float)
        if anchor.shape[0] != self.grid.n + 1:
            raise ValueError(
                f"Anchored values have {anchor.shape[0]} rows, grid has {self.grid.n + 1} points"
            )
        object.__setattr__(self, "anchor", anchor)
        if self.dense is not None:
            dense = np.asarray(self.dense, dtype=float)
            if dense.shape[:2] != (self.grid.n + 1, self.grid.n + 1):
                raise ValueError(f"Dense values must be (n+1, n+1, ...), got {dense.shape}")
            object.__setattr__(self, "dense", dense)

    @classmethod
    def additive(cls, grid: TimeGrid, path: np.ndarray) -> "TwoIndexMap":
        """Increments of a path: A_{s,t} = x_t - x_s."""
        path = np.asarray(path, dtype=float)
        return cls(grid, path - path[0])

    @classmethod
    def zeros(cls, grid: TimeGrid, shape: Tuple[int, ...]) -> "TwoIndexMap":
        return cls(grid, np.zeros((grid.n + 1,) + tuple(shape)))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.anchor.shape[1:]

    def block(self, s, t) -> np.ndarray:
        """A_{t_s, t_t} for integer indices (broadcastable arrays allowed)."""
        s = np.asarray(s)
        t = np.asarray(t)
        if self.dense is not None:
            return self.dense[s, t]
        values = self.anchor[t] - self.anchor[s]
        for coef, left, right in self.terms:
            values = values - coef * _outer(left[s] - left[0], right[t] - right[s])
        return values

    def ending_at(self, i: int) -> np.ndarray:
        """Values A_{t_j, t_i} for j = 0..i."""
        return self.block(np.arange(i + 1), i)

    def row(self, s: int = 0) -> np.ndarray:
        """Values A_{t_s, t_j} for j = 0..n."""
        return self.block(s, np.arange(self.grid.n + 1))

    def materialize(self) -> np.ndarray:
        idx = np.arange(self.grid.n + 1)
        return self.block(idx[:, None], idx[None, :])

    def transpose(self) -> "TwoIndexMap":
        """Entrywise matrix transpose (returned dense)."""
        return TwoIndexMap(
            self.grid,
            np.swapaxes(self.anchor, -1, -2),
            dense=np.swapaxes(self.materialize(), -1, -2),
        )

    def scaled(self, factor: float) -> "TwoIndexMap":
        if self.dense is not None:
            return TwoIndexMap(self.grid, self.anchor * factor, dense=self.dense * factor)
        terms = tuple((coef * factor, left, right) for coef, left, right in self.terms)
        return TwoIndexMap(self.grid, self.anchor * factor, terms)

    def __add__(self, other: "TwoIndexMap") -> "TwoIndexMap":
        self.grid.require_same(other.grid, "two-index map grids")
        if self.shape != other.shape:
            raise ValueError(f"Two-index maps of shapes {self.shape} and {other.shape} differ")
        if self.dense is not None or other.dense is not None:
            return TwoIndexMap(
                self.grid,
                self.anchor + other.anchor,
                dense=self.materialize() + other.materialize(),
            )
        return TwoIndexMap(self.grid, self.anchor + other.anchor, self.terms + other.terms)

    def __neg__(self) -> "TwoIndexMap":
        return self.scaled(-1.0)

    def __sub__(self, other: "TwoIndexMap") -> "TwoIndexMap":
        return self + (-other)


@dataclass(frozen=True, eq=False)
class PathLift:
    """
    Discrete rough path (X, 𝕏) on a TimeGrid.

    level1[i] = X_{0,t_i} in R^d, level2[i] = 𝕏_{0,t_i} in R^{d x d}.
    An optional dense second level replaces the anchored reconstruction; it
    exists for diagnostics on data that does not come from anchored storage.
    """

    grid: TimeGrid
    level1: np.ndarray
    level2: np.ndarray
    p: float = 2.5
    geometric: bool = True
    seed: Optional[int] = None
    refinement: int = 1
    dense_level2: Optional[np.ndarray] = None

    def __post_init__(self):
        level1 = as_samples(self.level1)
        level2 = np.asarray(self.level2, dtype=float)
        n_points, d = level1.shape
        if n_points != self.grid.n + 1:
            raise ValueError(f"Level 1 has {n_points} rows, grid has {self.grid.n + 1} points")
        if level2.shape != (n_points, d, d):
            raise ValueError(f"Level 2 must have shape {(n_points, d, d)}, got {level2.shape}")
        if not (2.0 <= self.p < 3.0):
            raise ValueError(f"p-variation exponent must lie in [2, 3), got {self.p}")
        if np.any(level1[0] != 0.0) or np.any(level2[0] != 0.0):
            raise ValueError("Anchored lift must satisfy X_{0,0} = 0 and 𝕏_{0,0} = 0")
        object.__setattr__(self, "level1", level1)
        object.__setattr__(self, "level2", level2)
        if self.dense_level2 is not None:
            dense = np.asarray(self.dense_level2, dtype=float)
            if dense.shape != (n_points, n_points, d, d):
                raise ValueError(f"Dense level 2 must be {(n_points, n_points, d, d)}")
            object.__setattr__(self, "dense_level2", dense)

    @classmethod
    def zeros(cls, grid: TimeGrid, d: int = 1, p: float = 2.5) -> "PathLift":
        return cls(grid, np.zeros((grid.n + 1, d)), np.zeros((grid.n + 1, d, d)), p=p)

    @classmethod
    def from_dense(
        cls, grid: TimeGrid, level1: np.ndarray, dense_level2: np.ndarray, **metadata
    ) -> "PathLift":
        """Build a lift whose second level is given on every grid pair."""
        dense_level2 = np.asarray(dense_level2, dtype=float)
        return cls(grid, level1, dense_level2[0], dense_level2=dense_level2, **metadata)

    @property
    def d(self) -> int:
        return self.level1.shape[1]

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def is_dense(self) -> bool:
        return self.dense_level2 is not None

    def first_level_map(self) -> TwoIndexMap:
        return TwoIndexMap.additive(self.grid, self.level1)

    def second_level_map(self) -> TwoIndexMap:
        if self.dense_level2 is not None:
            return TwoIndexMap(self.grid, self.level2, dense=self.dense_level2)
        return TwoIndexMap(self.grid, self.level2, ((1.0, self.level1, self.level1),))

    def increments(self, s, t) -> Tuple[np.ndarray, np.ndarray]:
        """(X_{s,t}, 𝕏_{s,t}) for integer grid indices."""
        s = np.asarray(s)
        t = np.asarray(t)
        level1 = self.level1[t] - self.level1[s]
        if self.dense_level2 is not None:
            return level1, self.dense_level2[s, t]
        level2 = self.level2[t] - self.level2[s] - _outer(self.level1[s], level1)
        return level1, level2

    @cached_property
    def steps(self) -> Tuple[np.ndarray, np.ndarray]:
        """Consecutive increments (X_{t_k,t_{k+1}}, 𝕏_{t_k,t_{k+1}}), k = 0..n-1."""
        k = np.arange(self.n)
        return self.increments(k, k + 1)

    def dense_second_level(self) -> np.ndarray:
        return self.second_level_map().materialize()

    def with_level2(self, level2: np.ndarray, geometric: Optional[bool] = None) -> "PathLift":
        """Same first level, replaced (anchored) second level."""
        return replace(
            self,
            level2=level2,
            dense_level2=None,
            geometric=self.geometric if geometric is None else geometric,
        )

    def metadata(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "p": self.p,
            "geometric": self.geometric,
            "seed": self.seed,
            "refinement": self.refinement,
        }


def dilate(lift: PathLift, eps: float) -> PathLift:
    """τ_ε(X, 𝕏) = (εX, ε²𝕏)."""
    dense = None if lift.dense_level2 is None else lift.dense_level2 * eps**2
    return replace(
        lift, level1=lift.level1 * eps, level2=lift.level2 * eps**2, dense_level2=dense
    )


def ito_lift(lift: PathLift) -> PathLift:
    """Itô second level 𝕏 - ½(t - s)·Id per channel. Chen still holds; not geometric."""
    identity = np.eye(lift.d)
    times = lift.grid.points
    level2 = lift.level2 - 0.5 * times[:, None, None] * identity
    dense = None
    if lift.dense_level2 is not None:
        gaps = times[None, :] - times[:, None]
        dense = lift.dense_level2 - 0.5 * gaps[:, :, None, None] * identity
    return replace(lift, level2=level2, dense_level2=dense, geometric=False)


def piecewise_linear_lift(
    grid: TimeGrid,
    values: np.ndarray,
    p: float = 2.5,
    seed: Optional[int] = None,
    refinement: int = 1,
) -> PathLift:
    """
    Exact iterated integrals of the piecewise-linear interpolant of `values`.

    On each step the path is linear, so its own second level is ½δ⊗δ and the
    anchored value accumulates X_{0,t_k}⊗δ_k + ½δ_k⊗δ_k.
    """
    values = as_samples(values)
    if values.shape[0] != grid.n + 1:
        raise ValueError(f"Got {values.shape[0]} samples for a grid with {grid.n + 1} points")
    level1 = values - values[0]
    delta = np.diff(level1, axis=0)
    per_step = _outer(level1[:-1], delta) + 0.5 * _outer(delta, delta)
    level2 = np.zeros((grid.n + 1, level1.shape[1], level1.shape[1]))
    level2[1:] = np.cumsum(per_step, axis=0)
    return PathLift(grid, level1, level2, p=p, geometric=True, seed=seed, refinement=refinement)


def _sample_triples(n_points: int, n_samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    collected = []
    remaining = n_samples
    while remaining > 0:
        draw = np.sort(rng.integers(0, n_points, size=(2 * remaining, 3)), axis=1)
        draw = draw[(draw[:, 0] < draw[:, 1]) & (draw[:, 1] < draw[:, 2])][:remaining]
        collected.append(draw)
        remaining -= len(draw)
    return np.concatenate(collected)


def grid_triples(
    n_points: int, exhaustive_limit: int = 256, n_samples: int = 10_000, seed: int = 0
) -> Optional[np.ndarray]:
    """
    Triples s < r < t to scan, or None when the scan is exhaustive.

    Grids with at most `exhaustive_limit` steps are scanned exhaustively;
    larger grids use `n_samples` uniformly drawn triples from `seed`.
    """
    if n_points < 3:
        raise ValueError(f"Grid with {n_points} points has no triples s < r < t")
    if n_points - 1 <= exhaustive_limit:
        return None
    logger.debug(f"Sampling {n_samples} triples out of {n_points} points (seed={seed})")
    return _sample_triples(n_points, n_samples, seed)


def _chen_residual(lift: PathLift, s, r, t) -> np.ndarray:
    x_sr, xx_sr = lift.increments(s, r)
    x_rt, xx_rt = lift.increments(r, t)
    _, xx_st = lift.increments(s, t)
    return xx_st - xx_sr - xx_rt - _outer(x_sr, x_rt)


def chen_defect(
    lift: PathLift,
    triples: Optional[Sequence[Sequence[int]]] = None,
    exhaustive_limit: int = 256,
    n_samples: int = 10_000,
    seed: int = 0,
) -> float:
    """
    max |δ𝕏_{s,r,t} - X_{s,r} ⊗ X_{r,t}| (entrywise) over grid triples s < r < t.

    Args:
        lift: Lift to check
        triples: Explicit (M, 3) index triples, or None for the default scan
        exhaustive_limit: Largest step count scanned exhaustively
        n_samples: Number of sampled triples above the limit
        seed: Sampling seed

    Returns:
        Nonnegative defect (0.0 on a one-step grid, which has no triples)
    """
    n_points = lift.n + 1
    if triples is None and n_points < 3:
        return 0.0
    if triples is None:
        triples = grid_triples(n_points, exhaustive_limit, n_samples, seed)
    if triples is not None:
        triples = np.asarray(triples, dtype=int)
        residual = _chen_residual(lift, triples[:, 0], triples[:, 1], triples[:, 2])
        return float(np.max(np.abs(residual))) if residual.size else 0.0

    defect = 0.0
    for s in range(n_points - 2):
        r, t = np.triu_indices(n_points - s - 1, k=1)
        r = r + s + 1
        t = t + s + 1
        residual = _chen_residual(lift, s, r, t)
        defect = max(defect, float(np.max(np.abs(residual))))
    return defect


def geometricity_defect(lift: PathLift) -> float:
    """max over grid pairs of |Sym(𝕏_{s,t}) - ½ X_{s,t} ⊗ X_{s,t}|."""
    n_points = lift.n + 1
    defect = 0.0
    for s in range(n_points - 1):
        t = np.arange(s + 1, n_points)
        x, xx = lift.increments(s, t)
        sym = 0.5 * (xx + np.swapaxes(xx, -1, -2))
        defect = max(defect, float(np.max(np.abs(sym - 0.5 * _outer(x, x)))))
    return defect
