"""Space-time solution records and their persistence."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import h5py
import numpy as np
import pandas as pd

from engine.drivers.space import SpaceGrid
from engine.rough_paths import TimeGrid
from engine.rough_paths.serialization import HDF5_SUFFIXES, read_table, write_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Field:
    """u(t_k, x_j) in R^n, stored as an array of shape (n_t + 1, *space, n)."""

    space: SpaceGrid
    times: TimeGrid
    values: np.ndarray
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = (self.times.n + 1,) + self.space.shape
        if values.shape[:-1] != expected:
            raise ValueError(f"Field values must have shape {expected} + (n,), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("Field contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def n_components(self) -> int:
        return self.values.shape[-1]

    @property
    def initial(self) -> np.ndarray:
        return self.values[0]

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def at(self, k: int) -> np.ndarray:
        return self.values[k]

    def require_compatible(self, other: "Field") -> None:
        self.times.require_same(other.times, "field time grids")
        if self.space != other.space or self.n_components != other.n_components:
            raise ValueError(
                f"Fields live on different spaces: {self.space}/{self.n_components} "
                f"vs {other.space}/{other.n_components}"
            )

    def __sub__(self, other: "Field") -> "Field":
        self.require_compatible(other)
        return Field(self.space, self.times, self.values - other.values)

    def scaled(self, factor: float) -> "Field":
        return Field(self.space, self.times, self.values * factor)

    def sphere_deviation(self) -> float:
        """max over nodes of ||u| - 1|."""
        return float(np.max(np.abs(np.linalg.norm(self.values, axis=-1) - 1.0)))


def field_to_frame(solution: Field) -> pd.DataFrame:
    """Long table with one row per (t, x) node."""
    n_t = solution.times.n + 1
    coords = solution.space.coordinates()
    columns = {"t": np.repeat(solution.times.points, solution.space.size)}
    for name, axis in zip(("x", "y"), coords):
        columns[name] = np.tile(axis.ravel(), n_t)
    flat = solution.values.reshape(n_t * solution.space.size, solution.n_components)
    for i in range(solution.n_components):
        columns[f"u_{i}"] = flat[:, i]
    return pd.DataFrame(columns)


def save_field(
    solution: Field, path: Union[str, Path], extra: Optional[Dict[str, object]] = None
) -> Path:
    """Save a field as CSV (t, x, components) or HDF5, chosen by suffix."""
    path = Path(path)
    header = {
        "n_points": solution.space.n_points,
        "space_dim": solution.space.dim,
        "n_steps": solution.times.n,
        "components": solution.n_components,
        "uniform": solution.times.is_uniform,
    }
    header.update(extra or {})
    if path.suffix in HDF5_SUFFIXES:
        path.parent.mkdir(parents=True, exist_ok=True)
        with h5py.File(path, "w") as handle:
            handle.create_dataset("times", data=solution.times.points)
            handle.create_dataset("values", data=solution.values)
            for key, value in header.items():
                handle.attrs[key] = value
    else:
        write_table(path, field_to_frame(solution), header)
    logger.info(f"Saved field ({solution.times.n} steps, N={solution.space.n_points}) to {path}")
    return path


def load_field(path: Union[str, Path]) -> Field:
    path = Path(path)
    if path.suffix in HDF5_SUFFIXES:
        try:
            with h5py.File(path, "r") as handle:
                times = handle["times"][()]
                values = handle["values"][()]
                attrs = dict(handle.attrs)
        except (OSError, KeyError) as e:
            raise ValueError(f"Failed to load field from {path}: {str(e)}") from e
        space = SpaceGrid(int(attrs["n_points"]), int(attrs["space_dim"]))
        return Field(space, TimeGrid(times, is_uniform=bool(attrs["uniform"])), values)

    frame, header = read_table(path)
    space = SpaceGrid(int(header["n_points"]), int(header["space_dim"]))
    n_components = int(header["components"])
    n_t = int(header["n_steps"]) + 1
    times = frame["t"].to_numpy()[:: space.size]
    values = frame[[f"u_{i}" for i in range(n_components)]].to_numpy()
    values = values.reshape((n_t,) + space.shape + (n_components,))
    return Field(space, TimeGrid(times, is_uniform=header.get("uniform") == "True"), values)
