"""
Lift persistence.

CSV layout: a block of `# key=value` header lines (d, n, p, geometric, seed,
refinement, uniform plus caller extras), then one row per grid point with
columns t, X_<i>, XX_<i>_<j> (row-major). HDF5 layout: datasets `times`,
`level1`, `level2` with the same header stored as attributes.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import h5py
import numpy as np
import pandas as pd

from engine.rough_paths.grid import TimeGrid
from engine.rough_paths.lift import PathLift

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
HDF5_SUFFIXES = {".h5", ".hdf5"}


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path: PathLike, frame: pd.DataFrame, header: Dict[str, object]) -> Path:
    """Write a DataFrame as CSV preceded by `# key=value` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        for key in sorted(header):
            handle.write(f"# {key}={_format_value(header[key])}\n")
        frame.to_csv(handle, index=False)
    return path


def read_table(path: PathLike) -> Tuple[pd.DataFrame, Dict[str, str]]:
    """Read a table written by write_table. Header values are returned as strings."""
    path = Path(path)
    header: Dict[str, str] = {}
    n_header = 0
    try:
        with open(path) as handle:
            for line in handle:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].strip().partition("=")
                header[key.strip()] = value.strip()
                n_header += 1
        frame = pd.read_csv(path, skiprows=n_header, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise ValueError(f"Failed to read table {path}: {str(e)}") from e
    return frame, header


def _parse_optional_int(value: Optional[str]) -> Optional[int]:
    if value is None or value in ("None", ""):
        return None
    return int(value)


def lift_header(lift: PathLift) -> Dict[str, object]:
    header = lift.metadata()
    header["uniform"] = lift.grid.is_uniform
    return header


def _require_anchored(lift: PathLift) -> None:
    if lift.is_dense:
        raise ValueError("Lifts with a dense second level cannot be serialized")


def lift_to_frame(lift: PathLift) -> pd.DataFrame:
    d = lift.d
    columns = {"t": lift.grid.points}
    for i in range(d):
        columns[f"X_{i}"] = lift.level1[:, i]
    for i in range(d):
        for j in range(d):
            columns[f"XX_{i}_{j}"] = lift.level2[:, i, j]
    return pd.DataFrame(columns)


def save_lift(lift: PathLift, path: PathLike, extra: Optional[Dict[str, object]] = None) -> Path:
    """
    Save a lift as CSV or HDF5 (chosen by suffix).

    Args:
        lift: Anchored lift
        path: Output file (.csv, .h5 or .hdf5)
        extra: Additional header entries (e.g. config_hash)

    Returns:
        Path written
    """
    _require_anchored(lift)
    path = Path(path)
    header = lift_header(lift)
    header.update(extra or {})
    if path.suffix in HDF5_SUFFIXES:
        path.parent.mkdir(parents=True, exist_ok=True)
        with h5py.File(path, "w") as handle:
            handle.create_dataset("times", data=lift.grid.points)
            handle.create_dataset("level1", data=lift.level1)
            handle.create_dataset("level2", data=lift.level2)
            for key, value in header.items():
                if value is not None:
                    handle.attrs[key] = value
    else:
        write_table(path, lift_to_frame(lift), header)
    logger.info(f"Saved lift (d={lift.d}, n={lift.n}) to {path}")
    return path


def load_lift(path: PathLike) -> PathLift:
    """Load a lift written by save_lift; values round-trip bit-exactly."""
    path = Path(path)
    if path.suffix in HDF5_SUFFIXES:
        try:
            with h5py.File(path, "r") as handle:
                times = handle["times"][()]
                level1 = handle["level1"][()]
                level2 = handle["level2"][()]
                attrs = dict(handle.attrs)
        except (OSError, KeyError) as e:
            raise ValueError(f"Failed to load lift from {path}: {str(e)}") from e
        seed = attrs.get("seed")
        return PathLift(
            TimeGrid(times, is_uniform=bool(attrs.get("uniform", False))),
            level1,
            level2,
            p=float(attrs["p"]),
            geometric=bool(attrs["geometric"]),
            seed=None if seed is None else int(seed),
            refinement=int(attrs.get("refinement", 1)),
        )

    frame, header = read_table(path)
    d = int(header["d"])
    n_points = len(frame)
    level1 = frame[[f"X_{i}" for i in range(d)]].to_numpy()
    level2 = frame[[f"XX_{i}_{j}" for i in range(d) for j in range(d)]].to_numpy()
    return PathLift(
        TimeGrid(frame["t"].to_numpy(), is_uniform=header.get("uniform") == "True"),
        level1,
        level2.reshape(n_points, d, d),
        p=float(header["p"]),
        geometric=header["geometric"] == "True",
        seed=_parse_optional_int(header.get("seed")),
        refinement=int(header.get("refinement", 1)),
    )
