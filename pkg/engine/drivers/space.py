"""Periodic spatial grids on the unit torus."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import fft

logger = logging.getLogger(__name__)

PROFILE_PRESETS = ("zero", "constant", "sin", "cos")


@dataclass(frozen=True)
class SpaceGrid:
    """
    Uniform periodic grid x_j = j / N on 𝕋^dim.

    Fields are arrays whose leading `dim` axes are spatial; trailing axes
    (components, matrix entries) are untouched by the difference operators.
    """

    n_points: int
    dim: int = 1

    def __post_init__(self):
        if self.n_points < 4:
            raise ValueError(f"SpaceGrid needs N >= 4 points per axis, got {self.n_points}")
        if self.dim not in (1, 2):
            raise ValueError(f"Spatial dimension must be 1 or 2, got {self.dim}")

    @property
    def spacing(self) -> float:
        return 1.0 / self.n_points

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_points,) * self.dim

    @property
    def size(self) -> int:
        return self.n_points**self.dim

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(range(self.dim))

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        axis = np.arange(self.n_points) * self.spacing
        return tuple(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    def wrap(self, index: int) -> int:
        return index % self.n_points

    def check_field(self, field: np.ndarray, what: str = "field") -> np.ndarray:
        field = np.asarray(field, dtype=float)
        if field.shape[: self.dim] != self.shape:
            raise ValueError(
                f"{what} has spatial shape {field.shape[: self.dim]}, expected {self.shape}"
            )
        return field

    def centered_derivative(self, field: np.ndarray, axis: int = 0) -> np.ndarray:
        """(f_{j+1} - f_{j-1}) / (2Δx) with periodic wrap."""
        return (np.roll(field, -1, axis=axis) - np.roll(field, 1, axis=axis)) / (2.0 * self.spacing)

    def laplacian(self, field: np.ndarray) -> np.ndarray:
        """Periodic second-difference Laplacian Δ_h."""
        result = np.zeros_like(field, dtype=float)
        for axis in self.axes:
            result += np.roll(field, -1, axis=axis) - 2.0 * field + np.roll(field, 1, axis=axis)
        return result / self.spacing**2

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers 2πk in FFT order."""
        return 2.0 * np.pi * fft.fftfreq(self.n_points, d=self.spacing)

    def laplacian_symbol(self) -> np.ndarray:
        """Fourier symbol of Δ_h: -sum_axes 4 sin²(πk/N) / Δx², shape `self.shape`."""
        k = fft.fftfreq(self.n_points, d=1.0 / self.n_points)
        axis_symbol = -4.0 * np.sin(np.pi * k / self.n_points) ** 2 / self.spacing**2
        symbol = np.zeros(self.shape)
        for axis in self.axes:
            shape = [1] * self.dim
            shape[axis] = self.n_points
            symbol = symbol + axis_symbol.reshape(shape)
        return symbol


def sample_profile(
    space: SpaceGrid,
    name: str = "constant",
    amplitude: float = 1.0,
    mode: int = 1,
    offset: float = 0.0,
) -> np.ndarray:
    """
    Sample a named spatial profile.

    Args:
        space: Grid to sample on
        name: One of "zero", "constant", "sin", "cos"
        amplitude: Multiplier
        mode: Frequency along the first axis (sin/cos)
        offset: Constant added after scaling

    Returns:
        Array of shape `space.shape`
    """
    x = space.coordinates()[0]
    if name == "zero":
        return np.zeros(space.shape)
    if name == "constant":
        return np.full(space.shape, amplitude + offset)
    if name == "sin":
        return offset + amplitude * np.sin(2.0 * np.pi * mode * x)
    if name == "cos":
        return offset + amplitude * np.cos(2.0 * np.pi * mode * x)
    raise ValueError(f"Unknown profile preset '{name}', expected one of {PROFILE_PRESETS}")
