"""Discrete spatial operators, drift nonlinearities and their derivatives."""

import logging
from typing import Callable, Dict

import numpy as np
from scipy import fft

from engine.drivers.space import SpaceGrid

logger = logging.getLogger(__name__)


class HeatStep:
    """
    Linear drift sub-step for the discrete Laplacian.

    Implicit mode applies (I - Δt Δ_h)^{-1} through its Fourier symbol;
    explicit mode applies I + Δt Δ_h.
    """

    def __init__(self, space: SpaceGrid, dt: float, implicit: bool = True):
        self.space = space
        self.dt = dt
        self.implicit = implicit
        symbol = space.laplacian_symbol()
        self.multiplier = 1.0 / (1.0 - dt * symbol) if implicit else 1.0 + dt * symbol
        logger.debug(
            f"Heat step: N={space.n_points}, dt={dt}, implicit={implicit}, "
            f"min multiplier {np.min(self.multiplier):.3e}"
        )

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Apply to a field of shape (*space, n)."""
        axes = self.space.axes
        spectrum = fft.fftn(values, axes=axes)
        trailing = (1,) * (values.ndim - self.space.dim)
        spectrum *= self.multiplier.reshape(self.space.shape + trailing)
        return fft.ifftn(spectrum, axes=axes).real


def squared_gradient(space: SpaceGrid, values: np.ndarray) -> np.ndarray:
    """|D u|² summed over axes and components, centered differences."""
    total = np.zeros(space.shape)
    for axis in space.axes:
        total += np.sum(space.centered_derivative(values, axis) ** 2, axis=-1)
    return total


def gradient_pairing(space: SpaceGrid, first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """D u · D v summed over axes and components."""
    total = np.zeros(space.shape)
    for axis in space.axes:
        left = space.centered_derivative(first, axis)
        total += np.sum(left * space.centered_derivative(second, axis), axis=-1)
    return total


def zero_reaction(space: SpaceGrid, values: np.ndarray) -> np.ndarray:
    return np.zeros_like(values)


def cubic_reaction(space: SpaceGrid, values: np.ndarray) -> np.ndarray:
    """u (1 - |u|²)."""
    return values * (1.0 - np.sum(values**2, axis=-1, keepdims=True))


def llg_reaction(space: SpaceGrid, values: np.ndarray) -> np.ndarray:
    """u × Δ_h u + u |D u|²."""
    lap = space.laplacian(values)
    return np.cross(values, lap) + values * squared_gradient(space, values)[..., None]


def zero_reaction_derivative(
    space: SpaceGrid, base: np.ndarray, direction: np.ndarray
) -> np.ndarray:
    return np.zeros_like(direction)


def cubic_reaction_derivative(
    space: SpaceGrid, base: np.ndarray, direction: np.ndarray
) -> np.ndarray:
    """X - X |u|² - 2u (u · X)."""
    norm_sq = np.sum(base**2, axis=-1, keepdims=True)
    pairing = np.sum(base * direction, axis=-1, keepdims=True)
    return direction - direction * norm_sq - 2.0 * base * pairing


def llg_reaction_derivative(
    space: SpaceGrid, base: np.ndarray, direction: np.ndarray
) -> np.ndarray:
    """X × Δ_h u + u × Δ_h X + X |D u|² + 2u (D u · D X)."""
    return (
        np.cross(direction, space.laplacian(base))
        + np.cross(base, space.laplacian(direction))
        + direction * squared_gradient(space, base)[..., None]
        + 2.0 * base * gradient_pairing(space, base, direction)[..., None]
    )


Reaction = Callable[[SpaceGrid, np.ndarray], np.ndarray]
ReactionDerivative = Callable[[SpaceGrid, np.ndarray, np.ndarray], np.ndarray]

REACTIONS: Dict[str, Reaction] = {
    "heat": zero_reaction,
    "reaction-diffusion": cubic_reaction,
    "llg": llg_reaction,
}

REACTION_DERIVATIVES: Dict[str, ReactionDerivative] = {
    "heat": zero_reaction_derivative,
    "reaction-diffusion": cubic_reaction_derivative,
    "llg": llg_reaction_derivative,
}


def spectral_derivatives(space: SpaceGrid, values: np.ndarray):
    """
    Spectral gradient components and Laplacian of a field of shape (*space, n).

    Nyquist modes are dropped from first derivatives.
    """
    axes = space.axes
    spectrum = fft.fftn(values, axes=axes)
    k = space.wavenumbers()
    if space.n_points % 2 == 0:
        k_first = k.copy()
        k_first[space.n_points // 2] = 0.0
    else:
        k_first = k
    extra = (1,) * (values.ndim - space.dim)
    gradients = []
    laplacian_symbol = np.zeros(space.shape)
    for axis in axes:
        shape = [1] * space.dim
        shape[axis] = space.n_points
        gradients.append(
            fft.ifftn(spectrum * (1j * k_first).reshape(tuple(shape) + extra), axes=axes).real
        )
        laplacian_symbol = laplacian_symbol - (k**2).reshape(shape)
    laplacian = fft.ifftn(spectrum * laplacian_symbol.reshape(space.shape + extra), axes=axes).real
    return gradients, laplacian


def centered_derivatives(space: SpaceGrid, values: np.ndarray):
    """Centered-difference gradient components and the Laplacian Δ_h."""
    return [space.centered_derivative(values, axis) for axis in space.axes], space.laplacian(values)
