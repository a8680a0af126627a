"""Tensor product of two rough drivers acting on n_A·n_B dimensional fields."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from engine.drivers import RoughDriver, driver_chen_defect
from engine.rough_paths import TimeGrid

logger = logging.getLogger(__name__)


def kron(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Pointwise Kronecker product of (..., a, a) and (..., b, b) matrices."""
    product = np.einsum("...ij,...kl->...ikjl", first, second)
    a, b = first.shape[-1], second.shape[-1]
    return product.reshape(product.shape[:-4] + (a * b, a * b))


@dataclass(frozen=True, eq=False)
class ProductDriver:
    """
    Γ = A⊗1 + 1⊗B and 𝚪 = 𝔸⊗1 + A⊗B + 1⊗𝔹.

    Exposes the operator view used by `driver_chen_defect`.
    """

    first: RoughDriver
    second: RoughDriver

    def __post_init__(self):
        self.first.grid.require_same(self.second.grid, "product driver time grids")
        if self.first.space != self.second.space:
            raise ValueError(
                f"Product drivers live on different spaces: "
                f"{self.first.space} vs {self.second.space}"
            )

    @property
    def grid(self) -> TimeGrid:
        return self.first.grid

    @property
    def space(self):
        return self.first.space

    @property
    def target_dim(self) -> int:
        return self.first.target_dim * self.second.target_dim

    def operators(self, s, t) -> Tuple[np.ndarray, np.ndarray]:
        a1, a2 = self.first.operators(s, t)
        b1, b2 = self.second.operators(s, t)
        id_a = np.broadcast_to(np.eye(a1.shape[-1]), a1.shape)
        id_b = np.broadcast_to(np.eye(b1.shape[-1]), b1.shape)
        gamma = kron(a1, id_b) + kron(id_a, b1)
        gamma2 = kron(a2, id_b) + kron(a1, b1) + kron(id_a, b2)
        return gamma, gamma2


def product_gamma(first: RoughDriver, second: RoughDriver) -> Tuple[ProductDriver, float]:
    """
    Assemble the product driver of A and B and its operator Chen defect.

    Raises:
        ValueError: On mismatched grids or spaces
    """
    driver = ProductDriver(first, second)
    defect = driver_chen_defect(driver)
    logger.info(
        f"Product driver: n={driver.target_dim}, steps={driver.grid.n}, "
        f"Chen defect {defect:.3e}"
    )
    return driver, defect
