"""Discrete solution-space norms and the energy report."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from engine.drivers import RoughDriver, driver_norm
from engine.drivers.space import SpaceGrid
from engine.rough_paths import p_variation
from engine.spde.field import Field
from engine.spde.operators import centered_derivatives, spectral_derivatives

logger = logging.getLogger(__name__)

DERIVATIVES = ("spectral", "centered")
MAX_PVAR_POINTS = 513


def _l2_squared(space: SpaceGrid, values: np.ndarray) -> np.ndarray:
    """Δx^dim sum over nodes and components; leading axes are kept."""
    axes = tuple(range(values.ndim - space.dim - 1, values.ndim))
    return space.spacing**space.dim * np.sum(values**2, axis=axes)


def sobolev_squared(space: SpaceGrid, values: np.ndarray, derivative: str = "spectral"):
    """
    (‖u‖²_{L²}, ‖u‖²_{H¹}, ‖u‖²_{H²}) of a field of shape (*space, n).

    ‖u‖²_{H¹} = ‖u‖²_{L²} + ‖∇u‖²_{L²} and ‖u‖²_{H²} = ‖u‖²_{H¹} + ‖Δu‖²_{L²}.
    """
    if derivative not in DERIVATIVES:
        raise ValueError(f"Unknown derivative '{derivative}', expected one of {DERIVATIVES}")
    compute = spectral_derivatives if derivative == "spectral" else centered_derivatives
    gradients, laplacian = compute(space, values)
    l2 = float(_l2_squared(space, values))
    h1 = l2 + sum(float(_l2_squared(space, g)) for g in gradients)
    h2 = h1 + float(_l2_squared(space, laplacian))
    return l2, h1, h2


@dataclass
class NormReport:
    """Norms of a space-time field."""

    linf_l2: float
    linf_h1: float
    l2_h2: float
    pvar_l2: float
    p: float
    derivative: str

    @property
    def energy(self) -> float:
        """‖u‖²_{L∞H¹} + ‖u‖²_{L²H²}."""
        return self.linf_h1**2 + self.l2_h2**2

    def to_dict(self) -> dict:
        record = asdict(self)
        record["energy"] = self.energy
        return record


def norm_profiles(solution: Field, derivative: str = "spectral") -> np.ndarray:
    """Per-time squared norms, shape (n_t + 1, 3): L², H¹, H²."""
    return np.array(
        [sobolev_squared(solution.space, values, derivative) for values in solution.values]
    )


def discrete_norms(
    solution: Field,
    p: float = 2.5,
    derivative: str = "spectral",
    max_pvar_points: int = MAX_PVAR_POINTS,
    time_variation: bool = True,
) -> NormReport:
    """
    Compute (L∞L², L∞H¹, L²H², time p-variation in L²).

    Time integrals use the trapezoid rule on the field's time grid. The time
    p-variation treats u(t_k) as a point of L², on at most `max_pvar_points`
    evenly strided samples.

    Args:
        solution: Space-time field
        p: Exponent of the time variation
        derivative: "spectral" (default) or "centered" differences
        max_pvar_points: Sample cap for the time variation
        time_variation: Skip the time p-variation (reported as NaN) when False

    Returns:
        NormReport
    """
    profiles = norm_profiles(solution, derivative)
    times = solution.times.points
    linf_l2 = math.sqrt(float(np.max(profiles[:, 0])))
    linf_h1 = math.sqrt(float(np.max(profiles[:, 1])))
    l2_h2 = math.sqrt(float(trapezoid(profiles[:, 2], times)))

    if not time_variation:
        return NormReport(linf_l2, linf_h1, l2_h2, math.nan, p, derivative)

    n_t = solution.times.n + 1
    stride = max(1, math.ceil((n_t - 1) / (max_pvar_points - 1)))
    indices = np.arange(0, n_t, stride)
    if indices[-1] != n_t - 1:
        indices = np.append(indices, n_t - 1)
    scale = math.sqrt(solution.space.spacing**solution.space.dim)
    samples = solution.values[indices].reshape(len(indices), -1) * scale
    pvar = p_variation(samples, p)
    if stride > 1:
        logger.debug(f"Time p-variation on every {stride}-th sample ({len(indices)} points)")
    return NormReport(linf_l2, linf_h1, l2_h2, pvar, p, derivative)


@dataclass
class EnergyReport:
    """Energy inequality check ‖u‖²_{L∞H¹} + ‖u‖²_{L²H²} <= C ‖u0‖²_{H¹}."""

    energy: float
    initial_h1_squared: float
    constant: float
    monotone: bool
    driver_norm: Optional[float] = None
    bound: Optional[float] = None
    margin: Optional[float] = None
    passed: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def energy_report(
    solution: Field,
    u0: Optional[np.ndarray] = None,
    driver: Optional[RoughDriver] = None,
    bound: Optional[float] = None,
    derivative: str = "spectral",
) -> EnergyReport:
    """
    Record the energy constant C = energy / ‖u0‖²_{H¹}.

    No constant is asserted unless `bound` is given; `monotone` records
    whether t ↦ ‖u(t)‖²_{H¹} is non-increasing.
    """
    profiles = norm_profiles(solution, derivative)
    integral = float(trapezoid(profiles[:, 2], solution.times.points))
    energy = float(np.max(profiles[:, 1])) + integral
    initial = solution.initial if u0 is None else np.asarray(u0, dtype=float)
    if initial.shape == solution.space.shape:
        initial = initial[..., None]
    initial_h1 = sobolev_squared(solution.space, initial, derivative)[1]
    if initial_h1 > 0:
        constant = energy / initial_h1
    else:
        constant = 0.0 if energy == 0 else math.inf
    h1 = profiles[:, 1]
    monotone = bool(np.all(np.diff(h1) <= 1e-12 * max(1.0, float(np.max(h1)))))

    report = EnergyReport(energy, initial_h1, constant, monotone)
    if driver is not None:
        report.driver_norm = driver_norm(driver)
    if bound is not None:
        report.bound = bound
        report.margin = bound * initial_h1 - energy
        report.passed = report.margin >= 0
    logger.info(f"Energy {energy:.6e}, C={constant:.6e}, monotone={monotone}")
    return report
