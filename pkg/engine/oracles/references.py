"""
Independent reference values for tests.

Nothing here imports the engine modules these references are compared with.
"""

import itertools
import logging
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

logger = logging.getLogger(__name__)

MAX_BRUTEFORCE_POINTS = 14
CALCULI = ("stratonovich", "ito")


def pvar_bruteforce(samples: np.ndarray, p: float) -> float:
    """
    p-variation by enumerating every partition of the sample points.

    Args:
        samples: Path values, shape (n,) or (n, d) with n <= 14
        p: Exponent

    Returns:
        max over partitions of (sum |x_v - x_u|^p)^(1/p)
    """
    points = np.asarray(samples, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if n > MAX_BRUTEFORCE_POINTS:
        raise ValueError(
            f"Brute-force p-variation supports at most {MAX_BRUTEFORCE_POINTS} points, got {n}"
        )
    if n < 2:
        raise ValueError(f"p-variation needs at least 2 samples, got {n}")
    best = 0.0
    interior = range(1, n - 1)
    for size in range(n - 1):
        for chosen in itertools.combinations(interior, size):
            nodes = (0,) + chosen + (n - 1,)
            total = 0.0
            for u, v in zip(nodes, nodes[1:]):
                total += float(np.sqrt(np.sum((points[v] - points[u]) ** 2))) ** p
            best = max(best, total)
    return best ** (1.0 / p)


def trapezoid_iterated(integrand: np.ndarray, integrator: np.ndarray) -> float:
    """∫ f dg over the whole grid by the trapezoid rule, for scalar samples."""
    f = np.asarray(integrand, dtype=float)
    g = np.asarray(integrator, dtype=float)
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(g)))


def _continuous_heat(u0: np.ndarray, t: float) -> np.ndarray:
    spectrum = np.fft.fftn(u0)
    symbol = np.zeros(u0.shape)
    for axis, size in enumerate(u0.shape):
        k = 2.0 * np.pi * np.fft.fftfreq(size, d=1.0 / size)
        shape = [1] * u0.ndim
        shape[axis] = size
        symbol = symbol - (k**2).reshape(shape)
    return np.fft.ifftn(spectrum * np.exp(t * symbol)).real


def commuting_heat_exact(
    u0: np.ndarray,
    profile: Union[float, np.ndarray],
    increment: float,
    t: float,
    mode: str = "stratonovich",
) -> np.ndarray:
    """
    Closed-form heat solution with constant-profile scalar noise.

    Stratonovich: e^{c X_{0,t}} e^{tΔ} u0. Itô: e^{c X_{0,t} - c² t / 2} e^{tΔ} u0.
    The heat semigroup acts exactly on the grid's Fourier modes on the unit torus.

    Args:
        u0: Grid field on the unit torus (1-D or 2-D)
        profile: Constant c, or a constant array
        increment: X_{0,t}
        t: Time
        mode: "stratonovich" or "ito"
    """
    if mode not in CALCULI:
        raise ValueError(f"Unknown calculus '{mode}', expected one of {CALCULI}")
    values = np.asarray(profile, dtype=float)
    if values.size > 1 and np.ptp(values) > 0:
        raise ValueError("Closed form holds only for a constant profile")
    c = float(values.flat[0])
    exponent = c * increment
    if mode == "ito":
        exponent -= 0.5 * c**2 * t
    return np.exp(exponent) * _continuous_heat(np.asarray(u0, dtype=float), t)


ODE_RIGHT_HAND_SIDES: Dict[str, Callable[[float, np.ndarray], np.ndarray]] = {
    "cubic": lambda t, y: y * (1.0 - y**2),
    "linear": lambda t, y: y,
    "zero": lambda t, y: np.zeros_like(y),
}


def ode_reference(
    rhs: str,
    y0: float,
    horizon: float,
    tolerance: float = 1e-12,
    max_step: float = np.inf,
    times: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Reference trajectory of a scalar reaction ODE with DOP853.

    Args:
        rhs: "cubic" (u(1 - u²)), "linear" or "zero"
        y0: Initial value
        horizon: Final time
        tolerance: Relative and absolute tolerance
        max_step: Step cap, halved in self-consistency checks
        times: Output times; the integrator's own steps when None

    Returns:
        Tuple of (times, values)
    """
    if rhs not in ODE_RIGHT_HAND_SIDES:
        raise ValueError(f"Unknown right-hand side '{rhs}', expected {list(ODE_RIGHT_HAND_SIDES)}")
    result = solve_ivp(
        ODE_RIGHT_HAND_SIDES[rhs],
        (0.0, horizon),
        [float(y0)],
        method="DOP853",
        rtol=tolerance,
        atol=tolerance,
        max_step=max_step,
        t_eval=times,
    )
    if not result.success:
        raise ValueError(f"ODE reference failed: {result.message}")
    logger.debug(f"ODE reference '{rhs}': {result.t.size} output points, {result.nfev} evaluations")
    return result.t, result.y[0]
