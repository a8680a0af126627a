"""
Pathwise CLT experiments.

For a fixed base driver G and direction W, the rescaled fluctuation
X^ε = (Φ({G + τ_√ε W}) - Φ(G)) / √ε is compared with the tangent solution
X = DΦ[G](W). The error e(ε) = sup_t ‖X^ε - X‖²_{H¹} + ∫ ‖X^ε - X‖²_{H²}
is fitted against ε on a log-log scale.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from engine.drivers import RoughDriver, ScalarDriver, perturbed_driver
from engine.rough_paths import dilate, ito_lift
from engine.spde.config import SolverConfig
from engine.spde.experiments import sup_l2_gap
from engine.spde.field import Field
from engine.spde.norms import discrete_norms
from engine.spde.solvers import BlowUpError, SplittingSolver
from engine.tangent.config import TangentConfig
from engine.tangent.tangent import solve_tangent

logger = logging.getLogger(__name__)

MIN_SCHEDULE = 4
RATIO_EXPONENT = 0.4
RATIO_THRESHOLD = 1e-2
CONFIDENCE = 0.95


def energy_error(first: Field, second: Field) -> float:
    """Squared-energy error sup_t ‖u - v‖²_{H¹} + ∫ ‖u - v‖²_{H²}."""
    return discrete_norms(first - second, time_variation=False).energy


@dataclass
class ConvergenceReport:
    """Errors along an ε schedule and their log-log fit."""

    epsilons: List[float]
    errors: List[float]
    metric: str = "energy"
    reference: str = "tangent"
    included: List[bool] = field(default_factory=list)
    floored: List[bool] = field(default_factory=list)
    failures: List[Optional[str]] = field(default_factory=list)
    slope: float = math.nan
    intercept: float = math.nan
    residual: float = math.nan
    stderr: float = math.nan
    slope_interval: Tuple[float, float] = (math.nan, math.nan)
    min_slope: float = 0.4
    slope_band: Optional[Tuple[float, float]] = None
    degenerate: bool = False
    seed: Optional[int] = None

    def __post_init__(self):
        n = len(self.epsilons)
        if not self.included:
            self.included = [True] * n
        if not self.floored:
            self.floored = [False] * n
        if not self.failures:
            self.failures = [None] * n

    @property
    def failed(self) -> bool:
        return any(f is not None for f in self.failures)

    @property
    def in_band(self) -> bool:
        if self.slope_band is None:
            return True
        low, high = self.slope_band
        return low <= self.slope <= high

    @property
    def passed(self) -> bool:
        if self.degenerate or self.failed or not math.isfinite(self.slope):
            return False
        return self.slope >= self.min_slope and self.in_band

    def ratio_check(
        self, exponent: float = RATIO_EXPONENT, threshold: float = RATIO_THRESHOLD
    ) -> bool:
        """e(ε₂)/e(ε₁) <= (ε₂/ε₁)^exponent for consecutive fitted points under `threshold`."""
        points = [
            (eps, err)
            for eps, err, use in zip(self.epsilons, self.errors, self.included)
            if use and eps <= threshold and err > 0
        ]
        return all(
            later[1] / earlier[1] <= (later[0] / earlier[0]) ** exponent
            for earlier, later in zip(points, points[1:])
        )

    def fit(self) -> "ConvergenceReport":
        """Mark the discretization floor and fit log e against log ε."""
        errors = np.asarray(self.errors, dtype=float)
        usable = [
            bool(f is None and np.isfinite(e) and e > 0) for f, e in zip(self.failures, errors)
        ]
        self.floored = [False] * len(errors)
        previous = None
        for i, err in enumerate(errors):
            if not usable[i]:
                continue
            if previous is not None and (self.floored[previous] or err >= errors[previous]):
                self.floored[i] = True
                logger.debug(f"Error floor at eps={self.epsilons[i]:.3e}: e={err:.3e}")
            previous = i
        reserved = self._reference_points()
        self.included = [
            bool(u and not f and i not in reserved)
            for i, (u, f) in enumerate(zip(usable, self.floored))
        ]

        mask = np.asarray(self.included)
        if mask.sum() < 2:
            self.degenerate = True
            logger.warning(
                f"Degenerate convergence input: {int(mask.sum())} usable point(s) of "
                f"{len(errors)}, slope undefined"
            )
            return self

        x = np.log(np.asarray(self.epsilons)[mask])
        y = np.log(errors[mask])
        result = stats.linregress(x, y)
        self.slope = float(result.slope)
        self.intercept = float(result.intercept)
        self.residual = float(np.sqrt(np.mean((y - (result.intercept + result.slope * x)) ** 2)))
        self.stderr = float(result.stderr)
        dof = int(mask.sum()) - 2
        if dof > 0:
            half = float(stats.t.ppf(0.5 + CONFIDENCE / 2, dof)) * self.stderr
            self.slope_interval = (self.slope - half, self.slope + half)
        else:
            self.slope_interval = (self.slope, self.slope)
        logger.info(
            f"Fitted slope {self.slope:.4f} (stderr {self.stderr:.2e}) on "
            f"{int(mask.sum())} points, residual {self.residual:.3e}"
        )
        return self

    def _reference_points(self) -> Tuple[int, ...]:
        """Indices of the two smallest ε, consumed by the Richardson limit."""
        if self.reference != "richardson":
            return ()
        n = len(self.epsilons)
        return (n - 2, n - 1)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "eps": self.epsilons,
                "error": self.errors,
                "included_in_fit": self.included,
                "floored": self.floored,
                "failure": [f or "" for f in self.failures],
            }
        )

    def plot_frame(self) -> pd.DataFrame:
        """Two-column log-log table of the fitted points."""
        mask = np.asarray(self.included, dtype=bool)
        return pd.DataFrame(
            {
                "log_eps": np.log(np.asarray(self.epsilons)[mask]),
                "log_error": np.log(np.asarray(self.errors)[mask]),
            }
        )

    def to_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "errors": [float(e) for e in self.errors],
            "metric": self.metric,
            "reference": self.reference,
            "included": list(self.included),
            "floored": list(self.floored),
            "failures": list(self.failures),
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "stderr": self.stderr,
            "slope_interval": list(self.slope_interval),
            "min_slope": self.min_slope,
            "slope_band": list(self.slope_band) if self.slope_band else None,
            "degenerate": self.degenerate,
            "ratio_check": self.ratio_check(),
            "passed": self.passed,
            "seed": self.seed,
        }


def _check_schedule(epsilons: Sequence[float]) -> None:
    if len(epsilons) < MIN_SCHEDULE:
        raise ValueError(f"ε schedule needs at least {MIN_SCHEDULE} values, got {len(epsilons)}")


def richardson_limit(first: Field, second: Field, eps_first: float, eps_second: float) -> Field:
    """
    Limit of X^ε under the ansatz X^ε = X + c√ε from two schedule points.

    X ≈ (√ε₁ X^{ε₂} - √ε₂ X^{ε₁}) / (√ε₁ - √ε₂).
    """
    first.require_compatible(second)
    a, b = math.sqrt(eps_first), math.sqrt(eps_second)
    values = (a * second.values - b * first.values) / (a - b)
    return Field(first.space, first.times, values)


def base_solution_for(cfg: TangentConfig) -> Tuple[SplittingSolver, Field]:
    """Solver and Φ(G) for a tangent configuration."""
    solver = SplittingSolver(cfg.equation, cfg.base.space, cfg.solver)
    return solver, solver.solve(cfg.u0, cfg.base)


def driver_of(cfg: TangentConfig, eps: float) -> RoughDriver:
    """{G + τ_√ε W} for one schedule point."""
    return perturbed_driver(
        cfg.base, cfg.direction, math.sqrt(eps), cfg.base_direction, cfg.direction_base
    )


def _clt_cell(
    cfg: TangentConfig, base_solution: Field, eps: float
) -> Tuple[Optional[Field], Optional[str]]:
    """X^ε for one schedule point, or the failure message of the cell."""
    scale = math.sqrt(eps)
    try:
        solution = SplittingSolver(cfg.equation, cfg.base.space, cfg.solver).solve(
            cfg.u0, driver_of(cfg, eps)
        )
    except (BlowUpError, ValueError) as e:
        logger.warning(f"CLT cell eps={eps:.3e} failed: {str(e)}")
        return None, f"eps={eps:.6g}: {str(e)}"
    return (solution - base_solution).scaled(1.0 / scale), None


def clt_experiment(cfg: TangentConfig, workers: int = 1) -> ConvergenceReport:
    """
    Run the √ε CLT sweep for one fixed base and direction.

    Each cell solves with {G + τ_√ε W} built by `perturbed_driver`; a failing
    cell is recorded by its ε and excluded from the fit. Cells are independent
    and are aggregated in schedule order, so `workers` does not change results.

    Args:
        cfg: Tangent configuration with an ε schedule of length >= 4
        workers: Process count for the ε cells (1 runs in-process)

    Returns:
        Fitted ConvergenceReport
    """
    _check_schedule(cfg.epsilons)
    _, base_solution = base_solution_for(cfg)
    logger.info(
        f"CLT experiment ({cfg.equation}, reference={cfg.reference}): "
        f"{len(cfg.epsilons)} values of eps in [{cfg.epsilons[-1]:.3e}, {cfg.epsilons[0]:.3e}]"
    )

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            cells = list(
                executor.map(
                    _clt_cell,
                    [cfg] * len(cfg.epsilons),
                    [base_solution] * len(cfg.epsilons),
                    cfg.epsilons,
                )
            )
    else:
        cells = [_clt_cell(cfg, base_solution, eps) for eps in cfg.epsilons]
    fluctuations = [cell[0] for cell in cells]
    failures = [cell[1] for cell in cells]
    if cfg.reference == "richardson":
        first, second = fluctuations[-2], fluctuations[-1]
        if first is None or second is None:
            raise ValueError("Richardson reference needs the two smallest ε cells to succeed")
        reference = richardson_limit(first, second, cfg.epsilons[-2], cfg.epsilons[-1])
    else:
        reference = solve_tangent(base_solution, cfg)

    errors = [
        energy_error(fluctuation, reference) if fluctuation is not None else math.nan
        for fluctuation in fluctuations
    ]
    for eps, err in zip(cfg.epsilons, errors):
        logger.debug(f"eps={eps:.3e}: e={err:.6e}")
    report = ConvergenceReport(
        list(cfg.epsilons),
        errors,
        metric="energy",
        reference=cfg.reference,
        failures=failures,
        min_slope=cfg.min_slope,
        slope_band=cfg.slope_band,
        seed=cfg.seed,
    )
    return report.fit()


def ito_solver(
    u0: np.ndarray,
    driver: ScalarDriver,
    eps: float,
    cfg: Optional[SolverConfig] = None,
    equation: str = "heat",
) -> Field:
    """
    Solve with Itô noise of size √ε.

    The driver's lift is replaced by its Itô lift 𝕏 - ½(t - s)Id, dilated by
    √ε, so the noise sub-step reads (1 + √ε W + ε 𝕎 - (ε/2) g² Δt) u*: the
    Euler–Maruyama step with its quadratic correction.
    """
    if not isinstance(driver, ScalarDriver):
        raise ValueError(f"Itô solver supports scalar drivers, got {driver.kind}")
    if eps < 0:
        raise ValueError(f"ε must be non-negative, got {eps}")
    lift = dilate(ito_lift(driver.lift), math.sqrt(eps))
    return SplittingSolver(equation, driver.space, cfg).solve(u0, driver.with_lift(lift))


def ito_vs_strat_experiment(cfg: TangentConfig) -> ConvergenceReport:
    """
    ‖X^{ε,Itô} - X^{ε,Strat}‖_{L∞L²} along the ε schedule around G = 0.

    Both fluctuations share Φ(0) and the direction lift; the gap is fitted
    against ε like the CLT error.
    """
    _check_schedule(cfg.epsilons)
    if not cfg.base_is_zero:
        raise ValueError("Itô/Stratonovich comparison runs around the zero base driver")
    if not isinstance(cfg.direction, ScalarDriver):
        raise ValueError(
            f"Itô/Stratonovich comparison needs a scalar driver, got {cfg.direction.kind}"
        )
    solver = SplittingSolver(cfg.equation, cfg.base.space, cfg.solver)
    logger.info(f"Ito vs Stratonovich ({cfg.equation}): {len(cfg.epsilons)} values of eps")

    gaps, failures = [], []
    for eps in cfg.epsilons:
        scale = math.sqrt(eps)
        try:
            strat = solver.solve(cfg.u0, cfg.direction.dilated(scale))
            ito = ito_solver(cfg.u0, cfg.direction, eps, cfg.solver, cfg.equation)
            gaps.append(sup_l2_gap(ito, strat) / scale)
            failures.append(None)
        except (BlowUpError, ValueError) as e:
            logger.warning(f"Ito/Strat cell eps={eps:.3e} failed: {str(e)}")
            gaps.append(math.nan)
            failures.append(f"eps={eps:.6g}: {str(e)}")

    report = ConvergenceReport(
        list(cfg.epsilons),
        gaps,
        metric="sup_l2",
        failures=failures,
        min_slope=cfg.min_slope,
        slope_band=cfg.slope_band,
        seed=cfg.seed,
    )
    return report.fit()

