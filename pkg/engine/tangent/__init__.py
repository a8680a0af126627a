"""Tangent equation, pathwise CLT experiments and the product driver."""

from engine.tangent.clt import (
    ConvergenceReport,
    clt_experiment,
    energy_error,
    ito_solver,
    ito_vs_strat_experiment,
    richardson_limit,
)
from engine.tangent.config import TangentConfig
from engine.tangent.product import ProductDriver, product_gamma
from engine.tangent.tangent import TangentSolver, solve_tangent

__all__ = [
    "ConvergenceReport",
    "ProductDriver",
    "TangentConfig",
    "TangentSolver",
    "clt_experiment",
    "energy_error",
    "ito_solver",
    "ito_vs_strat_experiment",
    "product_gamma",
    "richardson_limit",
    "solve_tangent",
]
