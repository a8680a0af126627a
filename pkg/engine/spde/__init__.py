"""Rough-driver SPDE solvers: heat, reaction-diffusion and LLG."""

from engine.spde.config import EQUATIONS, SolverConfig
from engine.spde.experiments import (
    ContinuityReport,
    WongZakaiReport,
    continuity_sweep,
    energy_sweep,
    smooth_direction_lifts,
    sup_l2_gap,
    wong_zakai_sweep,
)
from engine.spde.field import Field, load_field, save_field
from engine.spde.norms import (
    EnergyReport,
    NormReport,
    discrete_norms,
    energy_report,
    norm_profiles,
)
from engine.spde.solvers import (
    BlowUpError,
    SplittingSolver,
    solve,
    solve_heat,
    solve_llg,
    solve_reaction_diffusion,
)

__all__ = [
    "EQUATIONS",
    "BlowUpError",
    "ContinuityReport",
    "EnergyReport",
    "Field",
    "NormReport",
    "SolverConfig",
    "SplittingSolver",
    "WongZakaiReport",
    "continuity_sweep",
    "discrete_norms",
    "energy_report",
    "energy_sweep",
    "load_field",
    "norm_profiles",
    "save_field",
    "smooth_direction_lifts",
    "solve",
    "solve_heat",
    "solve_llg",
    "solve_reaction_diffusion",
    "sup_l2_gap",
    "wong_zakai_sweep",
]
