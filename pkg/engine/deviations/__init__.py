"""Cameron–Martin machinery, skeleton equation and moderate-deviation diagnostics."""

from engine.deviations.cameron_martin import CameronMartinPath, cm_energy, lift_cm
from engine.deviations.monte_carlo import (
    ExpEquivalenceReport,
    MonteCarloConfig,
    exp_equivalence_mc,
    exponential_moment,
)
from engine.deviations.schedule import PRESETS, LambdaSchedule, ScheduleCheck
from engine.deviations.skeleton import RatePoint, rate_point, solve_skeleton

__all__ = [
    "PRESETS",
    "CameronMartinPath",
    "ExpEquivalenceReport",
    "LambdaSchedule",
    "MonteCarloConfig",
    "RatePoint",
    "ScheduleCheck",
    "cm_energy",
    "exp_equivalence_mc",
    "exponential_moment",
    "lift_cm",
    "rate_point",
    "solve_skeleton",
]
