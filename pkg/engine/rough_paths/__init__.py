"""Discrete rough paths: lifts, diagnostics, variation norms and crossed integrals."""

from engine.rough_paths.brownian import brownian_lift, brownian_path, derive_seed
from engine.rough_paths.grid import TimeGrid
from engine.rough_paths.integrals import (
    LiftIncrement,
    increment,
    joint_lift,
    joint_lift_young,
    sum_lifts,
    young_cross,
)
from engine.rough_paths.lift import (
    PathLift,
    TwoIndexMap,
    chen_defect,
    dilate,
    geometricity_defect,
    ito_lift,
    piecewise_linear_lift,
)
from engine.rough_paths.serialization import load_lift, save_lift
from engine.rough_paths.variation import (
    Control,
    homogeneous_norm,
    p_variation,
    pvar_control,
    rough_path_distance,
    two_index_p_variation,
)

__all__ = [
    "Control",
    "LiftIncrement",
    "PathLift",
    "TimeGrid",
    "TwoIndexMap",
    "brownian_lift",
    "brownian_path",
    "chen_defect",
    "derive_seed",
    "dilate",
    "geometricity_defect",
    "homogeneous_norm",
    "increment",
    "ito_lift",
    "joint_lift",
    "joint_lift_young",
    "load_lift",
    "p_variation",
    "piecewise_linear_lift",
    "pvar_control",
    "rough_path_distance",
    "save_lift",
    "sum_lifts",
    "two_index_p_variation",
    "young_cross",
]
