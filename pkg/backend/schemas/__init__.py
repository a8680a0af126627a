"""Pydantic schemas for experiment configs and run records."""

from backend.schemas.experiment_schemas import (
    EXPERIMENTS,
    CellResult,
    DriverSpec,
    ExperimentConfig,
    GridSpec,
    LiftSpec,
    ProfileSpec,
    RunRecord,
    ScheduleSpec,
    SolverSpec,
)

__all__ = [
    "EXPERIMENTS",
    "CellResult",
    "DriverSpec",
    "ExperimentConfig",
    "GridSpec",
    "LiftSpec",
    "ProfileSpec",
    "RunRecord",
    "ScheduleSpec",
    "SolverSpec",
]
