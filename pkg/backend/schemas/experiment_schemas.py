"""Experiment configuration and run-record schemas."""

from datetime import datetime
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

EXPERIMENTS = (
    "lift-check",
    "solve",
    "clt",
    "ito-vs-strat",
    "wong-zakai",
    "mdp",
    "continuity",
    "suite",
)
EXPERIMENT_ALIASES = {"itovs": "ito-vs-strat", "wz": "wong-zakai"}


def _default_epsilons() -> List[float]:
    return [2.0**-k for k in range(4, 13)]


class GridSpec(BaseModel):
    """Space and time resolution."""

    n_points: int = Field(default=128, ge=4, description="Grid points per spatial axis")
    space_dim: Literal[1, 2] = Field(default=1, description="Spatial dimension")
    dt: float = Field(default=1e-4, gt=0, description="Solver time step")
    horizon: float = Field(default=0.05, gt=0, description="Final time T")

    @model_validator(mode="after")
    def check_steps(self) -> "GridSpec":
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"horizon {self.horizon} is not a multiple of dt {self.dt}")
        return self


class ProfileSpec(BaseModel):
    """Named spatial profile g(x) = offset + amplitude · preset(mode x)."""

    name: Literal["zero", "constant", "sin", "cos"] = Field(default="constant")
    amplitude: float = Field(default=1.0, description="Multiplier")
    mode: int = Field(default=1, ge=0, description="Frequency along the first axis")
    offset: float = Field(default=0.0, description="Constant added after scaling")


class LiftSpec(BaseModel):
    """Direction lift W."""

    kind: Literal["brownian", "linear"] = Field(
        default="brownian", description="Brownian lift or the deterministic path X_t = t"
    )
    seed: Optional[int] = Field(default=None, ge=0, description="Seed; master seed when None")
    refinement: int = Field(default=32, ge=1, description="Fine steps per solver step")
    channels: int = Field(default=1, ge=1, description="Channels m of the lift")
    p: float = Field(default=2.5, ge=2.0, lt=3.0, description="Declared variation exponent")

    @field_validator("refinement")
    @classmethod
    def check_power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"refinement must be a power of two, got {value}")
        return value


class DriverSpec(BaseModel):
    """Spatial profile of the noise and the base driver G."""

    profile: ProfileSpec = Field(default_factory=ProfileSpec)
    base: Literal["zero", "smooth"] = Field(
        default="zero", description="Base driver G: zero or a smooth Young-regular path"
    )
    base_amplitude: float = Field(default=1.0, description="Scale of the smooth base path")


class SolverSpec(BaseModel):
    """Splitting-solver switches."""

    implicit_laplacian: bool = True
    rotation_mode: Literal["exact", "affine"] = "exact"
    include_area: bool = True
    renormalize: bool = True


class ScheduleSpec(BaseModel):
    """ε schedule and the fits and diagnostics run on it."""

    epsilons: List[float] = Field(default_factory=_default_epsilons, min_length=4)
    reference: Literal["tangent", "richardson"] = "tangent"
    min_slope: float = Field(default=0.4, description="Lower bound on the fitted slope")
    slope_band: Optional[Tuple[float, float]] = Field(default=None)
    lambda_preset: Literal["eps^-1/4", "eps^-1/3", "eps^-1/2"] = "eps^-1/4"
    delta: float = Field(default=0.1, ge=0)
    n_samples: int = Field(default=500, ge=100)
    eta: float = Field(default=0.1, ge=0)

    @field_validator("epsilons")
    @classmethod
    def check_decreasing(cls, values: List[float]) -> List[float]:
        if any(v <= 0 for v in values):
            raise ValueError("ε values must be positive")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError("ε values must be strictly decreasing")
        return values


class ExperimentConfig(BaseModel):
    """Complete experiment configuration; every field has a default."""

    experiment: str = Field(default="clt", description=f"One of {EXPERIMENTS}")
    equation: Literal["heat", "reaction-diffusion", "llg"] = "heat"
    initial: ProfileSpec = Field(
        default_factory=lambda: ProfileSpec(name="sin"), description="Initial condition u0"
    )
    grid: GridSpec = Field(default_factory=GridSpec)
    driver: DriverSpec = Field(default_factory=DriverSpec)
    lift: LiftSpec = Field(default_factory=LiftSpec)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    schedule: ScheduleSpec = Field(default_factory=ScheduleSpec)
    seed: int = Field(default=42, ge=0, description="Master seed")
    refinements: List[int] = Field(
        default_factory=lambda: [4, 16, 64, 256], description="Wong-Zakai knot counts"
    )
    directions: int = Field(default=20, ge=1, description="Continuity: number of directions")
    continuity_delta: float = Field(default=0.02, gt=0)
    suite: List[str] = Field(
        default_factory=list, description="Config files run by 'suite'; all experiments if empty"
    )
    output_dir: Optional[str] = Field(default=None, description="Overrides the settings")

    class Config:
        """Pydantic config."""

        extra = "forbid"
        json_schema_extra = {
            "example": {
                "experiment": "clt",
                "equation": "heat",
                "grid": {"n_points": 128, "dt": 1e-4, "horizon": 0.05},
                "driver": {"profile": {"name": "constant"}},
                "lift": {"seed": 7, "refinement": 32},
            }
        }

    @field_validator("experiment")
    @classmethod
    def check_experiment(cls, value: str) -> str:
        value = EXPERIMENT_ALIASES.get(value, value)
        if value not in EXPERIMENTS:
            raise ValueError(f"unknown experiment '{value}', expected one of {EXPERIMENTS}")
        return value

    @property
    def lift_seed(self) -> int:
        return self.seed if self.lift.seed is None else self.lift.seed


class CellResult(BaseModel):
    """One experiment cell."""

    cell: str = Field(..., description="Cell identifier, e.g. 'eps=0.0625'")
    values: Dict[str, Any] = Field(default_factory=dict)
    passed: Optional[bool] = Field(None, description="None for diagnostics without a band")


class RunRecord(BaseModel):
    """Persisted record of one run."""

    config: Dict[str, Any]
    config_hash: str
    tool_version: str
    started_at: datetime = Field(default_factory=datetime.now)
    wall_clock_seconds: float = 0.0
    cells: List[CellResult] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)
    failures: List[str] = Field(default_factory=list)
    passed: bool = True
