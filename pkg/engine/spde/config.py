"""Configuration for the rough SPDE solvers."""

from dataclasses import dataclass

from engine.rough_paths import TimeGrid

EQUATIONS = ("heat", "reaction-diffusion", "llg")
ROTATION_MODES = ("exact", "affine")


@dataclass
class SolverConfig:
    """Configuration for drift-then-noise splitting solvers."""

    # Time stepping
    dt: float = 1e-4
    horizon: float = 0.05

    # Drift sub-step
    implicit_laplacian: bool = True

    # LLG noise sub-step
    rotation_mode: str = "exact"  # exact | affine
    include_area: bool = True  # Lévy-area generator in the exact rotation
    renormalize: bool = True
    sphere_warning: float = 1e-6

    # Abort threshold on max |u|
    blowup_threshold: float = 1e8

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"Time step must be positive, got {self.dt}")
        if self.horizon <= 0:
            raise ValueError(f"Horizon must be positive, got {self.horizon}")
        if self.rotation_mode not in ROTATION_MODES:
            raise ValueError(
                f"Unknown rotation mode '{self.rotation_mode}', expected one of {ROTATION_MODES}"
            )

    def time_grid(self) -> TimeGrid:
        """Uniform solver grid with step dt on [0, horizon]."""
        return TimeGrid.from_step(self.dt, self.horizon)

    def to_dict(self) -> dict:
        """Convert config to dictionary."""
        return {
            "dt": self.dt,
            "horizon": self.horizon,
            "implicit_laplacian": self.implicit_laplacian,
            "rotation_mode": self.rotation_mode,
            "include_area": self.include_area,
            "renormalize": self.renormalize,
            "sphere_warning": self.sphere_warning,
            "blowup_threshold": self.blowup_threshold,
        }
