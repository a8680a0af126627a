"""Tests for the splitting solvers, solution norms and solver-level experiments."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from engine.drivers import (
    ScalarDriver,
    SpaceGrid,
    SphericalDriver,
    make_llg_driver,
    make_scalar_driver,
    sample_profile,
)
from engine.oracles import commuting_heat_exact, ode_reference
from engine.rough_paths import TimeGrid, brownian_lift, ito_lift, piecewise_linear_lift
from engine.spde import (
    BlowUpError,
    Field,
    SolverConfig,
    continuity_sweep,
    discrete_norms,
    energy_report,
    energy_sweep,
    load_field,
    save_field,
    smooth_direction_lifts,
    solve,
    solve_heat,
    solve_llg,
    wong_zakai_sweep,
)


@pytest.fixture
def space():
    return SpaceGrid(32)


@pytest.fixture
def cfg():
    return SolverConfig(dt=1e-4, horizon=0.02)


@pytest.fixture
def u0(space):
    return sample_profile(space, "sin")


def relative_gap(got: np.ndarray, want: np.ndarray) -> float:
    return float(np.max(np.abs(got - want)) / np.max(np.abs(want)))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(rotation_mode="cayley")
    assert SolverConfig(dt=1e-3, horizon=0.05).time_grid().n == 50


def test_heat_with_zero_driver_matches_semigroup(space, cfg, u0):
    driver = ScalarDriver.zero(cfg.time_grid(), space)
    solution = solve_heat(u0, driver, cfg)
    exact = commuting_heat_exact(u0, 0.0, 0.0, cfg.horizon)
    assert relative_gap(solution.final[..., 0], exact) < 1e-2


@pytest.mark.parametrize("calculus", ["stratonovich", "ito"])
def test_commuting_heat_matches_closed_form(space, cfg, u0, calculus):
    """Constant-profile noise commutes with Δ: u(T) = e^{cX_T (- c²T/2)} e^{TΔ} u0."""
    lift = brownian_lift(21, cfg.time_grid(), refinement=16)
    if calculus == "ito":
        lift = ito_lift(lift)
    driver = make_scalar_driver(lift, np.full(space.shape, 1.0), space)
    solution = solve("heat", u0, driver, cfg)
    exact = commuting_heat_exact(u0, 1.0, float(lift.level1[-1, 0]), cfg.horizon, calculus)
    assert relative_gap(solution.final[..., 0], exact) < 1e-2


def test_reaction_diffusion_constant_field_matches_ode(space):
    """A spatially constant field follows u' = u(1 - u²)."""
    cfg = SolverConfig(dt=1e-3, horizon=0.5)
    driver = ScalarDriver.zero(cfg.time_grid(), space)
    solution = solve("reaction-diffusion", np.full(space.shape, 0.5), driver, cfg)
    times, values = ode_reference("cubic", 0.5, cfg.horizon, times=solution.times.points)
    np.testing.assert_allclose(solution.values[:, 0, 0], values, atol=1e-3)
    assert np.ptp(solution.final) < 1e-12


def test_reaction_diffusion_stays_in_unit_interval(space):
    """With no noise, 0 <= u0 <= 1 is preserved by the drift step."""
    cfg = SolverConfig(dt=1e-3, horizon=0.5)
    u0 = sample_profile(space, "sin", amplitude=0.5, offset=0.5)
    assert u0.min() >= 0.0 and u0.max() <= 1.0
    solution = solve("reaction-diffusion", u0, ScalarDriver.zero(cfg.time_grid(), space), cfg)
    assert solution.values.min() >= -1e-12
    assert solution.values.max() <= 1.0 + 1e-12


def unit_field(space: SpaceGrid) -> np.ndarray:
    phase = 2 * np.pi * space.coordinates()[0]
    field = np.stack([0.3 * np.cos(phase), 0.3 * np.sin(phase), np.ones(space.shape)], axis=-1)
    return field / np.linalg.norm(field, axis=-1, keepdims=True)


@pytest.mark.parametrize("rotation_mode", ["exact", "affine"])
def test_llg_stays_on_sphere(rotation_mode):
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=1e-4, horizon=0.005, rotation_mode=rotation_mode)
    lift = brownian_lift(2, cfg.time_grid(), refinement=8, d=3)
    driver = make_llg_driver(lift, np.ones((3,) + space.shape), space)
    solution = solve_llg(unit_field(space), driver, cfg)
    assert solution.diagnostics["max_sphere_deviation"] <= 1e-10
    assert solution.sphere_deviation() <= 1e-10


@pytest.mark.parametrize("rotation_mode", ["exact", "affine"])
def test_llg_north_pole_is_invariant_under_third_axis_noise(rotation_mode):
    """u0 ≡ e₃ with H = (0, 0, h³): rotations about the third axis fix e₃."""
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=1e-4, horizon=0.005, rotation_mode=rotation_mode)
    lift = brownian_lift(4, cfg.time_grid(), refinement=8, d=3)
    profiles = np.zeros((3,) + space.shape)
    profiles[2] = sample_profile(space, "sin", offset=0.5)
    driver = make_llg_driver(lift, profiles, space)
    north = np.zeros(space.shape + (3,))
    north[..., 2] = 1.0
    solution = solve_llg(north, driver, cfg)
    np.testing.assert_allclose(
        solution.values, np.broadcast_to(north, solution.values.shape), atol=1e-12
    )


def test_llg_rejects_off_sphere_initial_condition():
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=1e-4, horizon=0.001)
    driver = SphericalDriver.zero(cfg.time_grid(), space)
    with pytest.raises(ValueError):
        solve_llg(2.0 * unit_field(space), driver, cfg)


def test_mismatched_grids_are_rejected(space, cfg, u0):
    other = ScalarDriver.zero(TimeGrid.from_step(2e-4, cfg.horizon), space)
    with pytest.raises(ValueError):
        solve_heat(u0, other, cfg)
    with pytest.raises(ValueError):
        solve("heat", u0, SphericalDriver.zero(cfg.time_grid(), space), cfg)
    with pytest.raises(ValueError):
        solve("heat", u0, ScalarDriver.zero(cfg.time_grid(), SpaceGrid(16)), cfg)


def test_blow_up_is_reported(space, u0):
    cfg = SolverConfig(dt=1e-4, horizon=0.001, blowup_threshold=1e-3)
    driver = ScalarDriver.zero(cfg.time_grid(), space)
    with pytest.raises(BlowUpError) as info:
        solve_heat(u0, driver, cfg)
    assert info.value.step == 1


def constant_in_time(space: SpaceGrid, horizon: float = 0.5) -> Field:
    grid = TimeGrid.uniform(10, horizon)
    frame = sample_profile(space, "sin")[..., None]
    return Field(space, grid, np.repeat(frame[None], grid.n + 1, axis=0))


def test_discrete_norms_of_a_sine_mode():
    space = SpaceGrid(16)
    report = discrete_norms(constant_in_time(space))
    k2 = (2 * np.pi) ** 2
    assert report.linf_l2 == pytest.approx(math.sqrt(0.5))
    assert report.linf_h1 == pytest.approx(math.sqrt(0.5 * (1 + k2)))
    assert report.l2_h2 == pytest.approx(math.sqrt(0.5 * 0.5 * (1 + k2 + k2**2)))
    assert report.pvar_l2 == pytest.approx(0.0, abs=1e-12)
    assert math.isnan(discrete_norms(constant_in_time(space), time_variation=False).pvar_l2)


def test_centered_norms_are_below_spectral():
    """Centered differences damp the sine mode."""
    space = SpaceGrid(16)
    spectral = discrete_norms(constant_in_time(space))
    centered = discrete_norms(constant_in_time(space), derivative="centered")
    assert centered.linf_h1 < spectral.linf_h1
    with pytest.raises(ValueError):
        discrete_norms(constant_in_time(space), derivative="upwind")


def test_energy_report_for_heat(space, cfg, u0):
    driver = ScalarDriver.zero(cfg.time_grid(), space)
    solution = solve_heat(u0, driver, cfg)
    report = energy_report(solution, bound=10.0)
    assert report.monotone
    assert report.passed
    assert report.constant > 0
    assert energy_report(solution, bound=1e-6).passed is False


def test_field_serialization(tmp_path, space, cfg, u0):
    driver = ScalarDriver.zero(TimeGrid.from_step(1e-4, 1e-3), space)
    solution = solve_heat(u0, driver, SolverConfig(dt=1e-4, horizon=1e-3))
    for name in ("field.csv", "field.h5"):
        loaded = load_field(save_field(solution, tmp_path / name))
        np.testing.assert_array_equal(loaded.values, solution.values)


def test_wong_zakai_full_mesh_reproduces_path():
    """With R equal to the step count the interpolant is the sampled path itself."""
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=1e-3, horizon=0.016)
    report = wong_zakai_sweep(
        sample_profile(space, "sin"),
        sample_profile(space, "constant"),
        space,
        seed=5,
        refinements=[16, 4],
        cfg=cfg,
    )
    assert report.refinements == [4, 16]
    assert report.limit_gaps[-1] == 0.0
    assert len(report.consecutive_gaps) == 1
    assert list(report.to_frame().columns) == ["refinement", "gap_to_next", "gap_to_limit"]


def test_wong_zakai_gaps_decrease_with_the_mesh():
    """Consecutive gaps over R = 4, 16, 64, 256 shrink, averaged over a few paths."""
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=5e-4, horizon=0.128)
    u0 = sample_profile(space, "sin")
    profile = sample_profile(space, "sin", offset=1.0)
    gaps = []
    for seed in range(8):
        report = wong_zakai_sweep(
            u0, profile, space, seed=seed, refinements=[4, 16, 64, 256], cfg=cfg
        )
        assert len(report.consecutive_gaps) == 3
        assert report.limit_gaps[-1] == 0.0
        gaps.append(report.consecutive_gaps)
    mean_gaps = np.mean(gaps, axis=0)
    assert mean_gaps[1] < mean_gaps[0]
    assert mean_gaps[2] < mean_gaps[1]


def test_wong_zakai_rejects_non_dividing_mesh():
    space = SpaceGrid(16)
    with pytest.raises(ValueError):
        wong_zakai_sweep(
            sample_profile(space, "sin"),
            sample_profile(space, "constant"),
            space,
            seed=5,
            refinements=[3],
            cfg=SolverConfig(dt=1e-3, horizon=0.016),
        )


def test_continuity_halving_ratio():
    """The solution gap is linear in small perturbations of the driver."""
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=1e-3, horizon=0.02)
    grid = cfg.time_grid()
    base = make_scalar_driver(
        brownian_lift(3, grid, refinement=8), sample_profile(space, "sin", offset=1.0), space
    )
    directions = smooth_direction_lifts(grid, 2, seed=9)
    report = continuity_sweep(sample_profile(space, "sin"), base, directions, cfg, delta=0.01)
    assert len(report.rows) == 4
    assert all(row.rho > 0 and np.isfinite(row.ratio) for row in report.rows)
    assert report.passed


def test_energy_sweep_table():
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=1e-3, horizon=0.01)
    grid = cfg.time_grid()
    lift = smooth_direction_lifts(grid, 1, seed=1)[0]
    frame = energy_sweep(
        sample_profile(space, "sin"), lift, sample_profile(space, "constant"), space, cfg=cfg
    )
    assert frame["eps"].tolist() == [0.0, 0.25, 0.5, 1.0]
    assert "constant_non_decreasing" in frame.columns
    assert (frame["constant"] > 0).all()


def test_energy_constant_grows_with_the_driver():
    """For X_t = t and a constant profile every noise factor grows with ε, and so does C."""
    space = SpaceGrid(16)
    cfg = SolverConfig(dt=1e-3, horizon=0.01)
    grid = cfg.time_grid()
    frame = energy_sweep(
        sample_profile(space, "sin"),
        piecewise_linear_lift(grid, grid.points),
        sample_profile(space, "constant"),
        space,
        cfg=cfg,
    )
    constants = frame["constant"].to_numpy()
    assert np.all(np.diff(constants) > 0)
    assert bool(frame["constant_non_decreasing"].iloc[0])
