"""Tests for spatial grids, rough drivers, perturbed drivers and the driver metric."""

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
    antisymmetric,
    axial_vector,
    crossed_maps,
    crossed_step_operators,
    dilate_driver,
    driver_distance,
    driver_norm,
    load_driver,
    make_llg_driver,
    make_scalar_driver,
    perturbed_driver,
    sample_profile,
    save_driver,
)
from engine.rough_paths import TimeGrid, brownian_lift, piecewise_linear_lift


@pytest.fixture
def space():
    return SpaceGrid(16)


@pytest.fixture
def grid():
    return TimeGrid.uniform(12, 0.12)


@pytest.fixture
def scalar_driver(space, grid):
    lift = brownian_lift(1, grid, refinement=8)
    return make_scalar_driver(lift, sample_profile(space, "sin", offset=1.0), space)


def test_space_grid_validation():
    with pytest.raises(ValueError):
        SpaceGrid(3)
    with pytest.raises(ValueError):
        SpaceGrid(8, dim=3)
    assert SpaceGrid(8, dim=2).shape == (8, 8)


@pytest.mark.parametrize("dim", [1, 2])
def test_laplacian_symbol_matches_stencil(dim):
    """The Fourier symbol diagonalizes the periodic second difference."""
    space = SpaceGrid(8, dim)
    field = np.random.default_rng(0).standard_normal(space.shape)
    spectral = np.fft.ifftn(space.laplacian_symbol() * np.fft.fftn(field)).real
    np.testing.assert_allclose(space.laplacian(field), spectral, atol=1e-9)


def test_sample_profile(space):
    assert np.all(sample_profile(space, "constant", amplitude=2.0, offset=0.5) == 2.5)
    assert np.all(sample_profile(space, "zero") == 0.0)
    sine = sample_profile(space, "sin", mode=2)
    assert sine[0] == 0.0
    assert np.max(np.abs(sine)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sample_profile(space, "gaussian")


def test_antisymmetric_and_axial_vector():
    rng = np.random.default_rng(2)
    h, v = rng.standard_normal(3), rng.standard_normal(3)
    matrix = antisymmetric(h)
    np.testing.assert_allclose(matrix, -matrix.T)
    np.testing.assert_allclose(matrix @ v, np.cross(v, h))
    np.testing.assert_allclose(axial_vector(matrix), -h)


def test_constant_profile_scalar_driver(space, grid):
    """(cX, c²𝕏) for a constant profile c."""
    lift = brownian_lift(4, grid, refinement=4)
    driver = make_scalar_driver(lift, np.full(space.shape, 1.5), space)
    first, second = driver.levels(2, 9)
    x, xx = lift.increments(2, 9)
    np.testing.assert_allclose(first, 1.5 * x[0])
    np.testing.assert_allclose(second, 2.25 * xx[0, 0])
    assert driver.step_levels[0].shape == (grid.n,) + space.shape


def test_scalar_driver_chen(scalar_driver):
    assert scalar_driver.chen_defect < 1e-10


def test_spherical_driver_chen_and_antisymmetry(space, grid):
    lift = brownian_lift(6, grid, refinement=8, d=3)
    profiles = np.stack([sample_profile(space, "cos", offset=1.0)] * 3)
    driver = make_llg_driver(lift, profiles, space)
    first, second = driver.operators(0, grid.n)
    np.testing.assert_allclose(first, -np.swapaxes(first, -1, -2), atol=1e-14)
    assert first.shape == space.shape + (3, 3)
    assert driver.chen_defect < 1e-10


def test_llg_driver_needs_three_channels(space, grid):
    lift = brownian_lift(6, grid, refinement=4, d=2)
    with pytest.raises(ValueError):
        make_llg_driver(lift, np.ones((3,) + space.shape), space)


def test_coefficient_shape_is_checked(space, grid):
    lift = brownian_lift(6, grid, refinement=4)
    with pytest.raises(ValueError):
        ScalarDriver(lift, space, np.ones((1, 2) + space.shape))


def test_driver_distance_properties(scalar_driver, space, grid):
    zero = ScalarDriver.zero(grid, space)
    assert driver_distance(scalar_driver, scalar_driver) == 0.0
    assert driver_norm(zero) == 0.0
    norm = driver_norm(scalar_driver)
    assert norm > 0
    assert driver_distance(scalar_driver, zero) == pytest.approx(norm, rel=1e-12)
    assert driver_norm(dilate_driver(scalar_driver, 0.5)) < norm


def random_smooth_driver(rng: np.random.Generator, space, grid):
    t = grid.points
    coefficients = rng.standard_normal((2, 3))
    path = sum(
        a * np.sin(2 * np.pi * (k + 1) * t / grid.horizon)
        + b * np.cos(2 * np.pi * (k + 1) * t / grid.horizon)
        for k, (a, b) in enumerate(coefficients.T)
    )
    profile = sample_profile(space, "cos", amplitude=rng.uniform(0.2, 1.0), offset=1.0)
    return make_scalar_driver(piecewise_linear_lift(grid, path), profile, space)


def test_driver_distance_triangle_inequality(space, grid):
    rng = np.random.default_rng(17)
    for _ in range(20):
        first, second, third = (random_smooth_driver(rng, space, grid) for _ in range(3))
        direct = driver_distance(first, third)
        through = driver_distance(first, second) + driver_distance(second, third)
        assert direct <= through * (1 + 1e-12)
        assert driver_distance(first, second) == pytest.approx(
            driver_distance(second, first), rel=1e-12
        )


def test_perturbed_driver_from_zero_base(scalar_driver, space, grid):
    """{0 + τ_ε W} is τ_ε W."""
    zero = ScalarDriver.zero(grid, space)
    perturbed = perturbed_driver(zero, scalar_driver, 0.25)
    expected = scalar_driver.dilated(0.25)
    for got, want in zip(perturbed.step_levels, expected.step_levels):
        np.testing.assert_allclose(got, want, atol=1e-14)


def test_perturbed_driver_requires_crossed_maps(scalar_driver):
    with pytest.raises(ValueError):
        perturbed_driver(scalar_driver, scalar_driver, 0.1)


def test_crossed_step_operators_are_the_linear_term(space, grid):
    """Level 2 of {G + τ_ε W} is 𝔾 + ε·mixed + ε²𝕎 step by step."""
    base_values = 0.3 * np.sin(2 * np.pi * grid.points / grid.horizon)
    base = make_scalar_driver(
        piecewise_linear_lift(grid, base_values), sample_profile(space, "cos"), space
    )
    direction = make_scalar_driver(
        brownian_lift(8, grid, refinement=8), sample_profile(space, "sin", offset=1.0), space
    )
    forward, backward = crossed_maps(base.lift, direction.lift, base_exponent=1.0)
    eps = 0.125
    perturbed = perturbed_driver(base, direction, eps, forward, backward)
    linear = (
        perturbed.step_levels[1] - base.step_levels[1] - eps**2 * direction.step_levels[1]
    ) / eps
    mixed = crossed_step_operators(base, direction, forward, backward)
    np.testing.assert_allclose(linear, mixed, atol=1e-10)
    assert perturbed.chen_defect < 1e-10


def test_driver_serialization(tmp_path, scalar_driver):
    path = save_driver(scalar_driver, tmp_path / "driver.h5")
    loaded = load_driver(path)
    assert isinstance(loaded, ScalarDriver)
    np.testing.assert_array_equal(loaded.coefficients, scalar_driver.coefficients)
    np.testing.assert_array_equal(loaded.lift.level2, scalar_driver.lift.level2)


def test_zero_spherical_driver(space, grid):
    zero = SphericalDriver.zero(grid, space)
    first, second = zero.step_levels
    assert not np.any(first) and not np.any(second)
