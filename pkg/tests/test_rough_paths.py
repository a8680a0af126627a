"""Tests for discrete lifts, Brownian sampling, variation norms and crossed integrals."""

import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from engine.oracles import pvar_bruteforce, trapezoid_iterated
from engine.rough_paths import (
    PathLift,
    TimeGrid,
    brownian_lift,
    brownian_path,
    chen_defect,
    derive_seed,
    dilate,
    geometricity_defect,
    homogeneous_norm,
    increment,
    ito_lift,
    joint_lift_young,
    load_lift,
    p_variation,
    piecewise_linear_lift,
    pvar_control,
    rough_path_distance,
    save_lift,
    sum_lifts,
    two_index_p_variation,
    young_cross,
)
from engine.rough_paths.serialization import read_table, write_table


@pytest.fixture
def grid():
    return TimeGrid.uniform(40, 1.0)


@pytest.fixture
def smooth_values(grid):
    t = grid.points
    return np.stack([np.sin(2 * np.pi * t), t**2], axis=1)


def test_time_grid_validation():
    """Grids start at zero and increase strictly."""
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.1, 0.5]))
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 0.5, 0.5]))
    with pytest.raises(ValueError):
        TimeGrid.from_step(0.3, 1.0)
    grid = TimeGrid.from_step(0.25, 1.0)
    assert grid.n == 4
    assert grid.dt == pytest.approx(0.25)
    assert grid.refine(4).n == 16


def test_piecewise_linear_lift_is_geometric(grid, smooth_values):
    """Exact iterated integrals of a linear interpolant satisfy Chen and geometricity."""
    lift = piecewise_linear_lift(grid, smooth_values)
    assert chen_defect(lift) < 1e-12
    assert geometricity_defect(lift) < 1e-12
    assert lift.level1[0] == pytest.approx([0.0, 0.0])


def test_chen_defect_on_one_step_grid():
    """A single step has no triples s < r < t, so the defect is zero."""
    lift = piecewise_linear_lift(TimeGrid.uniform(1, 1.0), [[0.0], [1.0]])
    assert chen_defect(lift) == 0.0
    assert geometricity_defect(lift) < 1e-15


def test_anchored_lift_rejects_bad_input(grid):
    with pytest.raises(ValueError):
        PathLift(grid, np.ones((grid.n + 1, 1)), np.zeros((grid.n + 1, 1, 1)))
    with pytest.raises(ValueError):
        PathLift.zeros(grid, 1, p=3.0)


def test_dilation_scales_levels(grid, smooth_values):
    lift = piecewise_linear_lift(grid, smooth_values)
    scaled = dilate(lift, 0.3)
    np.testing.assert_allclose(scaled.level1, 0.3 * lift.level1)
    np.testing.assert_allclose(scaled.level2, 0.09 * lift.level2)
    assert chen_defect(scaled) < 1e-12


def test_dilation_composes(grid):
    """τ_b ∘ τ_a = τ_{ab}."""
    lift = brownian_lift(8, grid, refinement=4, d=2)
    twice = dilate(dilate(lift, 0.5), 3.0)
    once = dilate(lift, 1.5)
    np.testing.assert_allclose(twice.level1, once.level1, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(twice.level2, once.level2, rtol=1e-14, atol=1e-15)


def test_ito_lift_keeps_chen_but_not_geometricity(grid):
    lift = brownian_lift(3, grid, refinement=8)
    ito = ito_lift(lift)
    assert not ito.geometric
    assert chen_defect(ito) < 1e-10
    assert geometricity_defect(ito) == pytest.approx(0.5 * grid.horizon, rel=1e-10)


def test_brownian_lift_deterministic_and_algebraic(grid):
    """Same seed gives the same lift; Chen and geometricity hold to rounding."""
    first = brownian_lift(11, grid, refinement=16, d=2)
    second = brownian_lift(11, grid, refinement=16, d=2)
    other = brownian_lift(12, grid, refinement=16, d=2)
    np.testing.assert_array_equal(first.level1, second.level1)
    np.testing.assert_array_equal(first.level2, second.level2)
    assert not np.allclose(first.level1, other.level1)
    assert chen_defect(first) < 1e-10
    assert geometricity_defect(first) < 1e-10
    assert first.seed == 11 and first.refinement == 16


def test_brownian_lift_samples_fine_path(grid):
    fine_grid, values = brownian_path(5, grid, refinement=8)
    lift = brownian_lift(5, grid, refinement=8)
    assert fine_grid.n == 8 * grid.n
    np.testing.assert_allclose(lift.level1[:, 0], values[::8, 0] - values[0, 0])


def test_brownian_quadratic_variation():
    """Sum of squared increments concentrates at T."""
    grid = TimeGrid.uniform(2000, 1.0)
    _, values = brownian_path(7, grid, refinement=1, d=1)
    quadratic = float(np.sum(np.diff(values[:, 0]) ** 2))
    assert quadratic == pytest.approx(1.0, abs=0.2)


def test_refinement_must_be_power_of_two(grid):
    with pytest.raises(ValueError):
        brownian_lift(0, grid, refinement=12)


def test_brownian_refinements_are_nested(grid):
    """Level 1 is shared across refinements; level 2 settles as R grows."""
    lifts = {r: brownian_lift(21, grid, refinement=r, d=2) for r in (1, 8, 64)}
    np.testing.assert_array_equal(lifts[1].level1, lifts[8].level1)
    np.testing.assert_array_equal(lifts[8].level1, lifts[64].level1)
    areas = {r: lift.steps[1] for r, lift in lifts.items()}
    coarse_gap = np.sqrt(np.mean((areas[8] - areas[1]) ** 2))
    fine_gap = np.sqrt(np.mean((areas[64] - areas[8]) ** 2))
    assert coarse_gap > 0.0
    assert fine_gap < 0.6 * coarse_gap
    for lift in lifts.values():
        assert chen_defect(lift) < 1e-10


def test_derive_seed_streams():
    assert derive_seed(42, 0) == derive_seed(42, 0)
    assert derive_seed(42, 0) != derive_seed(42, 1)
    assert derive_seed(42, 0) != derive_seed(43, 0)


@pytest.mark.parametrize("p", [1.0, 2.0, 2.5])
def test_p_variation_matches_bruteforce(p):
    rng = np.random.default_rng(0)
    samples = np.cumsum(rng.standard_normal((11, 2)), axis=0)
    assert p_variation(samples, p) == pytest.approx(pvar_bruteforce(samples, p), rel=1e-12)


def test_p_variation_of_monotone_path():
    samples = np.linspace(0.0, 3.0, 9)
    assert p_variation(samples, 1.0) == pytest.approx(3.0)
    assert p_variation(samples, 2.0) == pytest.approx(3.0)


def test_p_variation_rejects_bad_input():
    with pytest.raises(ValueError):
        p_variation(np.zeros(1), 2.0)
    with pytest.raises(ValueError):
        p_variation(np.zeros(5), 0.5)


def test_pvar_control_is_superadditive():
    rng = np.random.default_rng(1)
    control = pvar_control(np.cumsum(rng.standard_normal(15)), 2.5)
    assert control.certified
    assert control(0, 14) >= control(0, 7) + control(7, 14) - 1e-12
    with pytest.raises(ValueError):
        control(5, 2)


def test_homogeneous_norm_and_distance(grid):
    zero = PathLift.zeros(grid, 2)
    lift = brownian_lift(2, grid, refinement=4, d=2)
    assert homogeneous_norm(zero) == 0.0
    assert rough_path_distance(lift, lift) == 0.0
    gap = rough_path_distance(lift, zero)
    assert gap == pytest.approx(homogeneous_norm(lift), rel=1e-12)
    assert rough_path_distance(zero, lift) == pytest.approx(gap, rel=1e-12)


def test_two_index_variation_rejects_small_exponent(grid):
    lift = brownian_lift(2, grid, refinement=4)
    with pytest.raises(ValueError):
        two_index_p_variation(lift.second_level_map(), 0.9)


def _two_index_bruteforce(blocks: np.ndarray, q: float) -> float:
    n_points = blocks.shape[0]
    best = 0.0
    for size in range(n_points - 1):
        for interior in itertools.combinations(range(1, n_points - 1), size):
            points = (0,) + interior + (n_points - 1,)
            total = sum(
                float(np.linalg.norm(blocks[s, t])) ** q for s, t in zip(points, points[1:])
            )
            best = max(best, total)
    return best ** (1.0 / q)


@pytest.mark.parametrize("q", [1.0, 1.25, 2.0])
def test_two_index_variation_of_straight_line(q):
    """𝕏_{s,t} = (t - s)²/2 for X_t = t, so the single interval [0, 1] wins: ½."""
    line_grid = TimeGrid.uniform(6, 1.0)
    mapping = piecewise_linear_lift(line_grid, line_grid.points).second_level_map()
    value = two_index_p_variation(mapping, q)
    assert value == pytest.approx(0.5, rel=1e-12)
    assert value == pytest.approx(_two_index_bruteforce(mapping.materialize(), q), rel=1e-12)


def test_two_index_variation_matches_bruteforce_on_brownian_area():
    short_grid = TimeGrid.uniform(7, 1.0)
    mapping = brownian_lift(5, short_grid, refinement=8, d=2).second_level_map()
    expected = _two_index_bruteforce(mapping.materialize(), 1.25)
    assert two_index_p_variation(mapping, 1.25) == pytest.approx(expected, rel=1e-12)


def test_young_cross_matches_trapezoid(grid, smooth_values):
    a, b = smooth_values[:, 0], smooth_values[:, 1]
    cross = young_cross(a, b, grid)
    expected = trapezoid_iterated(a - a[0], b)
    assert cross.block(0, grid.n)[0, 0] == pytest.approx(expected, rel=1e-12)


def test_young_cross_satisfies_chen(grid, smooth_values):
    """δ[AB]_{s,r,t} = A_{s,r} B_{r,t} exactly on the grid."""
    a, b = smooth_values[:, 0], smooth_values[:, 1]
    cross = young_cross(a, b, grid)
    for s, r, t in [(0, 5, 40), (3, 17, 22), (10, 11, 12)]:
        defect = cross.block(s, t) - cross.block(s, r) - cross.block(r, t)
        expected = (a[r] - a[s]) * (b[t] - b[r])
        assert defect[0, 0] == pytest.approx(expected, abs=1e-13)


def test_young_cross_rejects_rough_pair(grid, smooth_values):
    with pytest.raises(ValueError):
        young_cross(smooth_values[:, 0], smooth_values[:, 1], grid, 2.0, 2.0)


def test_sum_of_a_path_with_itself(grid, smooth_values):
    """{X + X} with trapezoid crosses is the lift of 2X."""
    lift = piecewise_linear_lift(grid, smooth_values)
    cross = young_cross(lift.level1, lift.level1, grid)
    total = sum_lifts(lift, lift, cross, cross)
    doubled = piecewise_linear_lift(grid, 2 * smooth_values)
    np.testing.assert_allclose(total.level1, doubled.level1, atol=1e-12)
    np.testing.assert_allclose(total.level2, doubled.level2, atol=1e-12)


def test_joint_lift_young(grid):
    lift = brownian_lift(4, grid, refinement=8)
    smooth = np.cos(2 * np.pi * grid.points)
    joint = joint_lift_young(lift, smooth)
    assert joint.d == 2
    np.testing.assert_allclose(joint.level2[:, :1, :1], lift.level2)
    assert chen_defect(joint) < 1e-10
    assert geometricity_defect(joint) < 1e-10
    with pytest.raises(ValueError):
        joint_lift_young(lift, smooth[:-1])


@pytest.fixture
def rough_and_smooth(grid, smooth_values):
    """Brownian lift X, smooth lift Y and their trapezoid crossed integrals."""
    rough = brownian_lift(6, grid, refinement=8, d=2)
    smooth = piecewise_linear_lift(grid, smooth_values)
    forward = young_cross(rough.level1, smooth.level1, grid, 2.5, 1.0)
    backward = young_cross(smooth.level1, rough.level1, grid, 1.0, 2.5)
    return rough, smooth, forward, backward


def test_sum_of_rough_and_smooth_is_geometric(rough_and_smooth):
    total = sum_lifts(*rough_and_smooth)
    assert total.geometric
    assert chen_defect(total) < 1e-10
    assert geometricity_defect(total) < 1e-10


def test_increment_vanishes_at_zero_scale(rough_and_smooth):
    step = increment(*rough_and_smooth, eps=0.0)
    assert np.max(np.abs(step.level1.materialize())) == 0.0
    assert np.max(np.abs(step.level2.materialize())) == 0.0


def test_increment_of_zero_perturbation(grid, rough_and_smooth):
    rough = rough_and_smooth[0]
    zero = PathLift.zeros(grid, rough.d)
    forward = young_cross(rough.level1, zero.level1, grid, 2.5, 1.0)
    backward = young_cross(zero.level1, rough.level1, grid, 1.0, 2.5)
    step = increment(rough, zero, forward, backward, eps=0.7)
    np.testing.assert_array_equal(step.level1.materialize(), 0.0)
    np.testing.assert_allclose(step.level2.materialize(), 0.0, atol=1e-15)


def test_increment_from_zero_base_is_the_perturbation(grid, smooth_values):
    """X = 0 and ε = 1 give back (Y, 𝕐)."""
    zero = PathLift.zeros(grid, 2)
    smooth = piecewise_linear_lift(grid, smooth_values)
    forward = young_cross(zero.level1, smooth.level1, grid)
    backward = young_cross(smooth.level1, zero.level1, grid)
    step = increment(zero, smooth, forward, backward, eps=1.0)
    np.testing.assert_allclose(
        step.level1.materialize(), smooth.first_level_map().materialize(), atol=1e-15
    )
    np.testing.assert_allclose(
        step.level2.materialize(), smooth.dense_second_level(), atol=1e-14
    )


@pytest.mark.parametrize("eps", [0.5, 0.125])
def test_increment_scaling(rough_and_smooth, eps):
    """Level 1 scales with ε, the mixed terms with ε and 𝕐 with ε²."""
    rough, smooth, forward, backward = rough_and_smooth
    step = increment(rough, smooth, forward, backward, eps=eps)
    unit = increment(rough, smooth, forward, backward, eps=1.0)
    mixed = (forward + backward).materialize()
    np.testing.assert_allclose(
        step.level1.materialize(), eps * unit.level1.materialize(), atol=1e-14
    )
    np.testing.assert_allclose(
        step.level2.materialize(),
        eps**2 * smooth.dense_second_level() + eps * mixed,
        atol=1e-13,
    )


def test_increment_matches_difference_of_lifts(rough_and_smooth):
    """{X + τ_ε Y} - X equals the increment entry by entry."""
    rough, smooth, forward, backward = rough_and_smooth
    eps = 0.3
    perturbed = sum_lifts(rough, dilate(smooth, eps), forward.scaled(eps), backward.scaled(eps))
    step = increment(rough, smooth, forward, backward, eps=eps)
    np.testing.assert_allclose(
        perturbed.dense_second_level() - rough.dense_second_level(),
        step.level2.materialize(),
        atol=1e-12,
    )
    np.testing.assert_allclose(
        perturbed.first_level_map().materialize() - rough.first_level_map().materialize(),
        step.level1.materialize(),
        atol=1e-13,
    )


@pytest.mark.parametrize("suffix", [".csv", ".h5"])
def test_lift_serialization(tmp_path, suffix):
    grid = TimeGrid.uniform(16, 0.5)
    lift = brownian_lift(9, grid, refinement=4, d=2)
    path = save_lift(lift, tmp_path / f"lift{suffix}", {"config_hash": "abc"})
    loaded = load_lift(path)
    np.testing.assert_array_equal(loaded.level1, lift.level1)
    np.testing.assert_array_equal(loaded.level2, lift.level2)
    assert loaded.seed == 9
    assert loaded.p == lift.p


def test_table_header(tmp_path):
    import pandas as pd

    frame = pd.DataFrame({"eps": [0.5, 0.25], "error": [1e-3, 2.5e-4]})
    path = write_table(tmp_path / "table.csv", frame, {"config_hash": "deadbeef", "seed": 3})
    loaded, header = read_table(path)
    assert header == {"config_hash": "deadbeef", "seed": "3"}
    assert loaded["error"].tolist() == [1e-3, 2.5e-4]
