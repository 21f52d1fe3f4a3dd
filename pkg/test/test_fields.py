import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from magvlasov.errors import ExponentError, GridBudgetError, OutOfDomainError
from magvlasov.fields import (GridSpec, ScalarField, VectorField, deposit, divergence, interpolate_field,
                              lp_norm, solve_field, weak_lq_norm)
from magvlasov.harness import fields_suite


def test_grid_spec():
    grid = GridSpec.cube(2.0, 8)
    assert grid.shape == (8, 8, 8)
    assert grid.h == (0.5, 0.5, 0.5)
    assert grid.cell_volume == pytest.approx(0.125)
    assert_allclose(grid.axis_centres(0)[:2], [-1.75, -1.25])
    assert grid.centres().shape == (8, 8, 8, 3)
    with pytest.raises(ValueError):
        GridSpec((0, 0, 0), (1, 1, 1), (1, 4, 4))
    with pytest.raises(ValueError):
        GridSpec((0, 0, 0), (1, -1, 1), (4, 4, 4))


def test_deposit_conserves_charge():
    report = fields_suite.check_charge_conservation(samples=500)
    assert report.passed, report.record()


def test_deposit_on_cell_centre():
    grid = GridSpec.cube(2.0, 8)
    centre = grid.centres()[3, 4, 5]
    rho = deposit(centre[None, :], [2.0], grid)
    expected = np.zeros(grid.shape)
    expected[3, 4, 5] = 2.0 / grid.cell_volume
    assert_allclose(rho, expected, atol=1e-12)


def test_deposit_outside_grid():
    grid = GridSpec.cube(1.0, 8)
    with pytest.raises(OutOfDomainError) as info:
        deposit(np.array([[0.0, 0.0, 0.0], [0.99, 0.0, 0.0]]), np.ones(2), grid)
    assert info.value.index == 1


def test_threaded_deposit_is_reproducible():
    rng = np.random.default_rng(3)
    grid = GridSpec.cube(2.0, 16)
    positions = rng.uniform(-1.5, 1.5, (5000, 3))
    weights = rng.random(5000)
    first = deposit(positions, weights, grid, workers=4, deterministic=True)
    second = deposit(positions, weights, grid, workers=4, deterministic=True)
    assert_array_equal(first, second)
    assert_allclose(first, deposit(positions, weights, grid), rtol=1e-12, atol=1e-12)


def test_vector_deposit():
    grid = GridSpec.cube(1.0, 4)
    positions = np.zeros((2, 3))
    charges = np.array([[1.0, 2.0, 3.0], [1.0, 0.0, -3.0]])
    values = deposit(positions, charges, grid)
    assert values.shape == (4, 4, 4, 3)
    assert_allclose(values.sum(axis=(0, 1, 2)) * grid.cell_volume, [2.0, 2.0, 0.0], atol=1e-12)


def test_interpolation_reproduces_linear_fields():
    grid = GridSpec.cube(1.0, 8)
    x = grid.centres()
    field = VectorField(grid, np.stack([x[..., 0], 2 * x[..., 1] + 1, -x[..., 2]], axis=-1))
    points = np.array([[0.1, -0.3, 0.7], [0.0, 0.0, 0.0], [-0.8, 0.8, 0.2]])
    expected = np.stack([points[:, 0], 2 * points[:, 1] + 1, -points[:, 2]], axis=-1)
    assert_allclose(interpolate_field(field, points), expected, atol=1e-12)
    scalar = ScalarField(grid, np.full(grid.shape, 3.0))
    assert_allclose(interpolate_field(scalar, points), 3.0)


def test_point_charge_field_is_coulomb():
    report = fields_suite.check_point_charge()
    assert report.passed, report.record()


def test_solver_is_linear():
    report = fields_suite.check_linearity()
    assert report.passed, report.record()


def test_solver_memory_budget():
    rho = ScalarField(GridSpec.cube(1.0, 16), np.ones((16, 16, 16)))
    with pytest.raises(GridBudgetError):
        solve_field(rho, budget_bytes=1024)


def test_enclosed_charge_oracle():
    for r in (0.1, 0.3, 1.0):
        points = np.array([[r, 0.0, 0.0]])
        e = fields_suite.gaussian_field_exact(points, 0.2)
        assert e[0, 0] * 4 * math.pi * r * r == pytest.approx(fields_suite.enclosed_charge(r, 0.2), rel=1e-9)


def test_poisson_error_decreases_second_order():
    coarse = fields_suite.gaussian_field_error(32, sigma=0.25, half_width=1.5)
    fine = fields_suite.gaussian_field_error(64, sigma=0.25, half_width=1.5)
    assert coarse / fine >= 3.0


@pytest.mark.slow
def test_poisson_convergence_three_levels():
    report = fields_suite.check_convergence((32, 64, 128))
    assert report.passed, report.record()


def test_divergence_of_linear_field():
    grid = GridSpec.cube(1.0, 8)
    x = grid.centres()
    div = divergence(VectorField(grid, x))
    assert_allclose(div.values, 3.0, rtol=1e-12)


def test_norms():
    grid = GridSpec.cube(1.0, 4)
    f = ScalarField(grid, np.full(grid.shape, -2.0))
    volume = 8.0
    assert lp_norm(f, 1) == pytest.approx(2.0 * volume)
    assert lp_norm(f, 2) == pytest.approx(2.0 * math.sqrt(volume))
    assert lp_norm(f, 3.5) == pytest.approx(2.0 * volume ** (1 / 3.5))
    assert lp_norm(f, math.inf) == 2.0
    # constant fields reach the weak supremum on the whole box
    assert weak_lq_norm(f, 1.5) == pytest.approx(2.0 * volume ** (1 / 1.5))
    with pytest.raises(ExponentError):
        lp_norm(f, 0.5)
    with pytest.raises(ExponentError):
        weak_lq_norm(f, 1.0)


def test_weak_norm_matches_subset_search():
    report = fields_suite.check_weak_norm(trials=5)
    assert report.passed, report.record()


def test_weak_norm_below_strong_norm():
    report = fields_suite.check_weak_below_strong(trials=5)
    assert report.passed, report.record()
