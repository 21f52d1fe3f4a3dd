# fields_suite.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

import itertools
import logging
import math

import numpy as np
from scipy import special
from scipy.integrate import quad

from magvlasov.errors import GridBudgetError
from magvlasov.fields import (GridSpec, ScalarField, VectorField, deposit, lp_norm, solve_field,
                              weak_lq_norm)
from magvlasov.harness.report import EstimateReport

log = logging.getLogger('magvlasov.harness')


def gaussian_field_exact(points, sigma, charge=1.0):
    """\
    Field of a normalised Gaussian charge cloud of spread sigma centred at
    the origin: E = Q(|x|) x / (4 pi |x|^3), Q(r) the charge inside radius r.
    """
    points = np.asarray(points, dtype=np.float64)
    r = np.linalg.norm(points, axis=-1)
    a = r / (math.sqrt(2.0) * sigma)
    enclosed = charge * (special.erf(a) - 2.0 / math.sqrt(math.pi) * a * np.exp(-a * a))
    with np.errstate(divide='ignore', invalid='ignore'):
        scale = np.where(r > 0, enclosed / (4.0 * math.pi * r ** 3), 0.0)
    return points * scale[..., None]


def enclosed_charge(r, sigma, charge=1.0):
    """Q(r) by direct radial quadrature, independent of the erf form."""
    density = lambda s: charge * 4.0 * math.pi * s * s * math.exp(-0.5 * (s / sigma) ** 2) / (
        (2.0 * math.pi) ** 1.5 * sigma ** 3)
    return quad(density, 0.0, r, epsabs=1e-14, epsrel=1e-12)[0]


def gaussian_density(grid, sigma, charge=1.0):
    x = grid.centres()
    r2 = np.einsum('...i,...i->...', x, x)
    return ScalarField(grid, charge * np.exp(-0.5 * r2 / sigma ** 2) / ((2.0 * math.pi) ** 1.5 * sigma ** 3))


def gaussian_field_error(cells, sigma=0.2, half_width=1.25, budget_bytes=None):
    """Discrete L^2 error of the solved Gaussian field at cell centres."""
    grid = GridSpec.cube(half_width, cells)
    e = solve_field(gaussian_density(grid, sigma), budget_bytes=budget_bytes)
    exact = gaussian_field_exact(grid.centres(), sigma)
    return lp_norm(VectorField(grid, e.values - exact), 2)


def check_convergence(levels=(32, 64, 128), sigma=0.2, half_width=1.25, min_ratio=3.5, budget_bytes=None):
    """Error ratios between successive refinements should be near 4."""
    errors = []
    for cells in levels:
        try:
            errors.append(gaussian_field_error(cells, sigma, half_width, budget_bytes))
        except GridBudgetError as e:
            log.warning('convergence level %d skipped: %s', cells, e)
            break
    report = EstimateReport('fields.convergence', len(errors), math.inf)
    if len(errors) < 2:
        report.notes.append('fewer than two refinement levels fit the memory budget')
        return report
    ratios = [a / b for a, b in zip(errors[:-1], errors[1:])]
    report.max_ratio = max(min_ratio / r for r in ratios)
    report.fitted_constants.update({'ratio{}'.format(i): r for i, r in enumerate(ratios)})
    report.fitted_constants['order'] = math.log2(min(ratios))
    return report


def check_point_charge(cells=16, half_width=2.0):
    """\
    A unit charge sitting on a cell centre deposits into that cell alone,
    so the solved field at every other centre is exactly Coulomb.
    """
    grid = GridSpec.cube(half_width, cells)
    centre = grid.centres()[cells // 2, cells // 2, cells // 2]
    rho = ScalarField(grid, deposit(centre[None, :], np.ones(1), grid))
    e = solve_field(rho).values
    r = grid.centres() - centre
    r2 = np.einsum('...i,...i->...', r, r)
    with np.errstate(divide='ignore', invalid='ignore'):
        exact = r / (4.0 * math.pi * r2 * np.sqrt(r2))[..., None]
    exact[cells // 2, cells // 2, cells // 2] = 0.0
    scale = np.max(np.linalg.norm(exact, axis=-1))
    error = float(np.max(np.abs(e - exact)) / scale)
    return EstimateReport('fields.point_charge', grid.size, error / 1e-12, fitted_constants={'error': error})


def check_charge_conservation(samples=1000, seed=0, cells=16):
    rng = np.random.default_rng(seed)
    grid = GridSpec.cube(2.0, cells)
    positions = rng.uniform(-1.8, 1.8, (samples, 3))
    weights = rng.random(samples)
    rho = ScalarField(grid, deposit(positions, weights, grid))
    error = abs(rho.integral() - weights.sum()) / weights.sum()
    return EstimateReport('fields.charge', samples, error / 1e-12, fitted_constants={'error': error})


def check_linearity(seed=0, cells=16):
    rng = np.random.default_rng(seed)
    grid = GridSpec.cube(2.0, cells)
    rho1 = ScalarField(grid, rng.random(grid.shape))
    rho2 = ScalarField(grid, rng.random(grid.shape))
    alpha, beta = rng.uniform(-2.0, 2.0, 2)
    combined = solve_field(rho1 * alpha + rho2 * beta).values
    separate = alpha * solve_field(rho1).values + beta * solve_field(rho2).values
    error = float(np.max(np.abs(combined - separate)) / np.max(np.abs(separate)))
    return EstimateReport('fields.linearity', grid.size, error / 1e-12, fitted_constants={'error': error})


def brute_force_weak_norm(values, cell_volume, q):
    """\
    sup over every subset A of the cells of |A|^(-1/q') int_A |f|. Only
    usable for a dozen or so cells.
    """
    mags = np.abs(np.asarray(values, dtype=np.float64).ravel())
    n = mags.size
    masks = np.array(list(itertools.product((False, True), repeat=n))[1:])
    sums = masks.astype(np.float64) @ mags * cell_volume
    measure = masks.sum(axis=1) * cell_volume
    return float(np.max(sums * measure ** (-(1.0 - 1.0 / q))))


def check_weak_norm(trials=20, seed=0, nonzero=12, exponents=(1.5, 2.0)):
    """\
    weak_lq_norm against an exhaustive subset search on 4^3 fields with
    `nonzero` non-zero cells (zero cells only enlarge A, so the search over
    the non-zero cells is exact).
    """
    rng = np.random.default_rng(seed)
    grid = GridSpec.cube(1.0, 4)
    worst = 0.0
    for _ in range(trials):
        values = np.zeros(grid.size)
        values[rng.choice(grid.size, nonzero, replace=False)] = rng.uniform(-1.0, 1.0, nonzero)
        f = ScalarField(grid, values.reshape(grid.shape))
        for q in exponents:
            exact = brute_force_weak_norm(values[values != 0], grid.cell_volume, q)
            worst = max(worst, abs(weak_lq_norm(f, q) - exact) / exact)
    return EstimateReport('fields.weak_norm', trials * len(exponents), worst / 1e-12,
                          fitted_constants={'error': worst})


def check_weak_below_strong(trials=20, seed=1, cells=8, exponents=(1.5, 2.0, 3.0)):
    """||f||_{q,weak} <= ||f||_q (Hölder on every set A)."""
    rng = np.random.default_rng(seed)
    grid = GridSpec.cube(1.0, cells)
    worst = 0.0
    for _ in range(trials):
        f = ScalarField(grid, rng.standard_normal(grid.shape))
        for q in exponents:
            worst = max(worst, weak_lq_norm(f, q) / lp_norm(f, q))
    return EstimateReport('fields.weak_below_strong', trials * len(exponents), worst,
                          threshold=1.0 + 1e-12, fitted_constants={'C': worst})


def verify_fields(levels=(32, 64, 128), seed=0, budget_bytes=None):
    reports = [
        check_charge_conservation(seed=seed),
        check_linearity(seed=seed),
        check_point_charge(),
        check_weak_norm(seed=seed),
        check_weak_below_strong(seed=seed + 1),
        check_convergence(levels, budget_bytes=budget_bytes),
    ]
    for r in reports:
        log.info('%s: max_ratio=%.3g (%s)', r.name, r.max_ratio, 'pass' if r.passed else 'FAIL')
    return reports
