# inequalities.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Discrete checks of the functional inequalities the field bounds rest on:
# moment interpolation, the weak-norm product bound, and two probes of
# convolution bounds through the field solver.

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from magvlasov.errors import ExponentError
from magvlasov.fields import GridSpec, ScalarField, lp_norm, solve_field, weak_lq_norm
from magvlasov.harness.report import EstimateReport

log = logging.getLogger('magvlasov.harness')

# sharp continuum constant of int |g h| <= c ||g||_1^(1/3) ||g||_inf^(2/3) ||h||_{3/2,w}
WEAK_PRODUCT_CONSTANT = 3.0 * 1.5 ** (2.0 / 3.0)

# ||grad K||_{3/2,w} for K the Coulomb potential 1/(4 pi |x|)
GRAD_KERNEL_WEAK_NORM = (4.0 / 3.0 * math.pi) ** (-1.0 / 3.0)


@dataclass
class PhaseGrid:
    """Product mesh: nx^3 position cells of side hx times nv^3 velocity cells on [-vmax, vmax]^3."""
    nx: int = 4
    nv: int = 6
    hx: float = 0.5
    vmax: float = 2.0

    @property
    def hv(self):
        return 2.0 * self.vmax / self.nv

    def speeds(self):
        c = -self.vmax + (np.arange(self.nv) + 0.5) * self.hv
        v = np.stack(np.meshgrid(c, c, c, indexing='ij'), axis=-1).reshape(-1, 3)
        return np.linalg.norm(v, axis=1)

    def scaled(self, lam):
        """Same mesh with velocities dilated by lam."""
        return PhaseGrid(self.nx, self.nv, self.hx, self.vmax * lam)


def interpolation_exponent(k, kp, p):
    """r = (k + 3/q) / (kp + 3/q + (k - kp)/p), q the conjugate of p."""
    inv_q = 1.0 - 1.0 / p
    return (k + 3.0 * inv_q) / (kp + 3.0 * inv_q + (k - kp) / p)


def _norm(values, p, cell):
    values = np.abs(values)
    if math.isinf(p):
        return float(values.max())
    return float((np.sum(values ** p) * cell) ** (1.0 / p))


def interpolation_ratio(f, mesh, k, kp, p):
    """\
    ||m_kp||_r / (||f||_p^((k-kp)/(k+3/q)) M_k^((kp+3/q)/(k+3/q))) for a
    non-negative f of shape (nx^3, nv^3) on `mesh`.
    """
    if not 0 <= kp <= k:
        raise ExponentError('moment interpolation needs 0 <= k\' <= k, got k = {!r}, k\' = {!r}'.format(k, kp))
    if not p >= 1:
        raise ExponentError('moment interpolation needs p >= 1, got {!r}'.format(p))
    inv_q = 1.0 - 1.0 / p
    r = interpolation_exponent(k, kp, p)
    cx, cv = mesh.hx ** 3, mesh.hv ** 3
    speed = mesh.speeds()
    m_kp = f @ (speed ** kp) * cv
    M_k = float(np.sum(f @ (speed ** k)) * cx * cv)
    lhs = _norm(m_kp, r, cx)
    norm_f = _norm(f, p, cx * cv)
    denominator = k + 3.0 * inv_q
    rhs = norm_f ** ((k - kp) / denominator) * M_k ** ((kp + 3.0 * inv_q) / denominator)
    return lhs / rhs


def _exponent_draw(rng):
    k = rng.uniform(3.0, 6.0)
    kp = rng.uniform(0.0, k)
    p = (1.0, 2.0, math.inf)[rng.integers(3)]
    return k, kp, p


def _ratios(trials, seed, mesh):
    rng = np.random.default_rng(seed)
    out = np.empty(trials)
    for i in range(trials):
        f = rng.random((mesh.nx ** 3, mesh.nv ** 3))
        out[i] = interpolation_ratio(f, mesh, *_exponent_draw(rng))
    return out


def verify_moment_interpolation(trials=1000, seed=0, lambdas=(0.25, 4.0), mesh=None, stability=1.1):
    """\
    Moment interpolation on random discrete f. Reports the worst ratio,
    its invariance under velocity dilation and mass scaling, and whether
    a ten times larger trial set raises the worst ratio by more than
    `stability`.
    """
    mesh = mesh or PhaseGrid()
    base = _ratios(trials, seed, mesh)
    worst = float(base.max())
    reports = [EstimateReport('ineq.moment_interpolation', trials, worst, threshold=math.inf,
                              fitted_constants={'C': worst})]

    rng = np.random.default_rng(seed + 1)
    deviation = 0.0
    for _ in range(max(1, trials // 10)):
        f = rng.random((mesh.nx ** 3, mesh.nv ** 3))
        k, kp, p = _exponent_draw(rng)
        ratio = interpolation_ratio(f, mesh, k, kp, p)
        for lam in lambdas:
            deviation = max(deviation, abs(interpolation_ratio(f, mesh.scaled(lam), k, kp, p) / ratio - 1.0))
        deviation = max(deviation, abs(interpolation_ratio(7.0 * f, mesh, k, kp, p) / ratio - 1.0))
    reports.append(EstimateReport('ineq.moment_interpolation.scaling', max(1, trials // 10), deviation / 1e-10,
                                  fitted_constants={'deviation': deviation}))

    large = float(_ratios(10 * trials, seed + 2, mesh).max())
    reports.append(EstimateReport('ineq.moment_interpolation.stability', 10 * trials, large / worst,
                                  threshold=stability, fitted_constants={'C': large}))
    return reports


def verify_moment_holder(trials=200, seed=3, mesh=None):
    """M_l <= ||f||_1^((k-l)/k) M_k^(l/k) (Hölder in v, constant 1)."""
    mesh = mesh or PhaseGrid()
    rng = np.random.default_rng(seed)
    speed = mesh.speeds()
    cell = mesh.hx ** 3 * mesh.hv ** 3
    worst = 0.0
    for _ in range(trials):
        f = rng.random((mesh.nx ** 3, mesh.nv ** 3))
        k = rng.uniform(1.0, 6.0)
        l = rng.uniform(0.0, k)
        mass = float(f.sum() * cell)
        m_l = float(np.sum(f @ (speed ** l)) * cell)
        m_k = float(np.sum(f @ (speed ** k)) * cell)
        worst = max(worst, m_l / (mass ** ((k - l) / k) * m_k ** (l / k)))
    return EstimateReport('ineq.moment_holder', trials, worst, threshold=1.0 + 1e-12,
                          fitted_constants={'C': worst})


def verify_weak_product_bound(trials=200, seed=4, cells=8):
    """\
    int |g h| <= 3 (3/2)^(2/3) ||g||_1^(1/3) ||g||_inf^(2/3) ||h||_{3/2,w}
    on random pairs, h drawn both as noise and as |x|^-2 shaped kernels.
    """
    rng = np.random.default_rng(seed)
    grid = GridSpec.cube(1.0, cells)
    r = np.linalg.norm(grid.centres(), axis=-1)
    worst = 0.0
    for i in range(trials):
        g = ScalarField(grid, rng.random(grid.shape) * (rng.random(grid.shape) < 0.5))
        if i % 2:
            h = ScalarField(grid, rng.standard_normal(grid.shape))
        else:
            h = ScalarField(grid, rng.uniform(0.5, 1.5) / (r ** 2 + rng.uniform(0.01, 0.1)))
        lhs = float(np.sum(np.abs(g.values * h.values)) * grid.cell_volume)
        rhs = (lp_norm(g, 1) ** (1.0 / 3.0) * lp_norm(g, math.inf) ** (2.0 / 3.0) * weak_lq_norm(h, 1.5))
        if rhs > 0:
            worst = max(worst, lhs / (WEAK_PRODUCT_CONSTANT * rhs))
    return EstimateReport('ineq.weak_product', trials, worst, fitted_constants={'C': worst * WEAK_PRODUCT_CONSTANT})


def _blob(grid, sigma):
    x = grid.centres()
    return ScalarField(grid, np.exp(-0.5 * np.einsum('...i,...i->...', x, x) / sigma ** 2))


def probe_weak_young(sigmas=(0.25, 0.35, 0.5), p=1.2, cells=32, half_width=2.0, spread_limit=1.5):
    """\
    ||f * grad K||_r / (||f||_p ||grad K||_{3/2,w}) with 1 + 1/r = 1/p + 2/3,
    for Gaussian blobs of several widths. The ratio is dilation invariant,
    so it should barely move across widths.
    """
    if not 1.0 < p < 1.5:
        raise ExponentError('weak Young probe needs 1 < p < 3/2, got {!r}'.format(p))
    r = 1.0 / (1.0 / p - 1.0 / 3.0)
    grid = GridSpec.cube(half_width, cells)
    ratios = []
    for sigma in sigmas:
        f = _blob(grid, sigma)
        e = solve_field(f)
        ratios.append(lp_norm(e, r) / (lp_norm(f, p) * GRAD_KERNEL_WEAK_NORM))
    spread = max(ratios) / min(ratios)
    return EstimateReport('ineq.weak_young(p={:g})'.format(p), len(ratios), spread, threshold=spread_limit,
                          fitted_constants={'C': max(ratios), 'r': r})


def _derivative_norm(e, p):
    h = e.grid.h
    total = np.zeros(e.grid.shape)
    for i in range(3):
        for j in range(3):
            total += np.gradient(e.values[..., j], h[i], axis=i) ** 2
    return lp_norm(ScalarField(e.grid, np.sqrt(total)), p)


def probe_calderon_zygmund(trials=5, seed=5, exponents=(2.0, 4.0), cells=32, half_width=2.0, smoothing=2.0):
    """\
    ||grad E||_p / ||g||_p for smooth random compactly concentrated g. At
    p = 2 the Frobenius ratio is at most 1 in the continuum.
    """
    rng = np.random.default_rng(seed)
    grid = GridSpec.cube(half_width, cells)
    window = np.exp(-0.5 * np.einsum('...i,...i->...', grid.centres(), grid.centres()) / 0.6 ** 2)
    reports = []
    samples = []
    for _ in range(trials):
        g = ScalarField(grid, gaussian_filter(rng.standard_normal(grid.shape), smoothing) * window)
        samples.append((g, solve_field(g)))
    for p in exponents:
        ratios = [_derivative_norm(e, p) / lp_norm(g, p) for g, e in samples]
        worst = max(ratios)
        reports.append(EstimateReport('ineq.calderon_zygmund(p={:g})'.format(p), trials, worst,
                                      threshold=math.inf, fitted_constants={'C': worst}))
    return reports


def verify_inequalities(trials=1000, seed=0):
    reports = verify_moment_interpolation(trials, seed)
    reports.append(verify_moment_holder(seed=seed + 3))
    reports.append(verify_weak_product_bound(seed=seed + 4))
    reports.append(probe_weak_young())
    reports.extend(probe_calderon_zygmund(seed=seed + 5))
    for r in reports:
        log.info('%s: max_ratio=%.3g (%s)', r.name, r.max_ratio, 'pass' if r.passed else 'FAIL')
    return reports
