# estimates.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Checks of the field bounds a run should satisfy and of the time integrals
# those bounds are built from: the choice of the short time t0, the
# small-time integral of zeta and the logarithmic large-time integral of the
# singular amplification.

import logging
import math

import numpy as np
from scipy.integrate import quad

from magvlasov.errors import ExponentError, MissingHistoryError, OrderingError
from magvlasov.harness.report import EstimateReport
from magvlasov.kinematics import near_singular, rescaled_factor, singular_amplification, zeta

log = logging.getLogger('magvlasov.harness')

# ratio integral / ln(t / t0) must stay below this
LARGE_TIME_BOUND = 2.0 * 2.0 ** (2.0 / 3.0)


def conjugate(d):
    if math.isinf(d):
        return 1.0
    return d / (d - 1.0)


def derived_l(k, d):
    """l = 3 (k + 3) / d' - 3, d' the conjugate exponent of d."""
    return 3.0 * (k + 3.0) / conjugate(d) - 3.0


def _t0_exponent(k, d, l):
    return 3.0 * (l + 3.0) / ((k + 3.0) ** 2 * (2.0 - 3.0 / d))


def select_t0(t, mu_k, k, d, l=None):
    """\
    Short time t0 = t (1 + mu_k)^(-3 (l + 3) / ((k + 3)^2 (2 - 3/d))),
    chosen so (t0/t)^(2 - 3/d) (1 + mu_k)^(3 (l + 3)/(k + 3)^2) == 1. When
    `l` is given it must match the value derived from (k, d).
    """
    k, d = float(k), float(d)
    if not d > 1.5:
        raise ExponentError('select_t0 needs d > 3/2, got {!r}'.format(d))
    if not t > 0:
        raise ValueError('select_t0 needs t > 0, got {!r}'.format(t))
    if not mu_k >= 0:
        raise ValueError('select_t0 needs mu_k >= 0, got {!r}'.format(mu_k))
    expected = derived_l(k, d)
    if l is None:
        l = expected
    elif not math.isclose(l, expected, rel_tol=1e-12, abs_tol=1e-12):
        raise ExponentError('l = {!r} does not match 3 (k + 3) / d\' - 3 = {!r}'.format(l, expected))
    return t * (1.0 + mu_k) ** (-_t0_exponent(k, d, l))


def verify_t0_rule(k_values=(3.5, 4.0, 6.0), d_values=(2.0, 3.0, 3.5), samples=200, seed=0):
    """Residual of the t0 balance relation over random (t, mu_k)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    for k in k_values:
        for d in d_values:
            l = derived_l(k, d)
            for t, mu in zip(10.0 ** rng.uniform(-2, 2, samples), 10.0 ** rng.uniform(-3, 6, samples)):
                t0 = select_t0(t, mu, k, d)
                residual = (t0 / t) ** (2.0 - 3.0 / d) * (1.0 + mu) ** (3.0 * (l + 3.0) / (k + 3.0) ** 2) - 1.0
                worst = max(worst, abs(residual))
                count += 1
    return EstimateReport('estimates.t0_rule', count, worst / 1e-12, fitted_constants={'residual': worst})


def _zeta_integral(mag, d, t0):
    value, _ = quad(lambda s: float(zeta(s, mag, d, convention='jacobian')), 0.0, t0,
                    epsabs=0.0, epsrel=1e-10, limit=200)
    return value


def small_time_ratio(mag, d, t0):
    """\
    int_0^t0 zeta ds scaled by omega^(2 - 3/d) and divided by
    (omega t0)^(2 - 3/d). The result depends on omega t0 only; without a
    field it is the constant 1 / (2 - 3/d).
    """
    exponent = 2.0 - 3.0 / d
    integral = _zeta_integral(mag, d, t0)
    if mag.omega == 0:
        return integral / t0 ** exponent
    return integral * mag.omega ** exponent / (mag.omega * t0) ** exponent


def verify_small_time_bound(mag, d, t0_grid, factor=2.0):
    """\
    Small-time integral over t0 in t0_grid, every point inside the window
    (0, pi/omega]. Passes when the scaled ratios vary by less than
    `factor` and stay below the bound set by the rescaled factor at pi.
    """
    d = float(d)
    if not d > 1.5:
        raise ExponentError('small-time bound needs d > 3/2, got {!r}'.format(d))
    t0_grid = np.asarray(t0_grid, dtype=np.float64)
    if np.any(~(t0_grid > 0)):
        raise ValueError('t0 values must be positive')
    if mag.omega > 0 and np.any(mag.omega * t0_grid > math.pi * (1 + 1e-12)):
        raise ValueError('t0 values must satisfy omega t0 <= pi')
    ratios = np.array([small_time_ratio(mag, d, t0) for t0 in t0_grid])
    bound = float(rescaled_factor(math.pi, d)) / (2.0 ** (1.0 / d) * (2.0 - 3.0 / d))
    spread = float(ratios.max() / ratios.min())
    report = EstimateReport('estimates.small_time(d={:g},omega={:g})'.format(d, mag.omega), len(t0_grid),
                            max(spread / factor, float(ratios.max()) / bound), threshold=1.0,
                            fitted_constants={'C': float(ratios.max()), 'C_bound': bound, 'spread': spread})
    return report


def large_time_ratio(mag, t0, t):
    """\
    int_t0^t amplification ds * 2^(2/3) / sqrt 2, divided by ln(t / t0).
    Without a field the ratio is exactly 2^(2/3).
    """
    if t == t0:
        return 0.0
    scale = 2.0 ** (2.0 / 3.0) / math.sqrt(2.0)
    value, _ = quad(lambda s: float(singular_amplification(s, mag)), t0, t, epsabs=0.0, epsrel=1e-10,
                    limit=200)
    return value * scale / math.log(t / t0)


def verify_large_time_log(mag, d, t0, t, bound=LARGE_TIME_BOUND):
    """\
    The large-time integral grows like ln(t / t0). `d` names the field
    exponent the integral is used with; the amplification exponent itself
    is fixed.
    """
    if t0 > t:
        raise OrderingError('verify_large_time_log needs t0 <= t, got t0 = {!r}, t = {!r}'.format(t0, t))
    if not t0 > 0:
        raise ValueError('t0 must be positive')
    if mag.omega > 0 and mag.omega * t > math.pi * (1 + 1e-12):
        raise ValueError('t must satisfy omega t <= pi')
    ratio = large_time_ratio(mag, t0, t)
    report = EstimateReport('estimates.large_time(d={:g},omega={:g})'.format(d, mag.omega), 1, ratio,
                            threshold=bound, fitted_constants={'C': ratio})
    if t == t0:
        report.notes.append('t == t0, empty integral')
    return report


def verify_large_time_grid(mag, d, t0_fractions=(0.01, 0.02, 0.05, 0.1), bound=LARGE_TIME_BOUND):
    """Large-time ratio with omega t0 over `t0_fractions` and omega t = pi."""
    if mag.omega == 0:
        t, t0s = 1.0, list(t0_fractions)
    else:
        t, t0s = mag.t_omega, [f / mag.omega for f in t0_fractions]
    ratios = [large_time_ratio(mag, t0, t) for t0 in t0s]
    worst = max(ratios)
    return EstimateReport('estimates.large_time(d={:g},omega={:g})'.format(d, mag.omega), len(ratios), worst,
                          threshold=bound, fitted_constants={'C': worst})


def _guard_mask(times, mag, guard):
    if mag.omega == 0:
        return np.ones(len(times), dtype=bool)
    times = np.asarray(times)
    return ~(near_singular(times, mag, guard) & (times > 0))


def field_constant(series, k, mag, guard=1e-3):
    """\
    Largest C(t) = ||E(t)||_{k+3} / ((1 + mu_k)^(1/(k+3)) (1 + ln(1 + mu_k)))
    over the samples outside the guard band around the singular times.
    """
    p = float(k) + 3.0
    if p not in series.norm_exponents:
        raise MissingHistoryError('series has no ||E||_{:g} column (exponents {})'.format(p, series.norm_exponents))
    if float(k) not in series.exponents:
        raise MissingHistoryError('series has no M_{:g} column'.format(k))
    mu = series.running_sup(k)
    c = series.e_norm(p) / ((1.0 + mu) ** (1.0 / p) * (1.0 + np.log1p(mu)))
    keep = _guard_mask(series.times(), mag, guard)
    return float(np.max(c[keep])) if keep.any() else 0.0


def verify_field_estimates(series, k, mag, d_grid=(2.0, 3.0, 3.5, 3.75), energy_tol=1e-3, guard=1e-3,
                           reference=None, fit_ratio=2.0):
    """\
    Checks a run's field norms: every ||E||_p with p in d_grid stays finite,
    ||E(t)||_2 respects the energy bound sqrt(2 energy(0)) and the fitted
    constant of the (k+3)-norm bound is finite. When a `reference` series
    (another resolution of the same run) is given, the two fitted constants
    must agree within `fit_ratio`.
    """
    if not len(series):
        raise MissingHistoryError('empty moment series')
    reports = []
    missing = [p for p in d_grid if float(p) not in series.norm_exponents]
    if missing:
        raise MissingHistoryError('series lacks field norms for p in {}'.format(missing))
    sups = {p: float(np.max(series.e_norm(p))) for p in d_grid}
    worst = max(sups.values())
    reports.append(EstimateReport('fields.norms_finite', len(series), worst, threshold=math.inf,
                                  fitted_constants={'sup_L{:g}'.format(p): v for p, v in sups.items()}))

    e_in = series[0].energy
    if 2.0 in series.norm_exponents:
        bound = math.sqrt(2.0 * e_in * (1.0 + energy_tol))
        e2 = series.e_norm(2.0)
        ratio = float(np.max(e2)) / bound if bound > 0 else (0.0 if not np.any(e2) else math.inf)
        reports.append(EstimateReport('fields.energy_bound', len(series), ratio,
                                      fitted_constants={'energy_in': e_in}))

    c = field_constant(series, k, mag, guard)
    report = EstimateReport('fields.fitted_constant(k={:g})'.format(k), len(series), c, threshold=math.inf,
                            fitted_constants={'C': c})
    if reference is not None:
        c_ref = field_constant(reference, k, mag, guard)
        report.fitted_constants['C_reference'] = c_ref
        if c > 0 and c_ref > 0:
            report.max_ratio = max(c / c_ref, c_ref / c)
        elif c == c_ref:
            report.max_ratio = 1.0
        else:
            report.max_ratio = math.inf
        report.threshold = fit_ratio
    report.notes.append('mu_k taken as the running sup over sample times')
    reports.append(report)
    return reports


def verify_estimates(mag, harness, t0_points=None):
    """t0 rule plus the small- and large-time integrals for every d in the harness grid."""
    reports = [verify_t0_rule(k_values=(harness.k,), d_values=harness.d_grid)]
    n = t0_points or harness.small_time_points
    window = mag.t_omega if mag.magnetised else 1.0
    t0_grid = window * np.geomspace(1e-3, 1.0, n)
    for d in harness.d_grid:
        reports.append(verify_small_time_bound(mag, d, t0_grid, harness.small_time_factor))
        reports.append(verify_large_time_grid(mag, d, bound=harness.large_time_bound))
    return reports
