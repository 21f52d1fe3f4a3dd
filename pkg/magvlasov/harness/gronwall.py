# gronwall.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Moment propagation: per-window double-exponential envelopes for
# y(t) = 1 + mu_k(t), plus finiteness and conservation of the recorded
# moments.

import logging
import math

import numpy as np
from scipy.optimize import bisect

from magvlasov.errors import EmptyWindowError, MissingHistoryError
from magvlasov.harness.report import EstimateReport, GronwallFit

log = logging.getLogger('magvlasov.harness')


def envelope(times, t_start, window, C, y_start):
    """exp(C T e^(C tau)) y_start^(e^(C tau)), tau = t - t_start, T = window."""
    tau = np.asarray(times, dtype=np.float64) - t_start
    with np.errstate(over='ignore'):
        growth = np.exp(C * tau)
        return np.exp((C * window + math.log(y_start)) * growth)


def _phi(C, tau, log_y, log_y_start, window):
    # >= 0 exactly when the envelope with constant C covers every sample
    with np.errstate(over='ignore', invalid='ignore'):
        value = (C * window + log_y_start) * np.exp(C * tau) - log_y
    value = np.where(np.isnan(value), np.inf, value)
    return float(np.min(value))


def _least_root(phi, tol, cap):
    if phi(0.0) >= 0:
        return 0.0
    if phi(cap) < 0:
        return math.inf
    quarter = 0.25 * tol
    root = bisect(phi, 0.0, cap, xtol=quarter)
    C = min(root + quarter, cap)
    while phi(C) < 0 and C < cap:
        C = min(C + quarter, cap)
    return C


def least_constant(tau, y, y_start, window, tol=1e-3, cap=1e3):
    """\
    Least C in [0, cap] (to within `tol`, never below it) such that
    ln y(tau) <= (C T + ln y_start) e^(C tau) at every sample. inf when
    no C up to `cap` works.
    """
    tau = np.asarray(tau, dtype=np.float64)
    log_y = np.log(np.asarray(y, dtype=np.float64))
    log_y_start = math.log(y_start)
    return _least_root(lambda c: _phi(c, tau, log_y, log_y_start, window), tol, cap)


def fit_window(tau, y, y_start, window, tol=1e-3, cap=1e3):
    """\
    Growth constant of one window, in [0, cap] and never below the true
    one by more than rounding: the least C with
    ln y(tau) <= ln y_start e^(C tau) at every sample. Any such C also
    satisfies the full envelope, whose C T term only adds room. Samples
    y = y_start^(e^(c tau)) give C in [c, c + tol].

    Falls back to `least_constant` when y_start = 1 (ln y_start = 0 leaves
    no growth to fit) or when a sample already exceeds y_start at tau = 0.
    """
    tau = np.asarray(tau, dtype=np.float64)
    log_y = np.log(np.asarray(y, dtype=np.float64))
    log_y_start = math.log(y_start)
    if log_y_start > 0:
        C = _least_root(lambda c: _phi(c, tau, log_y, log_y_start, 0.0), tol, cap)
        if math.isfinite(C):
            return C
    return _least_root(lambda c: _phi(c, tau, log_y, log_y_start, window), tol, cap)


def fit_gronwall_arrays(times, y, window, tol=1e-3, cap=1e3):
    """\
    Fits one envelope per window [p T, (p + 1) T] to samples y(t) >= 1,
    T = `window`. y at the start of window p is the sample at (or just
    before) p T.
    """
    times = np.asarray(times, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if times.size == 0:
        raise EmptyWindowError('no samples to fit')
    if np.any(np.diff(times) <= 0):
        raise ValueError('sample times must be increasing')
    if np.any(y < 1.0):
        raise ValueError('envelope samples must be >= 1')
    eps = 1e-9 * max(window, 1.0)
    n_windows = max(1, int(math.ceil(times[-1] / window - 1e-9)))
    fits = []
    for p in range(n_windows):
        t_start, t_end = p * window, (p + 1) * window
        inside = (times >= t_start - eps) & (times <= t_end + eps)
        if not inside.any():
            raise EmptyWindowError('window {} [{:.6g}, {:.6g}] has no samples'.format(p, t_start, t_end))
        before = np.nonzero(times <= t_start + eps)[0]
        start_index = before[-1] if before.size else np.nonzero(inside)[0][0]
        y_start = float(y[start_index])
        tau = np.maximum(times[inside] - t_start, 0.0)
        C = fit_window(tau, y[inside], y_start, window, tol, cap)
        least = least_constant(tau, y[inside], y_start, window, tol, cap)
        env = envelope(times[inside], t_start, window, C, y_start) if math.isfinite(C) else \
            np.full(int(inside.sum()), math.inf)
        fits.append(GronwallFit(p, C, t_start, t_end, times[inside], y[inside], env, least))
        log.debug('window %d: C=%r least=%r (%d samples)', p, C, least, int(inside.sum()))
    return fits


def fit_gronwall_envelope(series, k, mag, tol=1e-3, cap=1e3):
    """\
    Envelope fits for y = 1 + mu_k on every window of length T_omega = pi/omega
    (one window over the whole run without a field).
    """
    if float(k) not in series.exponents:
        raise MissingHistoryError('series has no M_{:g} column'.format(k))
    times = series.times()
    window = mag.t_omega if mag.magnetised else max(float(times[-1]), 1e-300)
    return fit_gronwall_arrays(times, 1.0 + series.running_sup(k), window, tol, cap)


def verify_gronwall(series, k, mag, tol=1e-3, cap=1e3):
    fits = fit_gronwall_envelope(series, k, mag, tol, cap)
    worst = max(f.C for f in fits)
    report = EstimateReport('gronwall(k={:g})'.format(k), len(series), worst / cap,
                            fitted_constants={'C': worst})
    for f in fits:
        report.fitted_constants['C_window{}'.format(f.window)] = f.C
        report.fitted_constants['least_window{}'.format(f.window)] = f.least
    return report


def verify_moments_finite(series, mag):
    """Every recorded moment finite, including at the singular times."""
    values = np.array([list(r.m_k.values()) for r in series.records])
    finite = bool(np.all(np.isfinite(values)))
    report = EstimateReport('moments.finite', len(series), float(np.max(values)) if finite else math.inf,
                            threshold=math.inf)
    if mag.magnetised:
        singular = [t for t in series.times() if t > 0 and abs(t / mag.period - round(t / mag.period)) < 1e-9]
        report.notes.append('{} samples at singular times'.format(len(singular)))
    return report


def verify_conservation(series, mass_tol=1e-14, energy_tol=1e-3):
    """Relative drift of the mass M_0 and of the total energy."""
    reports = []
    if 0.0 in series.exponents:
        m0 = series.moment(0.0)
        drift = float(np.max(np.abs(m0 - m0[0])) / m0[0]) if m0[0] > 0 else 0.0
        reports.append(EstimateReport('conservation.mass', len(series), drift, threshold=mass_tol,
                                      fitted_constants={'drift': drift}))
    energies = series.energies()
    scale = abs(energies[0])
    drift = float(np.max(np.abs(energies - energies[0])) / scale) if scale > 0 else 0.0
    reports.append(EstimateReport('conservation.energy', len(series), drift, threshold=energy_tol,
                                  fitted_constants={'drift': drift}))
    return reports
