# stability.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

import logging
import math

import numpy as np

from magvlasov.ensemble import paired_runs, stability_q
from magvlasov.harness.report import EstimateReport

log = logging.getLogger('magvlasov.harness')


def log_envelope_constant(times, q):
    """\
    Least C >= 0 with L(t) >= L(0) exp(-C t), L = 1 + ln(1/Q), at every
    sample with t > 0. inf when L(t) or L(0) is not positive.
    """
    times = np.asarray(times, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if np.any(q <= 0):
        return math.inf
    L = 1.0 + np.log(1.0 / q)
    if L[0] <= 0 or np.any(L <= 0):
        return math.inf
    later = times > 0
    if not later.any():
        return 0.0
    return max(0.0, float(np.max(np.log(L[0] / L[later]) / times[later])))


def verify_stability_envelope(q_series, cap=1e3, ceiling=1e-3):
    """\
    Passes when the fitted log-envelope constant is at most `cap` and the
    final Q stays below `ceiling`. Q identically 0 (identical runs) passes
    trivially.
    """
    times, q = np.asarray(q_series.times), np.asarray(q_series.q)
    if not np.any(q):
        report = EstimateReport('stability', len(q), 0.0, fitted_constants={'C': 0.0, 'Q_end': 0.0})
        report.notes.append('identical runs, Q = 0')
        return report
    C = log_envelope_constant(times, q)
    q_end = float(q[-1])
    report = EstimateReport('stability', len(q), max(C / cap, q_end / ceiling),
                            fitted_constants={'C': C, 'Q_0': float(q[0]), 'Q_end': q_end})
    log.info('stability: C=%.6g Q(0)=%.3g Q(T)=%.3g', C, q[0], q_end)
    return report


def verify_stability(config, delta=1e-6, cap=1e3, ceiling=1e-3):
    """\
    Runs `config` twice, the second time with every marker moved by delta
    along the first axis (or by the configured perturbation when one is
    set), and checks Q between the two runs.
    """
    shift = tuple(config.position_shift)
    vshift = tuple(config.velocity_shift)
    if not any(shift) and not any(vshift):
        shift = (delta, 0.0, 0.0)
    base, shifted = paired_runs(config, shift, vshift)
    series = stability_q(base, shifted, base.initial.weights)
    return verify_stability_envelope(series, cap, ceiling), series
