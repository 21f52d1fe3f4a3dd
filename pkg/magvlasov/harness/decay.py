# decay.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

import logging
import math

import numpy as np

from magvlasov.errors import MissingHistoryError
from magvlasov.harness.report import EstimateReport

log = logging.getLogger('magvlasov.harness')


def power_profile(c, alpha):
    """h(r) = c (1 + r)^-alpha."""
    return lambda r: c * (1.0 + np.asarray(r, dtype=np.float64)) ** (-alpha)


def fit_profile_constant(tags, speeds, alpha):
    """Smallest c (up to a 1e-9 margin) with tag <= c (1 + |v|)^-alpha."""
    return float(np.max(tags * (1.0 + speeds) ** alpha)) * (1.0 + 1e-9)


def verify_decay_envelope(result, h=None, alpha=4.0, field_bound=None):
    """\
    Every marker's tag f_in(x_i(0), v_i(0)) must stay below
    h(max(0, |v_i(t)| - A_T t)) at every recorded frame, A_T bounding
    ||E||_inf over the run. h defaults to c (1 + r)^-alpha with c fitted
    to the initial data.
    """
    tags = result.initial.tags
    if tags is None:
        raise MissingHistoryError('decay check needs particle tags')
    if not result.trajectory:
        raise MissingHistoryError('decay check needs a run recorded with record_phase_space')
    if h is None:
        c = fit_profile_constant(tags, np.linalg.norm(result.initial.velocities, axis=1), alpha)
        h = power_profile(c, alpha)
    else:
        c = float('nan')
    a_t = field_bound
    if a_t is None:
        stored = max((r.e_norms.get(math.inf, 0.0) for r in result.series), default=0.0)
        a_t = max(stored, result.field_sup)
    worst = 0.0
    violations = 0
    for frame in result.trajectory:
        speed = np.linalg.norm(frame.velocities, axis=1)
        bound = np.asarray(h(np.maximum(0.0, speed - a_t * frame.t)))
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(bound > 0, tags / bound, np.where(tags > 0, np.inf, 0.0))
        violations += int(np.count_nonzero(ratio > 1.0 + 1e-12))
        worst = max(worst, float(np.max(ratio)))
    report = EstimateReport('decay', len(tags) * len(result.trajectory), worst, threshold=1.0 + 1e-12,
                            fitted_constants={'A_T': a_t, 'violations': float(violations)})
    if math.isfinite(c):
        report.fitted_constants['c'] = c
    log.info('decay: A_T=%.6g worst ratio %.6g, %d violations', a_t, worst, violations)
    return report
