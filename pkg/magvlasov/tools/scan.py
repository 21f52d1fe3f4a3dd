# scan.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

import csv
import logging
import math
from typing import NamedTuple

import numpy as np

from magvlasov.errors import SingularTimeError
from magvlasov.harness.report import EstimateReport
from magvlasov.kinematics import jacobian_psi_abs, near_singular, singular_amplification, zeta
from magvlasov.utils import format_float

log = logging.getLogger('magvlasov.tools')

HEADER = ('s', 'jacobian', 'amplification', 'zeta')


class ScanRow(NamedTuple):
    s: float
    jacobian: float
    amplification: float
    zeta: float


def scan_points(mag, points=400, decades=8):
    """\
    Uniform points on (0, 4 pi / omega) plus pi/omega and points
    approaching 2 pi/omega geometrically from both sides.
    """
    period = mag.period
    uniform = np.linspace(0.0, 2.0 * period, points + 1, endpoint=False)[1:]
    offsets = 10.0 ** -np.arange(1, decades + 1)
    refined = np.concatenate([period * (1.0 - offsets), period * (1.0 + offsets)])
    s = np.unique(np.concatenate([uniform, refined, [0.5 * period]]))
    return s[~near_singular(s, mag)]


def scan_singularity(mag, d=3.0, points=400, decades=8):
    """\
    Rows (s, |jacobian|, amplification, zeta) across the first two
    cyclotron periods. Points inside the singular guard band are skipped.
    """
    if not mag.magnetised:
        raise ValueError('scan-singularity needs omega > 0')
    rows = []
    for s in scan_points(mag, points, decades):
        try:
            rows.append(ScanRow(float(s), float(jacobian_psi_abs(s, mag)), float(singular_amplification(s, mag)),
                                float(zeta(s, mag, d))))
        except SingularTimeError as e:
            log.debug('skipped s=%r: %s', s, e)
    log.info('scanned %d points for omega=%r', len(rows), mag.omega)
    return rows


def write_scan(rows, path):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow([format_float(x) for x in row])
    return path


def check_approach(rows, mag):
    """Amplification non-decreasing over the last decade before 2 pi/omega."""
    period = mag.period
    tail = [r.amplification for r in rows if 0.9 * period <= r.s < period]
    steps = np.diff(tail)
    worst = float(-steps.min()) if steps.size else 0.0
    report = EstimateReport('scan.approach', len(tail), max(0.0, worst), threshold=0.0,
                            fitted_constants={'peak': max(tail) if tail else math.nan})
    return report
