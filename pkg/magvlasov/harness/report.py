# report.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from magvlasov.utils import format_float


@dataclass
class EstimateReport:
    """\
    Outcome of one numerical check. `max_ratio` is the worst observed
    LHS/RHS ratio (or a normalised error), and the check passes when it is
    finite and at most `threshold`. A threshold of inf means only
    finiteness is asserted.
    """
    name: str
    samples: int
    max_ratio: float
    threshold: float = 1.0
    fitted_constants: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self):
        return math.isfinite(self.max_ratio) and self.max_ratio <= self.threshold

    @property
    def fitted_c(self):
        """The headline fitted constant (key 'C'), or None."""
        return self.fitted_constants.get('C')

    def record(self):
        """One key=value line describing the check."""
        items = [('name', self.name), ('samples', str(self.samples)),
                 ('max_ratio', format_float(self.max_ratio)), ('threshold', format_float(self.threshold)),
                 ('pass', 'true' if self.passed else 'false')]
        for key, value in self.fitted_constants.items():
            items.append((key, format_float(value)))
        if self.notes:
            items.append(('notes', '"{}"'.format('; '.join(self.notes).replace('"', "'"))))
        return ' '.join('{}={}'.format(k, v) for k, v in items)


@dataclass
class GronwallFit:
    """\
    Fitted double-exponential envelope on the window [t_start, t_end]:
    y(t) <= exp(C T exp(C tau)) y(t_start)^exp(C tau), tau = t - t_start.
    C is inf when no C below the cap works. `least` is the least constant
    for that full form, which may sit below C.
    """
    window: int
    C: float
    t_start: float
    t_end: float
    times: np.ndarray
    observed: np.ndarray
    envelope: np.ndarray
    least: float = math.nan

    @property
    def passed(self):
        return math.isfinite(self.C)


def first_failure(reports):
    for report in reports:
        if not report.passed:
            return report
    return None


def write_report(reports, path):
    with open(path, 'w') as f:
        for report in reports:
            f.write(report.record() + '\n')
    return path


def write_summary(reports, path):
    """Summary table: name, samples, max_ratio, fitted_C, pass."""
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['name', 'samples', 'max_ratio', 'fitted_C', 'pass'])
        for report in reports:
            c = report.fitted_c
            writer.writerow([report.name, report.samples, format_float(report.max_ratio),
                             '' if c is None else format_float(c), 'true' if report.passed else 'false'])
    return path
