import math

import numpy as np
import pytest

from magvlasov.kinematics import MagneticConfig, near_singular
from magvlasov.tools.scan import HEADER, check_approach, scan_points, scan_singularity, write_scan

UNIT = MagneticConfig(1.0)


def test_scan_points():
    s = scan_points(UNIT, points=100)
    assert np.all(np.diff(s) > 0)
    assert not np.any(near_singular(s, UNIT))
    assert math.pi in s
    assert s.max() < 4 * math.pi


def test_scan_rows():
    rows = scan_singularity(MagneticConfig(2.0), d=3.0, points=100)
    assert rows
    period = math.pi
    peak = max(rows, key=lambda r: r.amplification)
    assert abs(peak.s / period - 1.0) < 1e-6
    half = min(rows, key=lambda r: abs(r.s - period / 2))
    assert half.jacobian == pytest.approx(4 * half.s / 4.0, rel=1e-12)
    report = check_approach(rows, MagneticConfig(2.0))
    assert report.passed, report.record()


def test_scan_needs_field():
    with pytest.raises(ValueError):
        scan_singularity(MagneticConfig(0.0))


def test_write_scan(tmp_path):
    rows = scan_singularity(UNIT, points=20, decades=3)
    path = write_scan(rows, str(tmp_path / 'scan.csv'))
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == ','.join(HEADER)
    assert len(lines) == len(rows) + 1
    assert float(lines[1].split(',')[0]) == rows[0].s
