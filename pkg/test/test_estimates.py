import math

import numpy as np
import pytest

from magvlasov.config import HarnessConfig
from magvlasov.ensemble import MomentRecord, MomentSeries
from magvlasov.errors import ExponentError, MissingHistoryError, OrderingError
from magvlasov.harness.estimates import (LARGE_TIME_BOUND, derived_l, field_constant, large_time_ratio,
                                         select_t0, small_time_ratio, verify_estimates,
                                         verify_field_estimates, verify_large_time_grid,
                                         verify_large_time_log, verify_small_time_bound, verify_t0_rule)
from magvlasov.kinematics import MagneticConfig

UNIT = MagneticConfig(1.0)
FREE = MagneticConfig(0.0)


def _series(times, m4, e7, e2=None, energy=1.0):
    series = MomentSeries()
    for i, t in enumerate(times):
        norms = {7.0: e7[i], 2.0: 0.5 if e2 is None else e2[i], 3.0: 0.5, 3.5: 0.5, 3.75: 0.5, math.inf: 1.0}
        series.append(MomentRecord(t, {0.0: 1.0, 4.0: m4[i]}, energy, norms, 0.1))
    return series


def test_select_t0():
    assert derived_l(4, 3) == pytest.approx(11.0)
    mu = math.exp(7.0 / 6.0) - 1.0
    assert select_t0(2.0, mu, 4, 3, l=11) == pytest.approx(2.0 / math.e, rel=1e-12)
    assert select_t0(2.0, 0.0, 4, 3) == 2.0
    with pytest.raises(ExponentError):
        select_t0(1.0, 1.0, 4, 3, l=10)
    with pytest.raises(ExponentError):
        select_t0(1.0, 1.0, 4, 1.5)
    with pytest.raises(ValueError):
        select_t0(0.0, 1.0, 4, 3)
    with pytest.raises(ValueError):
        select_t0(1.0, -1.0, 4, 3)


def test_t0_rule():
    report = verify_t0_rule(samples=50)
    assert report.passed, report.record()


def test_small_time_without_field():
    for d in (2.0, 3.0, 3.75):
        assert small_time_ratio(FREE, d, 0.3) == pytest.approx(1.0 / (2.0 - 3.0 / d), rel=1e-8)


def test_small_time_ratio_depends_on_omega_t0():
    a = small_time_ratio(MagneticConfig(1.0), 3.0, 1.0)
    b = small_time_ratio(MagneticConfig(4.0), 3.0, 0.25)
    assert a == pytest.approx(b, rel=1e-8)
    assert small_time_ratio(UNIT, 3.0, 1e-4) == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize('mag', [FREE, UNIT, MagneticConfig(5.0)])
@pytest.mark.parametrize('d', [2.0, 3.0, 3.5, 3.75])
def test_small_time_bound(mag, d):
    window = mag.t_omega or 1.0
    report = verify_small_time_bound(mag, d, window * np.geomspace(1e-3, 1.0, 8))
    assert report.passed, report.record()


def test_small_time_bound_rejects_bad_input():
    with pytest.raises(ValueError):
        verify_small_time_bound(UNIT, 3.0, [4.0])
    with pytest.raises(ValueError):
        verify_small_time_bound(UNIT, 3.0, [0.0, 1.0])
    with pytest.raises(ExponentError):
        verify_small_time_bound(UNIT, 1.0, [1.0])


def test_large_time_without_field():
    assert large_time_ratio(FREE, 0.1, 5.0) == pytest.approx(2.0 ** (2.0 / 3.0), rel=1e-8)


def test_large_time_log():
    report = verify_large_time_log(UNIT, 3.0, 0.01, math.pi)
    assert report.passed, report.record()
    assert report.max_ratio > 2.0 ** (2.0 / 3.0)
    report = verify_large_time_log(UNIT, 3.0, 1.0, 1.0)
    assert report.max_ratio == 0.0 and report.passed
    with pytest.raises(OrderingError):
        verify_large_time_log(UNIT, 3.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        verify_large_time_log(UNIT, 3.0, 0.1, 4.0)


@pytest.mark.parametrize('mag', [FREE, UNIT, MagneticConfig(0.1)])
def test_large_time_grid(mag):
    report = verify_large_time_grid(mag, 3.0)
    assert report.passed, report.record()
    assert report.threshold == LARGE_TIME_BOUND


def test_field_constant():
    times = np.linspace(0.0, 1.0, 5)
    m4 = np.array([1.0, 3.0, 2.0, 7.0, 7.0])
    series = _series(times, m4, np.full(5, 2.0))
    mu = np.maximum.accumulate(m4)
    expected = np.max(2.0 / ((1 + mu) ** (1 / 7) * (1 + np.log1p(mu))))
    assert field_constant(series, 4, FREE) == pytest.approx(expected)
    with pytest.raises(MissingHistoryError):
        field_constant(series, 6, FREE)


def test_field_constant_skips_singular_samples():
    times = np.array([1.0, 2 * math.pi])
    series = _series(times, [1.0, 1.0], [1.0, 100.0])
    assert field_constant(series, 4, UNIT) == pytest.approx(1.0 / (2 ** (1 / 7) * (1 + math.log(2))))


def test_field_estimates():
    times = np.linspace(0.0, 1.0, 4)
    series = _series(times, np.ones(4), np.full(4, 0.3), e2=np.full(4, 1.0), energy=1.0)
    reports = verify_field_estimates(series, 4, FREE)
    assert [r.name for r in reports] == ['fields.norms_finite', 'fields.energy_bound', 'fields.fitted_constant(k=4)']
    assert all(r.passed for r in reports)
    # ||E||_2 above sqrt(2 energy) breaks the bound
    broken = _series(times, np.ones(4), np.full(4, 0.3), e2=np.full(4, 2.0), energy=1.0)
    assert not verify_field_estimates(broken, 4, FREE)[1].passed
    reference = _series(times, np.ones(4), np.full(4, 0.9))
    report = verify_field_estimates(series, 4, FREE, reference=reference, fit_ratio=2.0)[-1]
    assert report.max_ratio == pytest.approx(3.0)
    assert not report.passed
    with pytest.raises(MissingHistoryError):
        verify_field_estimates(series, 4, FREE, d_grid=(5.0,))


def test_verify_estimates():
    harness = HarnessConfig.from_values(d_grid=(2.0, 3.75))
    reports = verify_estimates(UNIT, harness, t0_points=6)
    assert len(reports) == 5
    assert all(r.passed for r in reports), [r.record() for r in reports if not r.passed]
