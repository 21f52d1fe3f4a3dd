import math
import os

import numpy as np
import pytest

from magvlasov.config import parse_config
from magvlasov.ensemble import MomentRecord, MomentSeries, run
from magvlasov.errors import EmptyWindowError, MissingHistoryError
from magvlasov.harness.gronwall import (envelope, fit_gronwall_arrays, fit_gronwall_envelope, fit_window,
                                        verify_conservation, verify_gronwall, verify_moments_finite)
from magvlasov.kinematics import MagneticConfig

UNIT = MagneticConfig(1.0)
REFERENCE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs', 'reference.ini')


def _series(times, m4, energies=None, m0=None):
    series = MomentSeries()
    for i, t in enumerate(times):
        m_k = {0.0: 1.0 if m0 is None else m0[i], 4.0: m4[i]}
        energy = 1.0 if energies is None else energies[i]
        series.append(MomentRecord(t, m_k, energy, {7.0: 0.1, math.inf: 0.1}, 0.1))
    return series


def test_constant_samples_need_no_growth():
    tau = np.linspace(0.0, 1.0, 10)
    assert fit_window(tau, np.ones(10), 1.0, 1.0) == 0.0
    assert fit_window(tau, np.full(10, 2.0), 2.0, 1.0) == 0.0


def test_fit_recovers_exact_envelope():
    # y already above y_start at tau = 0, so only the full form fits
    c, window, y0, tol = 0.5, math.pi, 1.5, 1e-3
    times = np.linspace(0.0, window, 50)
    y = envelope(times, 0.0, window, c, y0)
    C = fit_window(times, y, y0, window, tol=tol)
    assert c - 1e-9 <= C <= c + tol
    # the fitted envelope covers every sample
    assert np.all(envelope(times, 0.0, window, C, y0) >= y * (1 - 1e-12))


@pytest.mark.parametrize('span', [2.0, math.pi])
def test_fit_bounds_double_exponential_growth(span):
    c, tol = 0.3, 1e-3
    times = np.linspace(0.0, span, 60)
    y = 1.2 ** np.exp(c * times)
    fits = fit_gronwall_arrays(times, y, span, tol=tol)
    assert len(fits) == 1
    assert c - 1e-9 <= fits[0].C <= c + tol
    assert fits[0].passed
    assert fits[0].least <= fits[0].C
    assert np.all(fits[0].envelope >= y * (1 - 1e-12))


def test_growth_fit_recovers_rate_in_later_window():
    c, tol = 0.2, 1e-3
    times = np.linspace(0.0, 2 * math.pi, 81)
    y = 1.5 ** np.exp(c * times)
    fits = fit_gronwall_arrays(times, y, math.pi, tol=tol)
    assert len(fits) == 2
    for f in fits:
        assert c - 1e-9 <= f.C <= c + tol


def test_fit_gives_up_above_cap():
    C = fit_window([0.0, 1e-6], [1.0, 1e300], 1.0, 1.0, cap=1.0)
    assert C == math.inf


def test_windows():
    times = np.linspace(0.0, 3 * math.pi, 31)
    y = 1.0 + times
    fits = fit_gronwall_arrays(times, y, math.pi)
    assert [f.window for f in fits] == [0, 1, 2]
    assert fits[1].t_start == pytest.approx(math.pi)
    assert all(f.passed for f in fits)
    for f in fits:
        assert np.all(f.envelope >= f.observed * (1 - 1e-12))


def test_bad_samples():
    with pytest.raises(EmptyWindowError):
        fit_gronwall_arrays([], [], 1.0)
    with pytest.raises(EmptyWindowError):
        fit_gronwall_arrays([0.0, 0.1, 5.0], [1.0, 1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        fit_gronwall_arrays([0.0, 0.0], [1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        fit_gronwall_arrays([0.0, 1.0], [1.0, 0.5], 1.0)


def test_envelope_on_series():
    times = np.linspace(0.0, 2 * math.pi, 21)
    series = _series(times, 2.0 + np.sin(times))
    fits = fit_gronwall_envelope(series, 4, UNIT)
    assert len(fits) == 2
    report = verify_gronwall(series, 4, UNIT)
    assert report.passed, report.record()
    assert 'C_window1' in report.fitted_constants
    with pytest.raises(MissingHistoryError):
        fit_gronwall_envelope(series, 3, UNIT)


def test_without_field_one_window():
    times = np.linspace(0.0, 10.0, 11)
    fits = fit_gronwall_envelope(_series(times, np.ones(11)), 4, MagneticConfig(0.0))
    assert len(fits) == 1
    assert fits[0].C == 0.0


def test_moments_finite():
    times = [0.0, 1.0, 2 * math.pi]
    report = verify_moments_finite(_series(times, [1.0, 2.0, 3.0]), UNIT)
    assert report.passed
    assert report.notes == ['1 samples at singular times']
    assert not verify_moments_finite(_series(times, [1.0, math.inf, 3.0]), UNIT).passed


def test_conservation():
    times = [0.0, 1.0, 2.0]
    mass, energy = verify_conservation(_series(times, [1.0] * 3, energies=[2.0, 2.001, 1.9995]))
    assert mass.passed and mass.max_ratio == 0.0
    assert energy.max_ratio == pytest.approx(5e-4)
    assert energy.passed
    mass, energy = verify_conservation(_series(times, [1.0] * 3, energies=[2.0, 2.1, 2.0], m0=[1.0, 1.0, 0.9]))
    assert not mass.passed
    assert not energy.passed


@pytest.mark.slow
def test_reference_run_moments_and_conservation():
    config = parse_config(REFERENCE)
    assert config.run.n == 100000 and config.run.t_end == pytest.approx(3 * math.pi)
    series = run(config.run).series
    assert verify_moments_finite(series, config.mag).passed
    for k in (2.0, 3.5, 4.0, 6.0):
        assert np.all(np.isfinite(series.moment(k)))
    fits = fit_gronwall_envelope(series, config.harness.k, config.mag, config.harness.gronwall_tol)
    assert len(fits) == 3
    assert all(f.passed for f in fits)
    mass, energy = verify_conservation(series)
    assert mass.max_ratio <= 1e-14
    assert energy.max_ratio <= 1e-3, energy.record()
