import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from magvlasov.errors import SingularTimeError
from magvlasov.harness import kinematics_suite
from magvlasov.kinematics import (MagneticConfig, TAYLOR_THRESHOLD, flow, gyro_factors, gyro_ratio,
                                  jacobian_psi_abs, kernel_d, kernel_h, near_singular, rescaled_factor,
                                  rotate_velocity, singular_amplification, singular_distance, xstar, zeta)

UNIT = MagneticConfig(1.0)
FREE = MagneticConfig(0.0)


def test_magnetic_config():
    assert UNIT.magnetised
    assert UNIT.t_omega == pytest.approx(math.pi)
    assert UNIT.period == pytest.approx(2 * math.pi)
    assert FREE.t_omega is None and FREE.period is None
    assert FREE.singular_times(100.0) == []
    assert_allclose(UNIT.singular_times(4 * math.pi), [2 * math.pi, 4 * math.pi])
    with pytest.raises(ValueError):
        MagneticConfig(-1.0)
    with pytest.raises(ValueError):
        MagneticConfig(math.inf)


def test_gyro_factors_without_field():
    theta = np.linspace(-3.0, 3.0, 7)
    S, C = gyro_factors(theta, FREE)
    assert_array_equal(S, theta)
    assert_array_equal(C, np.zeros_like(theta))


def test_gyro_factors_across_taylor_threshold():
    mag = MagneticConfig(2.0)
    theta = np.array([0.999, 1.001]) * TAYLOR_THRESHOLD / mag.omega
    S, C = gyro_factors(theta, mag)
    u = mag.omega * theta
    assert_allclose(S, np.sin(u) / mag.omega, rtol=1e-12)
    assert_allclose(C, (1 - np.cos(u)) / mag.omega, rtol=1e-7)


def test_flow_identity_and_rotation():
    x = np.array([1.0, -2.0, 0.5])
    v = np.array([0.3, 0.4, -1.0])
    X, V = flow(1.5, 1.5, (x, v), UNIT)
    assert_allclose(X, x, atol=1e-15)
    assert_allclose(V, v, atol=1e-15)
    # after one full period the perpendicular motion closes, parallel drifts
    X, V = flow(0.0, 2 * math.pi, (x, v), UNIT)
    assert_allclose(X, x + np.array([0.0, 0.0, -2 * math.pi]), atol=1e-12)
    assert_allclose(V, v, atol=1e-12)


def test_flow_without_field_is_straight():
    x = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    v = np.array([[1.0, 2.0, 3.0], [-1.0, 0.0, 0.5]])
    X, V = flow(0.0, 2.0, (x, v), FREE)
    assert_allclose(X, x + 2.0 * v)
    assert_allclose(V, v)


def test_rotate_velocity_quarter_turn():
    v = np.array([1.0, 0.0, 2.0])
    assert_allclose(rotate_velocity(math.pi / 2, 0.0, v, UNIT), [0.0, -1.0, 2.0], atol=1e-15)


def test_kernels():
    e = np.array([0.2, -0.7, 1.1])
    assert_allclose(kernel_h(2.0, 2.0, e, UNIT), np.zeros(3), atol=0)
    assert_allclose(kernel_h(3.0, 1.0, e, FREE), -2.0 * e)
    assert_allclose(kernel_d(1.0, 0.5, e, UNIT), kernel_h(1.5, 1.0, e, UNIT), atol=1e-15)
    with pytest.raises(ValueError):
        kernel_d(1.0, -0.5, e, UNIT)
    with pytest.raises(ValueError):
        xstar(-1.0, e, e, UNIT)


def test_jacobian_and_ratio_at_half_period():
    mag = MagneticConfig(2.0)
    s = math.pi / mag.omega
    assert jacobian_psi_abs(s, mag) == pytest.approx(4 * s / mag.omega ** 2, rel=1e-14)
    assert gyro_ratio(math.pi, UNIT) == pytest.approx(math.pi ** 2 / 4, rel=1e-14)
    assert jacobian_psi_abs(0.7, FREE) == pytest.approx(0.7 ** 3)
    assert singular_amplification(2.0, FREE) == pytest.approx(math.sqrt(2) / 2.0)


def test_singular_guard():
    period = 2 * math.pi
    with pytest.raises(SingularTimeError):
        gyro_ratio(period, UNIT)
    with pytest.raises(SingularTimeError):
        zeta(period * (1 + 1e-9), UNIT, 3.0)
    assert math.isfinite(gyro_ratio(period * (1 + 1e-6), UNIT))
    assert near_singular(period * (1 - 1e-10), UNIT)
    assert not near_singular(math.pi, UNIT)
    assert singular_distance(5.0, FREE) == math.inf
    with pytest.raises(ValueError):
        gyro_ratio(0.0, UNIT)


def test_zeta_conventions():
    mag = MagneticConfig(2.0)
    for d in (2.0, 3.0, 3.75):
        cosine = zeta(0.7, mag, d)
        jacobian = zeta(0.7, mag, d, convention='jacobian')
        assert jacobian == pytest.approx((mag.omega ** 2 / 2) ** (1 / d) * cosine, rel=1e-12)
    assert zeta(0.5, FREE, 3.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        zeta(0.5, mag, 3.0, convention='other')


def test_rescaled_factor():
    assert rescaled_factor(math.pi, 2.0) == pytest.approx(math.sqrt(math.pi ** 2 / 2), rel=1e-14)
    assert rescaled_factor(1e-6, 3.0) == pytest.approx(2 ** (1 / 3), rel=1e-9)


@pytest.mark.parametrize('check', [
    kinematics_suite.check_group_law,
    kinematics_suite.check_volume,
    kinematics_suite.check_speed,
    kinematics_suite.check_xstar,
    kinematics_suite.check_kernel_identity,
])
def test_randomised_identities(check):
    report = check(samples=200)
    assert report.passed, report.record()


def test_jacobian_finite_differences():
    report = kinematics_suite.check_jacobian(samples=50)
    assert report.passed, report.record()


def test_continuity_as_field_vanishes():
    report = kinematics_suite.check_continuity(samples=50)
    assert report.passed, report.record()


def test_bounded_factor_peaks_at_pi():
    assert kinematics_suite.check_bounded_factor(points=500).passed


def test_closed_form_matches_ode():
    report = kinematics_suite.check_ode(samples=20)
    assert report.passed, report.record()
