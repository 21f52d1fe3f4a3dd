# kinematics_suite.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Randomised checks of the closed-form magnetised characteristics and the
# kernels built on them. Every check returns an EstimateReport whose
# max_ratio is the worst error divided by its tolerance.

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from magvlasov.harness.report import EstimateReport
from magvlasov.kinematics import (MagneticConfig, flow, gyro_factors, jacobian_psi_abs, kernel_d, kernel_h,
                                  rescaled_factor, rotate_velocity, singular_amplification, xstar, zeta)

log = logging.getLogger('magvlasov.harness')

GROUP_TOL = 1e-12
VOLUME_TOL = 1e-8
SPEED_TOL = 1e-13
XSTAR_TOL = 1e-12
KERNEL_TOL = 1e-14
JACOBIAN_TOL = 1e-6
CONTINUITY_TOL = 1e-6
ODE_TOL = 1e-9

OMEGAS = (0.0, 0.1, 1.0, 10.0)


def _relative(a, b):
    # componentwise error, relative to max(1, |b|)
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))) if a.size else 0.0


def _phase_points(rng, n):
    return rng.uniform(-5.0, 5.0, (n, 3)), rng.uniform(-3.0, 3.0, (n, 3))


def check_group_law(samples=1000, seed=0, omegas=OMEGAS):
    """flow(s2; s1, flow(s1; t, p)) == flow(s2; t, p)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for omega in omegas:
        mag = MagneticConfig(omega)
        x, v = _phase_points(rng, samples)
        t, s1, s2 = (rng.uniform(-10.0, 10.0, samples) for _ in range(3))
        mid = flow(t, s1, (x, v), mag)
        two = flow(s1, s2, mid, mag)
        one = flow(t, s2, (x, v), mag)
        worst = max(worst, _relative(two.X, one.X), _relative(two.V, one.V))
    return EstimateReport('kinematics.group_law', samples * len(omegas), worst / GROUP_TOL,
                          fitted_constants={'error': worst})


def check_volume(samples=1000, seed=1, omegas=OMEGAS, step=1e-3):
    """\
    The phase-space flow is affine, so a central-difference Jacobian is
    exact up to rounding; its determinant must be 1.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for omega in omegas:
        mag = MagneticConfig(omega)
        x, v = _phase_points(rng, samples)
        t, s = rng.uniform(-10.0, 10.0, samples), rng.uniform(-10.0, 10.0, samples)
        p = np.concatenate([x, v], axis=1)
        jac = np.empty((samples, 6, 6))
        for j in range(6):
            dp = np.zeros(6)
            dp[j] = step
            plus = flow(t, s, ((p + dp)[:, :3], (p + dp)[:, 3:]), mag)
            minus = flow(t, s, ((p - dp)[:, :3], (p - dp)[:, 3:]), mag)
            jac[:, :3, j] = (plus.X - minus.X) / (2 * step)
            jac[:, 3:, j] = (plus.V - minus.V) / (2 * step)
        worst = max(worst, float(np.max(np.abs(np.linalg.det(jac) - 1.0))))
    return EstimateReport('kinematics.volume', samples * len(omegas), worst / VOLUME_TOL,
                          fitted_constants={'error': worst})


def check_speed(samples=1000, seed=2, omegas=OMEGAS):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for omega in omegas:
        mag = MagneticConfig(omega)
        _, v = _phase_points(rng, samples)
        t, s = rng.uniform(-10.0, 10.0, samples), rng.uniform(-10.0, 10.0, samples)
        speed = np.linalg.norm(v, axis=1)
        rotated = np.linalg.norm(rotate_velocity(s, t, v, mag), axis=1)
        worst = max(worst, float(np.max(np.abs(rotated - speed) / speed)))
    return EstimateReport('kinematics.speed', samples * len(omegas), worst / SPEED_TOL,
                          fitted_constants={'error': worst})


def check_xstar(samples=1000, seed=3, omegas=OMEGAS):
    """X(s; t, x, v) == X*(t - s, x, V(s; t, x, v)) for 0 <= s <= t."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for omega in omegas:
        mag = MagneticConfig(omega)
        x, v = _phase_points(rng, samples)
        t = rng.uniform(0.0, 10.0, samples)
        s = t * rng.random(samples)
        X = flow(t, s, (x, v), mag).X
        V = rotate_velocity(s, t, v, mag)
        worst = max(worst, _relative(xstar(t - s, x, V, mag), X))
    return EstimateReport('kinematics.xstar', samples * len(omegas), worst / XSTAR_TOL,
                          fitted_constants={'error': worst})


def check_kernel_identity(samples=1000, seed=4, omegas=OMEGAS):
    """kernel_d(t - s, s, e) == kernel_h(t, t - s, e)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for omega in omegas:
        mag = MagneticConfig(omega)
        t = rng.uniform(0.0, 5.0, samples)
        s = t * rng.random(samples)
        e = rng.uniform(-1.0, 1.0, (samples, 3))
        worst = max(worst, _relative(kernel_d(t - s, s, e, mag), kernel_h(t, t - s, e, mag)))
    return EstimateReport('kinematics.kernel_identity', samples * len(omegas), worst / KERNEL_TOL,
                          fitted_constants={'error': worst})


def check_jacobian(samples=200, seed=5, omegas=(0.1, 1.0, 10.0), step=1e-3):
    """Finite-difference det of v -> X*(s, x, v) against jacobian_psi_abs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for omega in omegas:
        mag = MagneticConfig(omega)
        x = rng.uniform(-1.0, 1.0, (samples, 3))
        v = rng.uniform(-1.0, 1.0, (samples, 3))
        s = rng.uniform(0.01, 2 * math.pi - 0.01, samples) / omega
        jac = np.empty((samples, 3, 3))
        for j in range(3):
            dv = np.zeros(3)
            dv[j] = step
            jac[:, :, j] = (xstar(s, x, v + dv, mag) - xstar(s, x, v - dv, mag)) / (2 * step)
        numeric = np.abs(np.linalg.det(jac))
        exact = np.asarray(jacobian_psi_abs(s, mag))
        worst = max(worst, float(np.max(np.abs(numeric - exact) / exact)))
    return EstimateReport('kinematics.jacobian', samples * len(omegas), worst / JACOBIAN_TOL,
                          fitted_constants={'error': worst})


def check_continuity(samples=200, seed=6, omega=1e-8, d=3.0):
    """\
    Every operation at a tiny omega agrees with its unmagnetised branch.
    zeta is compared in the jacobian convention, the one that is continuous.
    """
    rng = np.random.default_rng(seed)
    weak, free = MagneticConfig(omega), MagneticConfig(0.0)
    x, v = _phase_points(rng, samples)
    # the omega-corrections grow like omega * s^2, keep s moderate
    t = rng.uniform(0.0, 2.0, samples)
    s = rng.uniform(0.1, 2.0, samples)
    e = rng.uniform(-1.0, 1.0, (samples, 3))
    errors = {
        'flow': max(_relative(a, b) for a, b in zip(flow(t, s, (x, v), weak), flow(t, s, (x, v), free))),
        'xstar': _relative(xstar(s, x, v, weak), xstar(s, x, v, free)),
        'kernel_h': _relative(kernel_h(t, s, e, weak), kernel_h(t, s, e, free)),
        'kernel_d': _relative(kernel_d(t, s, e, weak), kernel_d(t, s, e, free)),
        'gyro_factors': max(_relative(a, b) for a, b in zip(gyro_factors(s, weak), gyro_factors(s, free))),
    }
    for name, fn in (('jacobian', jacobian_psi_abs), ('amplification', singular_amplification)):
        a, b = np.asarray(fn(s, weak)), np.asarray(fn(s, free))
        errors[name] = float(np.max(np.abs(a - b) / np.abs(b)))
    a = np.asarray(zeta(s, weak, d, convention='jacobian'))
    b = np.asarray(zeta(s, free, d, convention='jacobian'))
    errors['zeta'] = float(np.max(np.abs(a - b) / np.abs(b)))
    worst = max(errors.values())
    report = EstimateReport('kinematics.continuity', samples, worst / CONTINUITY_TOL,
                            fitted_constants={'error': worst})
    report.notes.append('worst: {}'.format(max(errors, key=errors.get)))
    return report


def check_bounded_factor(points=2000, d_values=(2.0, 3.0, 3.5, 3.75)):
    """The rescaled small-time factor on (0, pi] peaks at u = pi."""
    u = np.linspace(math.pi / points, math.pi, points)
    worst = 0.0
    for d in d_values:
        values = np.asarray(rescaled_factor(u, d))
        worst = max(worst, float(values.max() / rescaled_factor(math.pi, d)))
    return EstimateReport('kinematics.bounded_factor', points * len(d_values), worst,
                          threshold=1.0 + 1e-12, fitted_constants={'C': worst})


def _lorentz(omega):
    def rhs(_t, y):
        state = y.reshape(-1, 6)
        out = np.empty_like(state)
        out[:, :3] = state[:, 3:]
        out[:, 3] = omega * state[:, 4]
        out[:, 4] = -omega * state[:, 3]
        out[:, 5] = 0.0
        return out.ravel()
    return rhs


def check_ode(samples=1000, seed=7, omegas=(0.1, 1.0, 10.0)):
    """\
    The closed form against a high-order adaptive integration of
    x' = v, v' = v x B over one cyclotron period.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for omega in omegas:
        mag = MagneticConfig(omega)
        x, v = _phase_points(rng, samples)
        period = mag.period
        y0 = np.concatenate([x, v], axis=1).ravel()
        sol = solve_ivp(_lorentz(omega), (0.0, period), y0, method='DOP853', rtol=1e-12, atol=1e-12,
                        t_eval=[0.5 * period, period])
        if not sol.success:
            log.warning('ODE reference failed for omega=%r: %s', omega, sol.message)
            worst = math.inf
            continue
        for column, s in enumerate((0.5 * period, period)):
            numeric = sol.y[:, column].reshape(-1, 6)
            exact = flow(0.0, s, (x, v), mag)
            worst = max(worst, _relative(numeric[:, :3], exact.X), _relative(numeric[:, 3:], exact.V))
    return EstimateReport('kinematics.ode', samples * len(omegas), worst / ODE_TOL,
                          fitted_constants={'error': worst})


def verify_kinematics(samples=1000, seed=0):
    """Runs every kinematics check; returns the list of reports."""
    reports = [
        check_group_law(samples, seed),
        check_volume(samples, seed + 1),
        check_speed(samples, seed + 2),
        check_xstar(samples, seed + 3),
        check_kernel_identity(samples, seed + 4),
        check_jacobian(max(1, samples // 5), seed + 5),
        check_continuity(max(1, samples // 5), seed + 6),
        check_bounded_factor(),
        check_ode(samples, seed + 7),
    ]
    for r in reports:
        log.info('%s: max_ratio=%.3g (%s)', r.name, r.max_ratio, 'pass' if r.passed else 'FAIL')
    return reports
