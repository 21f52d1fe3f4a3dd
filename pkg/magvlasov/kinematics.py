# kinematics.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Closed-form characteristics of the Vlasov equation in the uniform magnetic
# field B = (0, 0, omega), the rotation change of variables used to invert
# them, the time kernels applied to the electric field, and the Jacobian and
# amplification factors which blow up at multiples of the cyclotron period.
#
# Every function here accepts either a single triple or an (..., 3) array of
# triples, so the same code paths serve single phase points and whole
# particle ensembles.

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from magvlasov.errors import SingularTimeError

# below this value of |omega * theta| the gyro factors are summed as Taylor
# series instead of being evaluated directly
TAYLOR_THRESHOLD = 1e-4

# relative width (in units of the cyclotron period) of the band around each
# singular time which the inverting operations refuse to enter
SINGULAR_GUARD = 1e-8

ZETA_CONVENTIONS = ('cosine', 'jacobian')


@dataclass(frozen=True)
class MagneticConfig:
    """\
    Uniform axial magnetic field, described by its cyclotron frequency. The
    field is unmagnetised when omega is 0; in that case there are no
    singular times and t_omega is None.
    """
    omega: float = 0.0

    def __post_init__(self):
        omega = float(self.omega)
        if not math.isfinite(omega) or omega < 0:
            raise ValueError('omega must be finite and >= 0, got {!r}'.format(self.omega))
        object.__setattr__(self, 'omega', omega)

    @property
    def magnetised(self):
        return self.omega > 0

    @property
    def t_omega(self) -> Optional[float]:
        """Length of the safe window, pi/omega."""
        if self.omega == 0:
            return None
        return math.pi / self.omega

    @property
    def period(self) -> Optional[float]:
        """Cyclotron period 2*pi/omega."""
        if self.omega == 0:
            return None
        return 2 * math.pi / self.omega

    def singular_times(self, t_end, t_start=0.0):
        """Multiples of the cyclotron period in (t_start, t_end]."""
        if self.omega == 0:
            return []
        period = self.period
        k = math.floor(t_start / period) + 1
        times = []
        while k * period <= t_end * (1 + 1e-14):
            times.append(k * period)
            k += 1
        return times


class PhasePoint(NamedTuple):
    x: np.ndarray
    v: np.ndarray


class FlowResult(NamedTuple):
    X: np.ndarray
    V: np.ndarray


def _triples(a):
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1:] != (3,):
        raise ValueError('expected triples (trailing axis of length 3), got shape {}'.format(a.shape))
    return a


def _column(a):
    return np.asarray(a, dtype=np.float64)[..., None]


def _stack(c1, c2, c3):
    return np.concatenate(np.broadcast_arrays(c1, c2, c3), axis=-1)


def _scalar_or_array(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 0:
        return float(a)
    return a


def gyro_factors(theta, mag):
    """\
    Returns (S, C) = (sin(omega theta)/omega, (1 - cos(omega theta))/omega)
    for scalar or array theta. The unmagnetised limits (theta, 0) are
    returned exactly when omega is 0, and Taylor series are used whenever
    |omega theta| is small so no digits are lost to cancellation.
    """
    theta = np.asarray(theta, dtype=np.float64)
    omega = mag.omega
    if omega == 0:
        return theta.copy(), np.zeros_like(theta)
    u = omega * theta
    u2 = u * u
    small = np.abs(u) < TAYLOR_THRESHOLD
    s_direct = np.sin(u) / omega
    # 1 - cos u = 2 sin^2(u/2)
    c_direct = 2.0 * np.sin(0.5 * u) ** 2 / omega
    s_series = theta * (1.0 - u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0)))
    c_series = theta * u * 0.5 * (1.0 - u2 / 12.0 * (1.0 - u2 / 30.0 * (1.0 - u2 / 56.0)))
    return np.where(small, s_series, s_direct), np.where(small, c_series, c_direct)


def _rotate(v, theta, mag):
    # V(s) for the characteristic started from v at time t, theta = s - t
    v = _triples(v)
    u = mag.omega * _column(theta)
    cos_u, sin_u = np.cos(u), np.sin(u)
    v1, v2, v3 = v[..., 0:1], v[..., 1:2], v[..., 2:3]
    return _stack(v1 * cos_u + v2 * sin_u, -v1 * sin_u + v2 * cos_u, v3 + 0.0 * u)


def rotate_velocity(s, t, v, mag):
    """\
    The velocity change of variables v -> V(s; t, x, v): a rotation about
    the field axis by the angle omega*(s - t). Does not depend on x.
    """
    return _rotate(v, np.subtract(s, t, dtype=np.float64), mag)


def flow(t, s, p, mag):
    """\
    Exact characteristic of the force-free magnetised motion: returns
    FlowResult(X(s; t, x, v), V(s; t, x, v)) for the phase point p = (x, v)
    given at time t. Any ordering of s and t is allowed. `p` may hold single
    triples or (N, 3) arrays.
    """
    x, v = _triples(p[0]), _triples(p[1])
    theta = np.subtract(s, t, dtype=np.float64)
    S, C = gyro_factors(theta, mag)
    S, C = S[..., None], C[..., None]
    v1, v2, v3 = v[..., 0:1], v[..., 1:2], v[..., 2:3]
    X = _stack(x[..., 0:1] + v1 * S + v2 * C,
               x[..., 1:2] - v1 * C + v2 * S,
               x[..., 2:3] + v3 * _column(theta))
    return FlowResult(X, _rotate(v, theta, mag))


def xstar(s, x, v, mag):
    """\
    Foot of the rotated characteristic, X*(s, x, v), the map through which
    the velocity integral in the field representation is turned into a
    position integral. s is a non-negative duration.
    """
    if np.any(np.asarray(s) < 0):
        raise ValueError('xstar needs s >= 0')
    x, v = _triples(x), _triples(v)
    S, C = gyro_factors(s, mag)
    S, C = S[..., None], C[..., None]
    v1, v2, v3 = v[..., 0:1], v[..., 1:2], v[..., 2:3]
    return _stack(x[..., 0:1] - v1 * S - v2 * C,
                  x[..., 1:2] + v1 * C - v2 * S,
                  x[..., 2:3] - v3 * _column(s))


def kernel_h(t, s, e, mag):
    """\
    Time kernel H_t(s) applied to the field vector e (the displacement a
    unit-charge particle observed at time t picks up from a field impulse at
    time s). Vanishes at s = t; tends to (s - t) e when omega -> 0.
    """
    e = _triples(e)
    theta = np.subtract(s, t, dtype=np.float64)
    S, C = gyro_factors(theta, mag)
    S, C = S[..., None], C[..., None]
    e1, e2, e3 = e[..., 0:1], e[..., 1:2], e[..., 2:3]
    return _stack(S * e1 - C * e2, C * e1 + S * e2, _column(theta) * e3)


def kernel_d(t, s, e, mag):
    """\
    Kernel D(t, s) applied to e after the change of variables; s is the
    elapsed duration. D only depends on s: kernel_d(t - s, s, e) equals
    kernel_h(t, t - s, e) for every t.
    """
    if np.any(np.asarray(s) < 0):
        raise ValueError('kernel_d needs s >= 0')
    e = _triples(e)
    S, C = gyro_factors(s, mag)
    S, C = S[..., None], C[..., None]
    e1, e2, e3 = e[..., 0:1], e[..., 1:2], e[..., 2:3]
    return _stack(-S * e1 - C * e2, C * e1 - S * e2, -_column(s) * e3)


def _require_positive(s, name):
    s = np.asarray(s, dtype=np.float64)
    if np.any(~(s > 0)):
        raise ValueError('{} needs s > 0'.format(name))
    return s


def singular_distance(s, mag):
    """\
    Distance from s to the nearest positive multiple of the cyclotron
    period, in units of the period. Infinite when omega is 0.
    """
    s = np.asarray(s, dtype=np.float64)
    if mag.omega == 0:
        return _scalar_or_array(np.full_like(s, np.inf))
    ratio = s / mag.period
    k = np.maximum(np.rint(ratio), 1.0)
    return _scalar_or_array(np.abs(ratio - k))


def near_singular(s, mag, guard=SINGULAR_GUARD):
    """True where s lies inside the guard band around a singular time."""
    return np.asarray(singular_distance(s, mag)) < guard


def _check_singular(s, mag, name):
    if mag.omega == 0:
        return
    bad = np.ravel(near_singular(s, mag))
    if bad.any():
        s_bad = np.ravel(np.asarray(s, dtype=np.float64))[int(np.argmax(bad))]
        raise SingularTimeError(
            '{}: s = {!r} is within {:g} periods of a singular time (omega = {!r})'.format(
                name, float(s_bad), SINGULAR_GUARD, mag.omega))


def _gyro_norm2(s, mag):
    # S^2 + C^2 = 2 (1 - cos(omega s)) / omega^2, Taylor safe
    S, C = gyro_factors(s, mag)
    return S * S + C * C


def jacobian_psi_abs(s, mag):
    """\
    |det| of the Jacobian of v -> X*(s, x, v): 2 s (1 - cos(omega s)) / omega^2,
    which is s^3 without field and 0 at the singular times.
    """
    s = _require_positive(s, 'jacobian_psi_abs')
    return _scalar_or_array(s * _gyro_norm2(s, mag))


def gyro_ratio(s, mag):
    """\
    omega^2 s^2 / (2 (1 - cos(omega s))), the factor by which the
    magnetised Jacobian falls short of the free one. Tends to 1 as
    omega -> 0 and diverges at the singular times.
    """
    s = _require_positive(s, 'gyro_ratio')
    _check_singular(s, mag, 'gyro_ratio')
    norm2 = _gyro_norm2(s, mag)
    if np.any(norm2 <= 0):
        raise SingularTimeError('gyro_ratio: 1 - cos(omega s) underflowed to 0 (omega = {!r})'.format(mag.omega))
    return _scalar_or_array(s * s / norm2)


def singular_amplification(s, mag):
    """(sqrt 2 / s) * gyro_ratio(s)^(2/3), the large-time field amplification."""
    ratio = np.asarray(gyro_ratio(s, mag))
    s = np.asarray(s, dtype=np.float64)
    out = math.sqrt(2.0) / s * ratio ** (2.0 / 3.0)
    if not np.all(np.isfinite(out)):
        raise SingularTimeError('singular_amplification overflowed (omega = {!r})'.format(mag.omega))
    return _scalar_or_array(out)


def zeta(s, mag, d, convention='cosine'):
    """\
    Small-time integrand zeta(s).

    convention='cosine' gives s (1 / (s (1 - cos(omega s))))^(1/d), falling
    back on s^(1 - 3/d) when omega is 0. This form carries an omega^(-2/d)
    factor, so it does not tend to the unmagnetised branch as omega -> 0.

    convention='jacobian' gives s |jacobian_psi_abs(s)|^(-1/d), which is
    (omega^2 / 2)^(1/d) times the cosine form and is continuous as
    omega -> 0. After the substitution u = omega s its integral over
    (0, t0) is omega^(3/d - 2) times the integral of
    u^(1 - 3/d) (u^2 / (2 (1 - cos u)))^(1/d) over (0, omega t0).
    """
    if convention not in ZETA_CONVENTIONS:
        raise ValueError('unknown zeta convention {!r}, expected one of {}'.format(convention, ZETA_CONVENTIONS))
    d = float(d)
    if d <= 0:
        raise ValueError('zeta needs d > 0')
    s = _require_positive(s, 'zeta')
    _check_singular(s, mag, 'zeta')
    if mag.omega == 0:
        return _scalar_or_array(s ** (1.0 - 3.0 / d))
    norm2 = _gyro_norm2(s, mag)
    if np.any(norm2 <= 0):
        raise SingularTimeError('zeta: 1 - cos(omega s) underflowed to 0 (omega = {!r})'.format(mag.omega))
    if convention == 'cosine':
        one_minus_cos = 0.5 * mag.omega ** 2 * norm2
        return _scalar_or_array(s * (1.0 / (s * one_minus_cos)) ** (1.0 / d))
    return _scalar_or_array(s * (s * norm2) ** (-1.0 / d))


def rescaled_factor(u, d):
    """\
    (u^2 / (1 - cos u))^(1/d), the factor left in the small-time integrand
    after substituting u = omega s. Bounded on (0, pi], where it is largest
    at u = pi; tends to 2^(1/d) as u -> 0.
    """
    u = _require_positive(u, 'rescaled_factor')
    return _scalar_or_array((2.0 * np.asarray(gyro_ratio(u, MagneticConfig(1.0)))) ** (1.0 / float(d)))
