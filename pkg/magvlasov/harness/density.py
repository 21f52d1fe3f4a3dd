# density.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Bounded-density condition. For radial initial data
# f_in(x, v) = mass P(|x - c|) W(|v|), with P and W non-increasing, the
# neighbourhood supremum
#
#   g(t, x, v) = sup { f_in(y + v t, w) : |y - x| <= a, |w - v| <= b },
#   a = (R + omega |v|) t^2 e^(omega t),  b = (R + omega |v|) t e^(omega t)
#
# is mass P(max(0, |x + v t - c| - a)) W(max(0, |v| - b)), and
# rho(t, x) <= int g(t, x, v) dv whenever R bounds ||E||_inf. Once
# omega t e^(omega t) >= 1 the envelope no longer decays in |v|, so the
# velocity integral is taken over the cube [-v_max, v_max]^3.

import logging
import math

import numpy as np

from magvlasov.errors import NonAnalyticFamilyError
from magvlasov.harness.report import EstimateReport

log = logging.getLogger('magvlasov.harness')


def _cube_points(half_width, cells, centre=(0.0, 0.0, 0.0)):
    c = np.linspace(-half_width, half_width, cells)
    pts = np.stack(np.meshgrid(c, c, c, indexing='ij'), axis=-1).reshape(-1, 3)
    return pts + np.asarray(centre, dtype=np.float64)


def _velocity_cells(v_max, cells):
    h = 2.0 * v_max / cells
    c = -v_max + (np.arange(cells) + 0.5) * h
    return np.stack(np.meshgrid(c, c, c, indexing='ij'), axis=-1).reshape(-1, 3), h ** 3


def envelope_integral(spec, mag, R, t, x, v_max=3.0, v_cells=24):
    """int_{[-v_max, v_max]^3} g(t, x, v) dv at every point of x (shape (M, 3))."""
    if not spec.radial:
        raise NonAnalyticFamilyError('no closed-form envelope for the {} family'.format(spec.family))
    v, dv = _velocity_cells(v_max, v_cells)
    speed = np.linalg.norm(v, axis=1)
    omega = mag.omega
    grow = (R + omega * speed) * math.exp(omega * t)
    a, b = grow * t * t, grow * t
    w = spec.velocity_profile(np.maximum(0.0, speed - b))
    centre = np.asarray(spec.center)
    out = np.empty(len(x))
    for i, point in enumerate(np.asarray(x, dtype=np.float64)):
        r = np.linalg.norm(point + t * v - centre, axis=1)
        p = spec.position_profile(np.maximum(0.0, r - a))
        out[i] = spec.mass * float(np.dot(p, w)) * dv
    return out


def envelope_sup(spec, mag, R, t, x_points, v_max=3.0, v_cells=24):
    return float(np.max(envelope_integral(spec, mag, R, t, x_points, v_max, v_cells)))


def spatial_extent(spec):
    if spec.family == 'compact-bump':
        return spec.radius
    return spec.cutoff * spec.width


def verify_bounded_density_condition(spec, mag, R, times=None, t_end=None, t_points=5, x_cells=8,
                                     v_max=3.0, v_cells=24, density_sup=None, factor=3.0):
    """\
    sup_x int g(t, x, v) dv on an x lattice (including the centre) at each
    time. The velocity integral runs over the cube [-v_max, v_max]^3 only;
    the report notes say so. With `density_sup`, a list of (t, ||rho(t)||_inf) from a run,
    each run density must lie within `factor` of the envelope at its time.
    """
    if not spec.radial:
        raise NonAnalyticFamilyError('no closed-form envelope for the {} family'.format(spec.family))
    if times is None:
        if density_sup:
            times = [t for t, _ in density_sup]
        else:
            end = t_end if t_end is not None else (mag.t_omega if mag.magnetised else 1.0)
            times = np.linspace(0.0, end, t_points)
    x_points = _cube_points(1.5 * spatial_extent(spec), x_cells + 1 if x_cells % 2 == 0 else x_cells,
                            spec.center)
    sups = np.array([envelope_sup(spec, mag, R, t, x_points, v_max, v_cells) for t in times])
    finite = bool(np.all(np.isfinite(sups)))
    report = EstimateReport('bounded_density', len(times) * len(x_points), 0.0 if finite else math.inf,
                            threshold=factor, fitted_constants={'envelope_sup': float(np.max(sups)),
                                                                'R': float(R)})
    if density_sup:
        lookup = dict(zip(times, sups))
        ratios = [rho / lookup[t] if lookup.get(t, 0) > 0 else math.inf for t, rho in density_sup]
        report.max_ratio = max(ratios) if finite else math.inf
        report.fitted_constants['C'] = report.max_ratio
    report.notes.append('int g dv truncated to the velocity cube [-{0:g}, {0:g}]^3, '
                        'not the full velocity space'.format(v_max))
    log.info('bounded density: envelope sup %.6g, max ratio %.6g', np.max(sups), report.max_ratio)
    return report
