# representation.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Checks the density representation
#
#   rho(t) = rho_0(t) + div int_0^t int f(s) H_t(s) dv ds
#
# where rho_0 is the initial data carried by the force-free magnetised
# flow and the inner integral is evaluated along free characteristics.
# On particles, the velocity integral at time s is the deposit, at the
# free-flowed positions X(t; s, x_i(s), v_i(s)), of the vector charges
# w_i kernel_h(t, s, E(s, x_i(s))).

import logging
import math
from dataclasses import replace

import numpy as np
from scipy.integrate import trapezoid

from magvlasov.errors import MissingHistoryError, SingularTimeError
from magvlasov.fields import GridSpec, ScalarField, VectorField, deposit, divergence
from magvlasov.harness.report import EstimateReport
from magvlasov.kinematics import MagneticConfig, flow, kernel_h, near_singular

log = logging.getLogger('magvlasov.harness')

# quadrature corrections below this (relative to ||rho(t)||_1) count as converged
CONVERGED_FLOOR = 1e-10


def evaluation_grid(grid, cells=16):
    """Coarse grid covering the same box as the run grid."""
    return GridSpec(grid.origin, grid.extent, (cells,) * 3)


def history_config(config, t, quadrature):
    """\
    Run configuration that records a history up to time t whose steps are
    a multiple of `quadrature`, never coarser than config.dt, so the halved
    quadratures use nested nodes.
    """
    per_node = max(1, int(math.ceil(t / (quadrature * config.dt) - 1e-9)))
    return replace(config, t_end=t, dt=t / (quadrature * per_node), record_history=True, history_every=1)


def _select(frames, quadrature):
    if quadrature is None or len(frames) - 1 <= quadrature:
        return frames
    indices = sorted(set(int(round(i)) for i in np.linspace(0, len(frames) - 1, quadrature + 1)))
    return [frames[i] for i in indices]


def representation_density(history, t, grid, quadrature=None):
    """\
    Returns (rho_rep, rho_t) on `grid`: the represented density at time t
    from the stored history, and the density deposited from the particles
    at time t. `quadrature` is the number of trapezoid intervals in s (all
    stored frames when None).
    """
    mag = MagneticConfig(history.omega)
    frames = history.frames_until(t)
    first, last = frames[0], frames[-1]
    w = history.weights
    free0 = flow(first.t, t, (first.positions, first.velocities), mag).X
    rho_0 = deposit(free0, w, grid)
    rho_t = deposit(last.positions, w, grid)
    used = _select(frames, quadrature)
    if len(used) < 2:
        return ScalarField(grid, rho_0), ScalarField(grid, rho_t)
    currents = []
    for frame in used:
        moved = flow(frame.t, t, (frame.positions, frame.velocities), mag).X
        charges = w[:, None] * kernel_h(t, frame.t, frame.e_at_particles, mag)
        currents.append(deposit(moved, charges, grid))
    integral = trapezoid(np.stack(currents), x=np.array([f.t for f in used]), axis=0)
    rho_rep = rho_0 + divergence(VectorField(grid, integral)).values
    return ScalarField(grid, rho_rep), ScalarField(grid, rho_t)


def _relative_l1(a, b, scale):
    return float(np.sum(np.abs(a - b)) / scale) if scale > 0 else 0.0


def representation_mismatch(history, t, grid, quadrature=None):
    """sum |rho_rep - rho(t)| / sum |rho(t)|."""
    rho_rep, rho_t = representation_density(history, t, grid, quadrature)
    return _relative_l1(rho_rep.values, rho_t.values, np.sum(np.abs(rho_t.values)))


def verify_representation(history, t, grid, quadrature=None, tol=0.1, refinements=2, noise=1.5):
    """\
    Relative L^1 mismatch between the represented and the deposited density
    at time t, which must stay below `tol`.

    With `refinements` > 0 the quadrature is also halved that many times.
    The mismatch to the deposit carries a part no quadrature removes (the
    deposit and the finite-difference divergence), so convergence is
    judged on the quadrature error itself: the change in the represented
    density between successive levels must shrink by at least `noise` per
    doubling, unless it is already below CONVERGED_FLOOR. The mismatch
    must not grow by more than `noise` either. The shrink factors are
    reported as ratio_q<n>.
    """
    if history is None or not len(history):
        raise MissingHistoryError('representation check needs a run recorded with record_history')
    mag = MagneticConfig(history.omega)
    if mag.magnetised and t > 0 and near_singular(t, mag):
        raise SingularTimeError('representation check requested at singular time t = {!r}'.format(t))
    frames = len(history.frames_until(t))
    q = frames - 1 if quadrature is None else min(quadrature, frames - 1)
    levels = [q]
    for _ in range(refinements):
        if levels[-1] // 2 >= 1:
            levels.append(levels[-1] // 2)
    levels.reverse()

    represented = []
    rho_t = None
    for n in levels:
        rho_rep, rho_t = representation_density(history, t, grid, n)
        represented.append(rho_rep.values)
    scale = float(np.sum(np.abs(rho_t.values)))
    mismatches = [_relative_l1(rep, rho_t.values, scale) for rep in represented]
    report = EstimateReport('representation(t={:g})'.format(t), frames, mismatches[-1], threshold=tol,
                            fitted_constants={'mismatch': mismatches[-1]})
    for n, m in zip(levels, mismatches):
        report.fitted_constants['mismatch_q{}'.format(n)] = m

    steps = [_relative_l1(a, b, scale) for a, b in zip(represented[:-1], represented[1:])]
    for n, step in zip(levels[1:], steps):
        report.fitted_constants['step_q{}'.format(n)] = step
    stalled = False
    for n, coarse, fine in zip(levels[2:], steps[:-1], steps[1:]):
        if fine <= CONVERGED_FLOOR:
            continue
        ratio = coarse / fine
        report.fitted_constants['ratio_q{}'.format(n)] = ratio
        if ratio < noise:
            stalled = True
    if stalled:
        report.notes.append('quadrature error shrank by less than {:g} per doubling'.format(noise))
    if any(b > noise * a and b > 1e-12 for a, b in zip(mismatches[:-1], mismatches[1:])):
        report.notes.append('mismatch rose under quadrature doubling')
        stalled = True
    if stalled:
        report.max_ratio = max(report.max_ratio, 2.0 * tol)
    log.info('representation mismatch at t=%.6g: %s', t, ', '.join('{:.3g}'.format(m) for m in mismatches))
    return report
