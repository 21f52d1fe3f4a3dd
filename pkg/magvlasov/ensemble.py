# ensemble.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Weighted particle markers standing in for f(t, x, v): initial-data
# sampling, the time integrator (electric half kicks around the exact
# cyclotron rotation), per-step diagnostics and the run driver.

import csv
import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import stats

from magvlasov.cache import RunHistory
from magvlasov.errors import (EnsembleMismatchError, ExponentError, NonAnalyticFamilyError,
                              NonFiniteError, UnknownDistributionError, ValidationError)
from magvlasov.fields import (DEFAULT_BUDGET_BYTES, GridSpec, VectorField, deposit_density,
                              energy, interpolate_field, lp_norm, solve_field, weak_lq_norm)
from magvlasov.kinematics import MagneticConfig, flow
from magvlasov.snapshot import write_snapshot
from magvlasov.utils import exponent_label, format_float, parse_exponent_label

log = logging.getLogger('magvlasov.ensemble')

FAMILIES = ('maxwellian', 'two-stream', 'compact-bump')
FIELD_MODES = ('self-consistent', 'none', 'frozen')

DEFAULT_MOMENT_EXPONENTS = (0.0, 1.0, 2.0, 3.0, 3.5, 4.0, 6.0)
# the p-grid in (3/2, 15/4] plus k + 3 for k = 4
DEFAULT_E_NORM_EXPONENTS = (2.0, 3.0, 3.5, 3.75, 7.0)

# integral of (1 - r^2)^2 over the unit ball
BUMP_VOLUME = 32.0 * math.pi / 105.0

# largest fraction of the cyclotron period a step may cover
MAX_STEP_FRACTION = 0.05


@dataclass
class ParticleEnsemble:
    """\
    N markers (x_i, v_i, w_i). `tags`, when present, holds f_in(x_i(0), v_i(0))
    for every marker; it is carried along unchanged, since f is constant
    along characteristics.
    """
    positions: np.ndarray
    velocities: np.ndarray
    weights: np.ndarray
    tags: Optional[np.ndarray] = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.velocities = np.asarray(self.velocities, dtype=np.float64).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        n = self.weights.shape[0]
        if self.positions.shape[0] != n or self.velocities.shape[0] != n:
            raise EnsembleMismatchError('ensemble with {} positions, {} velocities and {} weights'.format(
                self.positions.shape[0], self.velocities.shape[0], n))
        if np.any(self.weights < 0):
            raise ValueError('particle weights must be non-negative')
        if self.tags is not None:
            self.tags = np.asarray(self.tags, dtype=np.float64).reshape(-1)
            if self.tags.shape[0] != n:
                raise EnsembleMismatchError('{} tags for {} particles'.format(self.tags.shape[0], n))

    def __len__(self):
        return self.weights.shape[0]

    @property
    def mass(self):
        return float(self.weights.sum())

    def with_state(self, positions, velocities):
        """Same markers (weights and tags shared) at new phase-space positions."""
        return ParticleEnsemble(positions, velocities, self.weights, self.tags)

    def copy(self):
        return ParticleEnsemble(self.positions.copy(), self.velocities.copy(), self.weights.copy(),
                                None if self.tags is None else self.tags.copy())


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# initial data

@dataclass(frozen=True)
class DistributionSpec:
    """\
    Initial distribution family and its parameters.

    maxwellian    Gaussian of spread `width` in x about `center`, truncated to
                  the ball of radius cutoff*width, times a Maxwellian of
                  temperature `temperature` in v, truncated to speeds below
                  velocity_cutoff*sqrt(temperature) (inf: untruncated).
    two-stream    same spatial profile; two counter-streaming Maxwellian
                  beams at +-drift along the first axis, equal halves.
    compact-bump  (1 - |x - center|^2/radius^2)^2 times
                  (1 - |v|^2/velocity_radius^2)^2, both compactly supported.

    Every family integrates to `mass`.
    """
    family: str = 'maxwellian'
    mass: float = 1.0
    temperature: float = 1.0
    width: float = 0.5
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    cutoff: float = 4.0
    velocity_cutoff: float = 3.0
    drift: float = 1.0
    radius: float = 1.0
    velocity_radius: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnknownDistributionError('unknown distribution family {!r}, expected one of {}'.format(
                self.family, ', '.join(FAMILIES)))
        object.__setattr__(self, 'center', tuple(float(c) for c in self.center))
        for name in ('mass', 'temperature', 'width', 'cutoff', 'velocity_cutoff', 'radius', 'velocity_radius'):
            if not getattr(self, name) > 0:
                raise ValueError('distribution {} must be positive, got {!r}'.format(name, getattr(self, name)))

    @property
    def radial(self):
        """True when f_in(x, v) = mass * P(|x - center|) * W(|v|)."""
        return self.family in ('maxwellian', 'compact-bump')

    @property
    def thermal_speed(self):
        return math.sqrt(self.temperature)

    def _gaussian_profile(self, r, spread, cutoff):
        r = np.asarray(r, dtype=np.float64)
        norm = stats.chi(3).cdf(cutoff) if math.isfinite(cutoff) else 1.0
        value = np.exp(-0.5 * (r / spread) ** 2) / ((2.0 * math.pi) ** 1.5 * spread ** 3 * norm)
        return np.where(r <= cutoff * spread, value, 0.0)

    @staticmethod
    def _bump_profile(r, radius):
        u2 = (np.asarray(r, dtype=np.float64) / radius) ** 2
        return np.where(u2 < 1.0, (1.0 - u2) ** 2, 0.0) / (BUMP_VOLUME * radius ** 3)

    def position_profile(self, r):
        """Normalised spatial profile P as a function of |x - center|."""
        if self.family == 'compact-bump':
            return self._bump_profile(r, self.radius)
        return self._gaussian_profile(r, self.width, self.cutoff)

    def velocity_profile(self, speed):
        """Normalised velocity profile W(|v|); only defined for radial families."""
        if self.family == 'compact-bump':
            return self._bump_profile(speed, self.velocity_radius)
        if self.family == 'two-stream':
            raise NonAnalyticFamilyError('two-stream velocity profile is not radial')
        return self._gaussian_profile(speed, self.thermal_speed, self.velocity_cutoff)

    def density(self, x, v):
        """f_in(x, v) for (N, 3) arrays."""
        x = np.asarray(x, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        r = np.linalg.norm(x - np.asarray(self.center), axis=-1)
        if self.family == 'two-stream':
            shift = np.array([self.drift, 0.0, 0.0])
            beams = 0.5 * (self._gaussian_profile(np.linalg.norm(v - shift, axis=-1), self.thermal_speed,
                                                  self.velocity_cutoff)
                           + self._gaussian_profile(np.linalg.norm(v + shift, axis=-1), self.thermal_speed,
                                                    self.velocity_cutoff))
            return self.mass * self.position_profile(r) * beams
        return self.mass * self.position_profile(r) * self.velocity_profile(np.linalg.norm(v, axis=-1))

    def speed_bound(self):
        """Largest speed the initial data can have (inf for untruncated Gaussians)."""
        if self.family == 'compact-bump':
            return self.velocity_radius
        bound = self.velocity_cutoff * self.thermal_speed
        return bound + self.drift if self.family == 'two-stream' else bound

    def velocity_scale(self):
        """Typical speed used by the timestep (CFL) check."""
        if self.family == 'compact-bump':
            return self.velocity_radius
        if self.family == 'two-stream':
            return self.drift + self.thermal_speed
        return self.thermal_speed


def _normal_in_ball(rng, n, cutoff):
    # standard normal triples conditioned on |z| <= cutoff
    if not math.isfinite(cutoff):
        return rng.standard_normal((n, 3))
    accept = max(stats.chi(3).cdf(cutoff), 1e-3)
    out = np.empty((0, 3))
    while out.shape[0] < n:
        batch = int(math.ceil((n - out.shape[0]) / accept * 1.1)) + 16
        z = rng.standard_normal((batch, 3))
        out = np.concatenate([out, z[np.einsum('ni,ni->n', z, z) <= cutoff * cutoff]])
    return out[:n]


def _bump_in_ball(rng, n):
    # density proportional to (1 - |z|^2)^2 on the unit ball, by rejection
    # from the uniform ball (acceptance 8/35)
    out = np.empty((0, 3))
    while out.shape[0] < n:
        batch = int(math.ceil((n - out.shape[0]) * 35.0 / 8.0 * 1.1)) + 16
        direction = rng.standard_normal((batch, 3))
        direction /= np.linalg.norm(direction, axis=1)[:, None]
        radius = rng.random(batch) ** (1.0 / 3.0)
        keep = rng.random(batch) < (1.0 - radius ** 2) ** 2
        out = np.concatenate([out, direction[keep] * radius[keep, None]])
    return out[:n]


def sample_initial(spec, n, seed):
    """\
    Draws n equally weighted markers (weight mass/n) from the distribution
    `spec` (a DistributionSpec or a bare family name). The result depends
    only on (spec, n, seed). Every marker is tagged with its f_in value.
    """
    if isinstance(spec, str):
        spec = DistributionSpec(family=spec)
    n = int(n)
    if n < 1:
        raise ValueError('need at least one particle, got n = {}'.format(n))
    rng = np.random.default_rng(seed)
    centre = np.asarray(spec.center)
    if spec.family == 'compact-bump':
        x = centre + spec.radius * _bump_in_ball(rng, n)
        v = spec.velocity_radius * _bump_in_ball(rng, n)
    else:
        x = centre + spec.width * _normal_in_ball(rng, n, spec.cutoff)
        v = spec.thermal_speed * _normal_in_ball(rng, n, spec.velocity_cutoff)
        if spec.family == 'two-stream':
            v[:, 0] += np.where(np.arange(n) % 2 == 0, spec.drift, -spec.drift)
    weights = np.full(n, spec.mass / n)
    ens = ParticleEnsemble(x, v, weights, tags=spec.density(x, v))
    log.debug('sampled %d %s particles (seed %r)', n, spec.family, seed)
    return ens


def perturb(ens, position_shift=(0.0, 0.0, 0.0), velocity_shift=(0.0, 0.0, 0.0)):
    """Same markers with every position and velocity shifted by fixed offsets."""
    return ens.with_state(ens.positions + np.asarray(position_shift, dtype=np.float64),
                          ens.velocities + np.asarray(velocity_shift, dtype=np.float64))


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# integrator

def kick(ens, e, dt):
    """v += dt E(x); `e` None means no field."""
    if e is None or dt == 0:
        return ens
    return ens.with_state(ens.positions, ens.velocities + dt * interpolate_field(e, ens.positions))


def drift(ens, dt, mag, t=0.0):
    """Exact force-free magnetised motion over dt."""
    X, V = flow(t, t + dt, (ens.positions, ens.velocities), mag)
    return ens.with_state(X, V)


def step(ens, e, dt, mag, t=0.0):
    """\
    One Strang step with the field `e` frozen: half kick, exact cyclotron
    motion over dt, half kick. Exact when e is None (or zero).
    """
    ens = kick(ens, e, 0.5 * dt)
    ens = drift(ens, dt, mag, t)
    return kick(ens, e, 0.5 * dt)


def effective_timestep(dt, mag):
    """\
    Returns (dt_eff, steps_per_period). With a field, dt is shortened to the
    largest value not above it that splits the cyclotron period into an even
    number of steps, so singular times and window edges fall on steps.
    """
    if mag.omega == 0:
        return float(dt), None
    per_period = int(math.ceil(mag.period / dt - 1e-9))
    if per_period % 2:
        per_period += 1
    return mag.period / per_period, per_period


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# diagnostics

def moments(ens, ks):
    """M_k = sum_i w_i |v_i|^k for every k in ks."""
    speed = np.sqrt(np.einsum('ni,ni->n', ens.velocities, ens.velocities))
    out = {}
    for k in ks:
        k = float(k)
        if not k >= 0:
            raise ExponentError('moment exponents must be >= 0, got {!r}'.format(k))
        out[k] = float(ens.weights.sum()) if k == 0 else float(np.dot(ens.weights, speed ** k))
    return out


@dataclass
class MomentRecord:
    t: float
    m_k: Dict[float, float]
    energy: float
    e_norms: Dict[float, float]
    e_weak32: float

    def is_finite(self):
        values = [self.t, self.energy, self.e_weak32]
        values += list(self.m_k.values()) + list(self.e_norms.values())
        return all(math.isfinite(v) for v in values)


@dataclass
class MomentSeries:
    records: List[MomentRecord] = field(default_factory=list)

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]

    @property
    def exponents(self):
        return list(self.records[0].m_k) if self.records else []

    @property
    def norm_exponents(self):
        return list(self.records[0].e_norms) if self.records else []

    def times(self):
        return np.array([r.t for r in self.records])

    def moment(self, k):
        return np.array([r.m_k[float(k)] for r in self.records])

    def e_norm(self, p):
        return np.array([r.e_norms[float(p)] for r in self.records])

    def energies(self):
        return np.array([r.energy for r in self.records])

    def running_sup(self, k):
        """mu_k(t) = sup over sample times s <= t of M_k(s)."""
        return np.maximum.accumulate(self.moment(k))

    def header(self):
        cols = ['t'] + ['M' + exponent_label(k) for k in self.exponents] + ['energy']
        cols += ['E_L' + exponent_label(p) for p in self.norm_exponents] + ['E_weak32']
        return cols

    def to_csv(self, path):
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(self.header())
            for r in self.records:
                row = [r.t] + [r.m_k[k] for k in self.exponents] + [r.energy]
                row += [r.e_norms[p] for p in self.norm_exponents] + [r.e_weak32]
                writer.writerow([format_float(x) for x in row])
        return path

    @classmethod
    def from_csv(cls, path):
        with open(path, newline='') as f:
            reader = csv.reader(f)
            header = next(reader)
            series = cls()
            for row in reader:
                if not row:
                    continue
                values = dict(zip(header, (float(x) for x in row)))
                m_k = {parse_exponent_label(c[1:]): values[c] for c in header
                       if c.startswith('M')}
                e_norms = {parse_exponent_label(c[3:]): values[c] for c in header
                           if c.startswith('E_L')}
                series.append(MomentRecord(values['t'], m_k, values['energy'], e_norms, values['E_weak32']))
        return series


def diagnose(t, ens, e, moment_exponents, e_norm_exponents):
    """MomentRecord for the ensemble and field at time t (field None: E = 0)."""
    if e is None:
        norms = {float(p): 0.0 for p in e_norm_exponents}
        norms[math.inf] = 0.0
        weak = 0.0
    else:
        norms = {float(p): lp_norm(e, p) for p in e_norm_exponents}
        norms[math.inf] = lp_norm(e, math.inf)
        weak = weak_lq_norm(e, 1.5)
    return MomentRecord(float(t), moments(ens, moment_exponents), energy(ens, e), norms, weak)


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# runs

def _default_grid():
    return GridSpec.cube(12.0, 48)


@dataclass
class RunConfig:
    distribution: DistributionSpec = field(default_factory=DistributionSpec)
    n: int = 1000
    seed: int = 0
    grid: GridSpec = field(default_factory=_default_grid)
    mag: MagneticConfig = field(default_factory=lambda: MagneticConfig(1.0))
    dt: float = 2.0 * math.pi / 100.0
    t_end: float = math.pi
    diag_every: int = 1
    moment_exponents: Tuple[float, ...] = DEFAULT_MOMENT_EXPONENTS
    e_norm_exponents: Tuple[float, ...] = DEFAULT_E_NORM_EXPONENTS
    snapshot_times: Tuple[float, ...] = ()
    field_mode: str = 'self-consistent'
    budget_bytes: int = DEFAULT_BUDGET_BYTES
    deterministic: bool = True
    workers: int = 1
    cfl: float = 1.0
    record_history: bool = False
    history_every: int = 1
    record_phase_space: bool = False
    position_shift: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity_shift: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def validate(self):
        """Raises ValidationError naming the first invariant the run breaks."""
        if self.n < 1:
            raise ValidationError('n >= 1', 'particle count {} is not positive'.format(self.n))
        if not self.dt > 0:
            raise ValidationError('dt > 0', 'timestep {!r} is not positive'.format(self.dt))
        if not self.t_end > 0:
            raise ValidationError('t_end > 0', 'end time {!r} is not positive'.format(self.t_end))
        if self.field_mode not in FIELD_MODES:
            raise ValidationError('field.mode in {}'.format('|'.join(FIELD_MODES)),
                                  'unknown field mode {!r}'.format(self.field_mode))
        if self.diag_every < 1 or self.history_every < 1:
            raise ValidationError('diag_every >= 1 and history_every >= 1', 'output intervals must be positive')
        if self.workers < 1:
            raise ValidationError('workers >= 1', 'worker count {} is not positive'.format(self.workers))
        if self.mag.omega > 0 and self.dt > MAX_STEP_FRACTION * self.mag.period:
            raise ValidationError('dt <= 0.05*2*pi/omega', 'timestep {!r} exceeds {:.6g} for omega = {!r}'.format(
                self.dt, MAX_STEP_FRACTION * self.mag.period, self.mag.omega))
        if self.cfl > 0:
            limit = self.cfl * min(self.grid.h) / self.distribution.velocity_scale()
            if self.dt > limit:
                raise ValidationError('dt * v_scale <= cfl * min(h)', 'timestep {!r} exceeds the CFL limit {:.6g}'.format(
                    self.dt, limit))
        if any(not float(k) >= 0 for k in self.moment_exponents):
            raise ValidationError('moment exponents >= 0', 'negative moment exponent in {}'.format(
                self.moment_exponents))
        if any(not float(p) >= 1 for p in self.e_norm_exponents):
            raise ValidationError('field norm exponents >= 1', 'bad norm exponent in {}'.format(
                self.e_norm_exponents))
        return self


class TrajectoryFrame(NamedTuple):
    t: float
    positions: np.ndarray
    velocities: np.ndarray


@dataclass
class RunResult:
    config: RunConfig
    series: MomentSeries
    dt: float
    steps: int
    initial: ParticleEnsemble
    final: ParticleEnsemble
    # running sup over every step of ||E(t)||_inf
    field_sup: float = 0.0
    # (t, ||rho(t)||_inf) at diagnostic times, when rho was deposited
    density_sup: List[Tuple[float, float]] = field(default_factory=list)
    trajectory: List[TrajectoryFrame] = field(default_factory=list)
    history: Optional[RunHistory] = None
    snapshots: Dict[float, tuple] = field(default_factory=dict)
    snapshot_files: List[str] = field(default_factory=list)


def _check_finite(ens, e, step_index, t):
    if not np.all(np.isfinite(ens.positions)):
        raise NonFiniteError('positions', step_index, t)
    if not np.all(np.isfinite(ens.velocities)):
        raise NonFiniteError('velocities', step_index, t)
    if e is not None and not np.all(np.isfinite(e.values)):
        raise NonFiniteError('electric field', step_index, t)


def run(config, output_dir=None):
    """\
    Runs the particle simulation described by `config` and returns a
    RunResult. Each step is kick(dt/2), exact cyclotron drift(dt), field
    re-solve, kick(dt/2); diagnostics are recorded every `diag_every` steps,
    at every half cyclotron period and at the end. Snapshots requested in
    `snapshot_times` are kept in memory and, when `output_dir` is given,
    written there too.
    """
    config.validate()
    mag = config.mag
    grid = config.grid
    dt, per_period = effective_timestep(config.dt, mag)
    if dt != config.dt:
        log.info('timestep snapped from %r to %r (%d steps per cyclotron period)', config.dt, dt, per_period)
    n_steps = max(1, int(math.ceil(config.t_end / dt - 1e-9)))
    times = [min(i * dt, config.t_end) for i in range(n_steps + 1)]
    times[-1] = config.t_end

    diag_steps = {0, n_steps}
    diag_steps.update(range(0, n_steps + 1, config.diag_every))
    if per_period:
        diag_steps.update(range(0, n_steps + 1, per_period // 2))
    snapshot_steps = {min(n_steps, max(0, int(round(ts / dt)))) for ts in config.snapshot_times}
    history_steps = set()
    if config.record_history:
        history_steps.update(range(0, n_steps + 1, config.history_every))
        history_steps.add(n_steps)
    singular = mag.singular_times(config.t_end)

    def solve(ens):
        rho = deposit_density(ens, grid, workers=config.workers, deterministic=config.deterministic)
        return rho, solve_field(rho, budget_bytes=config.budget_bytes, workers=config.workers)

    ens = sample_initial(config.distribution, config.n, config.seed)
    ens = perturb(ens, config.position_shift, config.velocity_shift)
    initial = ens
    rho, e = None, None
    if config.field_mode != 'none':
        rho, e = solve(ens)
    history = RunHistory(weights=ens.weights, omega=mag.omega) if config.record_history else None
    result = RunResult(config=config, series=MomentSeries(), dt=dt, steps=n_steps, initial=initial,
                       final=ens, history=history)
    if e is not None:
        result.field_sup = lp_norm(e, math.inf)

    if output_dir is not None:
        os.makedirs(output_dir, exist_ok=True)

    def outputs(index, ens, rho, e):
        t = times[index]
        if index in diag_steps:
            record = diagnose(t, ens, e, config.moment_exponents, config.e_norm_exponents)
            if not record.is_finite():
                raise NonFiniteError('diagnostics', index, t)
            result.series.append(record)
            if config.field_mode == 'frozen':
                rho = deposit_density(ens, grid, workers=config.workers, deterministic=config.deterministic)
            if rho is not None:
                result.density_sup.append((t, lp_norm(rho, math.inf)))
            if config.record_phase_space:
                result.trajectory.append(TrajectoryFrame(t, ens.positions.copy(), ens.velocities.copy()))
            log.debug('t=%.6g M=%s energy=%.9g', t, record.m_k, record.energy)
        if index in history_steps:
            e_at = np.zeros_like(ens.positions) if e is None else interpolate_field(e, ens.positions)
            history.append(t, ens.positions, ens.velocities, e_at)
        if index in snapshot_steps:
            if rho is None or config.field_mode == 'frozen':
                rho = deposit_density(ens, grid, workers=config.workers, deterministic=config.deterministic)
            field_now = e if e is not None else VectorField.zeros(grid)
            result.snapshots[t] = (rho, field_now)
            if output_dir is not None:
                for name, snap in (('rho', rho), ('E', field_now)):
                    path = os.path.join(output_dir, 'snapshot_{:06d}_{}.mvps'.format(index, name))
                    write_snapshot(path, snap, t)
                    result.snapshot_files.append(path)
                log.info('wrote snapshots for t=%.6g', t)

    outputs(0, ens, rho, e)
    for i in range(n_steps):
        t0, t1 = times[i], times[i + 1]
        h = t1 - t0
        ens = kick(ens, e, 0.5 * h)
        ens = drift(ens, h, mag, t0)
        if config.field_mode == 'self-consistent':
            rho, e = solve(ens)
        ens = kick(ens, e, 0.5 * h)
        _check_finite(ens, e, i + 1, t1)
        if e is not None:
            result.field_sup = max(result.field_sup, lp_norm(e, math.inf))
        for ts in singular:
            if t0 < ts <= t1 * (1 + 1e-12):
                log.info('crossed singular time t=%.6g (step %d)', ts, i + 1)
        outputs(i + 1, ens, rho, e)

    result.final = ens
    return result


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# stability functional

class QSeries(NamedTuple):
    times: np.ndarray
    q: np.ndarray


def _frames(trajectory):
    if isinstance(trajectory, RunResult):
        return trajectory.trajectory
    return list(trajectory)


def stability_q(run_a, run_b, f0_weights):
    """\
    Q(t) = 1/2 sum_i w_i (|X_a,i - X_b,i|^2 + |V_a,i - V_b,i|^2) over the
    matching frames of two trajectories (RunResults recorded with
    record_phase_space, or sequences of TrajectoryFrame).
    """
    frames_a, frames_b = _frames(run_a), _frames(run_b)
    if len(frames_a) != len(frames_b):
        raise EnsembleMismatchError('trajectories have {} and {} frames'.format(len(frames_a), len(frames_b)))
    w = np.asarray(f0_weights, dtype=np.float64)
    times, qs = [], []
    for fa, fb in zip(frames_a, frames_b):
        if fa.positions.shape != fb.positions.shape or fa.positions.shape[0] != w.shape[0]:
            raise EnsembleMismatchError('frame at t={!r}: {} vs {} particles, {} weights'.format(
                fa.t, fa.positions.shape[0], fb.positions.shape[0], w.shape[0]))
        if not math.isclose(fa.t, fb.t, rel_tol=1e-9, abs_tol=1e-12):
            raise EnsembleMismatchError('frame times differ: {!r} vs {!r}'.format(fa.t, fb.t))
        dx = fa.positions - fb.positions
        dv = fa.velocities - fb.velocities
        times.append(fa.t)
        qs.append(0.5 * float(np.dot(w, np.einsum('ni,ni->n', dx, dx) + np.einsum('ni,ni->n', dv, dv))))
    return QSeries(np.array(times), np.array(qs))


def paired_runs(config, position_shift=(0.0, 0.0, 0.0), velocity_shift=(0.0, 0.0, 0.0)):
    """\
    The reference run of `config` and a second run from the same markers
    shifted by the given offsets, both with phase space recorded.
    """
    base = replace(config, record_phase_space=True, position_shift=(0.0, 0.0, 0.0),
                   velocity_shift=(0.0, 0.0, 0.0))
    shifted = replace(base, position_shift=tuple(position_shift), velocity_shift=tuple(velocity_shift))
    return run(base), run(shifted)
