# config.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Experiment configuration. Files are INI style: [section] headers followed
# by `key = value` lines, '#' or ';' starting a comment. Values are typed by
# the key they belong to; numeric values may be written as arithmetic over
# numbers and the names pi, tau and inf (e.g. `t_end = 3*pi`), and lists as
# comma separated values, optionally in brackets or parentheses. Every key
# not given in the file takes its default, and only keys listed in SCHEMA
# are accepted.

import ast
import configparser
import logging
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Tuple

from magvlasov.errors import ConfigError, UnknownDistributionError, ValidationError
from magvlasov.ensemble import FAMILIES, FIELD_MODES, DistributionSpec, RunConfig
from magvlasov.fields import GridSpec
from magvlasov.kinematics import MagneticConfig

log = logging.getLogger('magvlasov.config')

NAMES = {'pi': math.pi, 'tau': 2 * math.pi, 'inf': math.inf}

_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


@dataclass(frozen=True)
class Key:
    kind: str
    default: object
    choices: Tuple[str, ...] = ()
    help: str = ''


# section -> key -> Key. The order here is the order of the echoed file.
SCHEMA = {
    'run': {
        'n': Key('int', 1000, help='particle count'),
        'seed': Key('int', 0),
        'dt': Key('float', 2 * math.pi / 100, help='timestep, snapped to the cyclotron period'),
        't_end': Key('float', math.pi),
        'diag_every': Key('int', 1, help='steps between diagnostic records'),
        'deterministic': Key('bool', True, help='fixed-order reductions'),
        'workers': Key('int', 1),
        'cfl': Key('float', 1.0, help='dt * speed <= cfl * min(h); 0 disables'),
        'record_history': Key('bool', False),
        'history_every': Key('int', 1),
        'record_phase_space': Key('bool', False),
    },
    'distribution': {
        'family': Key('choice', 'maxwellian', choices=FAMILIES),
        'mass': Key('float', 1.0),
        'temperature': Key('float', 1.0),
        'width': Key('float', 0.5),
        'center': Key('triple', (0.0, 0.0, 0.0)),
        'cutoff': Key('float', 4.0, help='position truncation, in widths'),
        'velocity_cutoff': Key('float', 3.0, help='speed truncation, in thermal speeds (inf: none)'),
        'drift': Key('float', 1.0, help='two-stream beam speed'),
        'radius': Key('float', 1.0, help='compact-bump radius in x'),
        'velocity_radius': Key('float', 1.0, help='compact-bump radius in v'),
    },
    'grid': {
        'origin': Key('triple', (-12.0, -12.0, -12.0)),
        'extent': Key('triple', (24.0, 24.0, 24.0)),
        'cells': Key('int_triple', (48, 48, 48)),
    },
    'mag': {
        'omega': Key('float', 1.0, help='cyclotron frequency, 0 for no field'),
    },
    'field': {
        'mode': Key('choice', 'self-consistent', choices=FIELD_MODES),
        'budget_bytes': Key('int', 2 * 1024 ** 3),
    },
    'perturbation': {
        'position_shift': Key('triple', (0.0, 0.0, 0.0)),
        'velocity_shift': Key('triple', (0.0, 0.0, 0.0)),
    },
    'diagnostics': {
        'moment_exponents': Key('floats', (0.0, 1.0, 2.0, 3.0, 3.5, 4.0, 6.0)),
        'e_norm_exponents': Key('floats', (2.0, 3.0, 3.5, 3.75, 7.0)),
        'snapshot_times': Key('floats', ()),
    },
    'harness': {
        'k': Key('float', 4.0, help='moment exponent the estimates are run for'),
        'd_grid': Key('floats', (2.0, 3.0, 3.5, 3.75)),
        'representation_fraction': Key('float', 0.5, help='check time, as a fraction of pi/omega'),
        'quadrature_steps': Key('int', 64),
        'eval_cells': Key('int', 16),
        'representation_tol': Key('float', 0.1),
        'small_time_points': Key('int', 12),
        'small_time_factor': Key('float', 2.0),
        'large_time_bound': Key('float', 2.0 * 2.0 ** (2.0 / 3.0)),
        'window_guard': Key('float', 1e-3, help='excluded band around singular times, in cyclotron periods'),
        'field_fit_ratio': Key('float', 2.0),
        'gronwall_cap': Key('float', 1e3),
        'gronwall_tol': Key('float', 1e-3),
        'stability_delta': Key('float', 1e-6),
        'stability_cap': Key('float', 1e3),
        'stability_ceiling': Key('float', 1e-3),
        'decay_alpha': Key('float', 4.0),
        'density_velocity_max': Key('float', 3.0),
        'density_bound_factor': Key('float', 3.0),
        'density_t_points': Key('int', 5),
        'density_x_cells': Key('int', 8),
        'density_v_cells': Key('int', 24),
        'poisson_levels': Key('int_triple', (32, 64, 128), help='grid refinements of the field convergence check'),
        'trials': Key('int', 1000),
        'energy_tol': Key('float', 1e-3),
    },
}


@dataclass(frozen=True)
class HarnessConfig:
    """\
    Harness parameters. Defaults live in SCHEMA['harness'] only; use
    HarnessConfig.from_values() to build one.
    """
    k: float
    d_grid: Tuple[float, ...]
    representation_fraction: float
    quadrature_steps: int
    eval_cells: int
    representation_tol: float
    small_time_points: int
    small_time_factor: float
    large_time_bound: float
    window_guard: float
    field_fit_ratio: float
    gronwall_cap: float
    gronwall_tol: float
    stability_delta: float
    stability_cap: float
    stability_ceiling: float
    decay_alpha: float
    density_velocity_max: float
    density_bound_factor: float
    density_t_points: int
    density_x_cells: int
    density_v_cells: int
    poisson_levels: Tuple[int, int, int]
    trials: int
    energy_tol: float

    @classmethod
    def from_values(cls, section=None, **changes):
        """\
        The [harness] section (defaults for missing keys) with `changes`
        applied, validated.
        """
        values = {name: key.default for name, key in SCHEMA['harness'].items()}
        values.update(section or {})
        values.update(changes)
        harness = cls(**values)
        harness.validate()
        return harness

    def validate(self):
        """Raises ValidationError naming the first range the parameters break."""
        if not self.k > 3:
            raise ValidationError('harness.k > 3', 'moment exponent {!r} is not above 3'.format(self.k))
        if not self.d_grid:
            raise ValidationError('d_grid not empty', 'no field exponents to check')
        for d in self.d_grid:
            if not 1.5 < d <= 3.75:
                raise ValidationError('harness.d_grid in (3/2, 15/4]',
                                      'field exponent {!r} outside (3/2, 15/4]'.format(d))
        if not 0 < self.representation_fraction < 2:
            raise ValidationError('0 < representation_fraction < 2',
                                  'check time fraction {!r} would reach a singular time'.format(
                                      self.representation_fraction))
        if self.quadrature_steps < 1 or self.eval_cells < 1:
            raise ValidationError('quadrature_steps >= 1 and eval_cells >= 1',
                                  'representation check needs positive step and cell counts')


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# value grammar

def _evaluate(node):
    if isinstance(node, ast.Expression):
        return _evaluate(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id in NAMES:
        return NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_number(_evaluate(node.operand), node))
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        left = _number(_evaluate(node.left), node)
        right = _number(_evaluate(node.right), node)
        if isinstance(node.op, ast.Pow) and abs(right) > 1024:
            raise _ValueProblem('exponent {!r} too large'.format(right), getattr(node, 'col_offset', 0))
        try:
            return _BINARY[type(node.op)](left, right)
        except (ZeroDivisionError, OverflowError) as e:
            raise _ValueProblem(str(e), getattr(node, 'col_offset', 0))
    if isinstance(node, (ast.Tuple, ast.List)):
        return tuple(_evaluate(item) for item in node.elts)
    raise _ValueProblem('unsupported expression {!r}'.format(type(node).__name__), getattr(node, 'col_offset', 0))


def _number(value, node):
    if isinstance(value, tuple):
        raise _ValueProblem('arithmetic on a list', getattr(node, 'col_offset', 0))
    return value


class _ValueProblem(Exception):
    def __init__(self, message, offset=0):
        super(_ValueProblem, self).__init__(message)
        self.offset = offset


def evaluate_expression(text):
    """\
    Evaluates a numeric value written in the config grammar: numbers,
    + - * / **, parentheses, pi, tau, inf, and lists/tuples thereof.
    """
    text = text.strip()
    try:
        tree = ast.parse(text, mode='eval')
    except SyntaxError as e:
        raise _ValueProblem('syntax error: {}'.format(e.msg), max(0, (e.offset or 1) - 1))
    return _evaluate(tree)


_TRUE = ('1', 'yes', 'true', 'on')
_FALSE = ('0', 'no', 'false', 'off')


def convert(key, text):
    """Converts raw text to the type `key` declares."""
    text = text.strip()
    if key.kind == 'str':
        return text
    if key.kind == 'choice':
        if text not in key.choices:
            raise _ValueProblem('{!r} is not one of {}'.format(text, ', '.join(key.choices)))
        return text
    if key.kind == 'bool':
        lowered = text.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise _ValueProblem('{!r} is not a boolean'.format(text))
    value = evaluate_expression(text)
    if key.kind == 'float':
        if isinstance(value, tuple):
            raise _ValueProblem('expected a single number')
        value = float(value)
        if math.isnan(value):
            raise _ValueProblem('NaN is not allowed')
        return value
    if key.kind == 'int':
        if isinstance(value, tuple) or not math.isfinite(value) or float(value) != int(value):
            raise _ValueProblem('expected an integer')
        return int(value)
    items = value if isinstance(value, tuple) else (value,)
    if any(isinstance(item, tuple) for item in items):
        raise _ValueProblem('nested lists are not allowed')
    if key.kind == 'floats':
        return tuple(float(item) for item in items)
    if key.kind in ('triple', 'int_triple'):
        if len(items) == 1:
            items = items * 3
        if len(items) != 3:
            raise _ValueProblem('expected 3 values, got {}'.format(len(items)))
        if key.kind == 'int_triple':
            if any(not math.isfinite(item) or float(item) != int(item) for item in items):
                raise _ValueProblem('expected integers')
            return tuple(int(item) for item in items)
        return tuple(float(item) for item in items)
    raise _ValueProblem('unknown kind {!r}'.format(key.kind))


def format_value(key, value):
    """Text that `convert` reads back as exactly `value`."""
    if key.kind in ('str', 'choice'):
        return value
    if key.kind == 'bool':
        return 'true' if value else 'false'
    if key.kind == 'int':
        return str(int(value))
    if key.kind == 'float':
        return repr(float(value))
    if key.kind == 'int_triple':
        return '({})'.format(', '.join(str(int(v)) for v in value))
    if not value:
        return '()'
    return '({})'.format(', '.join(repr(float(v)) for v in value) + (',' if len(value) == 1 else ''))


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# files and overrides

def _locate(text, section, key):
    """1-based (line, column of the value) of `key` within `section`, or (None, None)."""
    current = None
    pattern = re.compile(r'^(\s*)({})\s*[=:]\s*'.format(re.escape(key)), re.IGNORECASE)
    for number, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith('[') and stripped.endswith(']'):
            current = stripped[1:-1].strip()
            continue
        if current == section:
            match = pattern.match(line)
            if match:
                return number, match.end() + 1
    return None, None


def _locate_section(text, section):
    for number, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith('[') and stripped[1:-1].strip() == section:
            return number
    return None


def defaults():
    return {section: {name: key.default for name, key in keys.items()} for section, keys in SCHEMA.items()}


def parse_text(text, path=None, values=None):
    """\
    Parses config text into a nested {section: {key: value}} dict, starting
    from `values` (the defaults when None).
    """
    values = defaults() if values is None else values
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'),
                                       empty_lines_in_values=False)
    try:
        parser.read_string(text, source=path or '<config>')
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError('key outside any [section]', e.lineno, 1, path)
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
        raise ConfigError(e.message.split(': ', 1)[-1] if hasattr(e, 'message') else str(e),
                          e.lineno, 1, path)
    except configparser.ParsingError as e:
        lineno, _line = e.errors[0]
        raise ConfigError('cannot parse line', lineno, 1, path)
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError('unknown section [{}]'.format(section), _locate_section(text, section), 1, path)
        for name, raw in parser.items(section):
            line, column = _locate(text, section, name)
            if name not in SCHEMA[section]:
                raise ConfigError('unknown key {}.{}'.format(section, name), line, 1, path)
            try:
                values[section][name] = convert(SCHEMA[section][name], raw)
            except _ValueProblem as e:
                raise ConfigError('{}.{}: {}'.format(section, name, e), line,
                                  None if column is None else column + e.offset, path)
    return values


def apply_override(values, override):
    """Applies one 'section.key=value' override in place."""
    if '=' not in override:
        raise ConfigError('override {!r} is not of the form section.key=value'.format(override))
    dotted, raw = override.split('=', 1)
    dotted = dotted.strip()
    if '.' not in dotted:
        raise ConfigError('override key {!r} needs a section, like mag.omega'.format(dotted))
    section, name = dotted.split('.', 1)
    if section not in SCHEMA or name not in SCHEMA[section]:
        raise ConfigError('override names an unknown key {!r}'.format(dotted))
    try:
        values[section][name] = convert(SCHEMA[section][name], raw)
    except _ValueProblem as e:
        raise ConfigError('override {}: {}'.format(dotted, e))
    return values


@dataclass
class Configuration:
    """Validated experiment configuration: the run, the harness and the raw values."""
    values: dict
    run: RunConfig
    harness: HarnessConfig
    path: str = None
    overrides: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def mag(self):
        return self.run.mag

    def echo_text(self):
        lines = ['# validated configuration, all defaults materialised']
        t_omega = self.mag.t_omega
        if t_omega is None:
            lines.append('# t_omega = none (omega = 0, no singular times)')
        else:
            lines.append('# t_omega = {!r}'.format(t_omega))
        for section, keys in SCHEMA.items():
            lines.append('')
            lines.append('[{}]'.format(section))
            for name, key in keys.items():
                lines.append('{} = {}'.format(name, format_value(key, self.values[section][name])))
        return '\n'.join(lines) + '\n'

    def echo(self, path):
        with open(path, 'w') as f:
            f.write(self.echo_text())
        return path


def build(values, path=None, overrides=()):
    """Turns a values dict into a validated Configuration."""
    r, d, g = values['run'], values['distribution'], values['grid']
    try:
        distribution = DistributionSpec(
            family=d['family'], mass=d['mass'], temperature=d['temperature'], width=d['width'],
            center=d['center'], cutoff=d['cutoff'], velocity_cutoff=d['velocity_cutoff'],
            drift=d['drift'], radius=d['radius'], velocity_radius=d['velocity_radius'])
        grid = GridSpec(origin=g['origin'], extent=g['extent'], cells=g['cells'])
        mag = MagneticConfig(values['mag']['omega'])
    except (ValueError, UnknownDistributionError) as e:
        raise ConfigError(str(e), path=path)
    run = RunConfig(
        distribution=distribution, n=r['n'], seed=r['seed'], grid=grid, mag=mag, dt=r['dt'],
        t_end=r['t_end'], diag_every=r['diag_every'],
        moment_exponents=values['diagnostics']['moment_exponents'],
        e_norm_exponents=values['diagnostics']['e_norm_exponents'],
        snapshot_times=values['diagnostics']['snapshot_times'],
        field_mode=values['field']['mode'], budget_bytes=values['field']['budget_bytes'],
        deterministic=r['deterministic'], workers=r['workers'], cfl=r['cfl'],
        record_history=r['record_history'], history_every=r['history_every'],
        record_phase_space=r['record_phase_space'],
        position_shift=values['perturbation']['position_shift'],
        velocity_shift=values['perturbation']['velocity_shift'])
    run.validate()
    harness = HarnessConfig.from_values(values['harness'])
    return Configuration(values=values, run=run, harness=harness, path=path, overrides=tuple(overrides))


def parse_config(path=None, overrides=()):
    """\
    Reads the config file at `path` (defaults only when None), applies the
    'section.key=value' overrides in order and validates the result.
    Raises ConfigError (parse problems, with line and column) or
    ValidationError (a run invariant is broken).
    """
    values = defaults()
    if path is not None:
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise ConfigError('cannot read config: {}'.format(e.strerror or e), path=path)
        parse_text(text, path, values)
    for override in overrides:
        apply_override(values, override)
    config = build(values, path, overrides)
    log.debug('parsed configuration from %s with %d overrides', path or '<defaults>', len(overrides))
    return config
