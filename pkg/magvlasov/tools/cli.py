# cli.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Command line front end. Every subcommand reads a configuration, writes the
# validated configuration and its artifacts to the output directory, then a
# report, a summary table and a manifest of everything written. Exit status
# is 0 when every check passed, 1 when one failed (or the run broke) and 2
# for usage or configuration errors.

import argparse
import csv
import hashlib
import logging
import math
import os
import sys
from dataclasses import replace

import magvlasov
from magvlasov.cache import RunHistory
from magvlasov.config import parse_config
from magvlasov.ensemble import run
from magvlasov.errors import ConfigError, MagVlasovError, NonAnalyticFamilyError
from magvlasov.harness.decay import verify_decay_envelope
from magvlasov.harness.density import verify_bounded_density_condition
from magvlasov.harness.estimates import verify_estimates, verify_field_estimates
from magvlasov.harness.fields_suite import verify_fields
from magvlasov.harness.gronwall import verify_conservation, verify_gronwall, verify_moments_finite
from magvlasov.harness.inequalities import verify_inequalities
from magvlasov.harness.kinematics_suite import verify_kinematics
from magvlasov.harness.report import first_failure, write_report, write_summary
from magvlasov.harness.representation import evaluation_grid, history_config, verify_representation
from magvlasov.harness.stability import verify_stability
from magvlasov.tools.scan import check_approach, scan_singularity, write_scan
from magvlasov.utils import LOGGER_LEVELS, configure_logging, format_float, write_manifest

log = logging.getLogger('magvlasov.tools')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(MagVlasovError):
    """The configuration is valid but does not suit the subcommand."""


def _simulate(config, out):
    result = run(config.run, os.path.join(out, 'snapshots'))
    result.series.to_csv(os.path.join(out, 'series.csv'))
    reports = [verify_moments_finite(result.series, config.mag)]
    reports.extend(verify_conservation(result.series, energy_tol=math.inf))
    return reports


def _verify_kinematics(config, out):
    return verify_kinematics(samples=config.harness.trials, seed=config.run.seed)


def _verify_fields(config, out):
    h = config.harness
    reports = verify_fields(levels=h.poisson_levels, seed=config.run.seed, budget_bytes=config.run.budget_bytes)
    result = run(config.run)
    result.series.to_csv(os.path.join(out, 'series.csv'))
    reference = None
    if config.run.n >= 100:
        reference = run(replace(config.run, n=config.run.n // 10)).series
    reports.extend(verify_field_estimates(result.series, h.k, config.mag, h.d_grid, h.energy_tol,
                                          h.window_guard, reference, h.field_fit_ratio))
    return reports


def _config_key(config):
    return hashlib.sha256(config.echo_text().encode('utf-8')).hexdigest()


def _verify_representation(config, out):
    h = config.harness
    span = config.mag.t_omega if config.mag.magnetised else config.run.t_end
    t = h.representation_fraction * span
    path = os.path.join(out, 'history.pkl')
    key = _config_key(config)
    history = RunHistory.load(path, magvlasov.__version_str__, key) if os.path.exists(path) else None
    if history is None:
        result = run(history_config(config.run, t, h.quadrature_steps))
        result.series.to_csv(os.path.join(out, 'series.csv'))
        history = result.history
        history.key = key
        history.save(path, magvlasov.__version_str__)
    else:
        log.info('reusing run history from %s', path)
        t = history.frames[-1].t
    grid = evaluation_grid(config.run.grid, h.eval_cells)
    return [verify_representation(history, t, grid, h.quadrature_steps, h.representation_tol)]


def _verify_inequalities(config, out):
    reports = verify_inequalities(trials=config.harness.trials, seed=config.run.seed)
    reports.extend(verify_estimates(config.mag, config.harness))
    return reports


def _verify_gronwall(config, out):
    h = config.harness
    result = run(config.run, os.path.join(out, 'snapshots'))
    result.series.to_csv(os.path.join(out, 'series.csv'))
    reports = [verify_gronwall(result.series, h.k, config.mag, h.gronwall_tol, h.gronwall_cap),
               verify_moments_finite(result.series, config.mag)]
    reports.extend(verify_conservation(result.series, energy_tol=h.energy_tol))
    return reports


def _verify_stability(config, out):
    h = config.harness
    report, series = verify_stability(config.run, h.stability_delta, h.stability_cap, h.stability_ceiling)
    with open(os.path.join(out, 'stability.csv'), 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['t', 'Q'])
        for t, q in zip(series.times, series.q):
            writer.writerow([format_float(t), format_float(q)])
    return [report]


def _verify_decay(config, out):
    result = run(replace(config.run, record_phase_space=True))
    result.series.to_csv(os.path.join(out, 'series.csv'))
    return [verify_decay_envelope(result, alpha=config.harness.decay_alpha)]


def _verify_density(config, out):
    h = config.harness
    spec = config.run.distribution
    if not spec.radial:
        raise UsageError('verify-density needs a radial family (maxwellian or compact-bump), got {}'.format(
            spec.family))
    result = run(config.run)
    result.series.to_csv(os.path.join(out, 'series.csv'))
    return [verify_bounded_density_condition(
        spec, config.mag, result.field_sup, t_points=h.density_t_points, t_end=config.run.t_end,
        x_cells=h.density_x_cells, v_max=h.density_velocity_max, v_cells=h.density_v_cells,
        density_sup=result.density_sup or None, factor=h.density_bound_factor)]


def _scan_singularity(config, out):
    if not config.mag.magnetised:
        raise UsageError('scan-singularity needs mag.omega > 0')
    d = config.harness.d_grid[0] if config.harness.d_grid else 3.0
    rows = scan_singularity(config.mag, d=d)
    write_scan(rows, os.path.join(out, 'scan.csv'))
    return [check_approach(rows, config.mag)]


COMMANDS = {
    'simulate': (_simulate, 'run a simulation and write the moment series'),
    'verify-kinematics': (_verify_kinematics, 'check the closed-form magnetised characteristics'),
    'verify-fields': (_verify_fields, 'check deposition, the field solver and a run\'s field bounds'),
    'verify-representation': (_verify_representation, 'check the density representation on a run'),
    'verify-inequalities': (_verify_inequalities, 'check the functional inequalities and time integrals'),
    'verify-gronwall': (_verify_gronwall, 'fit moment envelopes per cyclotron window'),
    'verify-stability': (_verify_stability, 'compare two runs from perturbed initial data'),
    'verify-decay': (_verify_decay, 'check the velocity decay envelope along a run'),
    'verify-density': (_verify_density, 'check the bounded-density condition'),
    'scan-singularity': (_scan_singularity, 'tabulate the singular factors around 2 pi / omega'),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)

    group = common.add_argument_group("configuration")

    group.add_argument(
            "--config",
            metavar="PATH",
            help="configuration file (defaults only when omitted)",
            default=None)

    group.add_argument(
            "--set",
            dest="overrides",
            action="append",
            metavar="SECTION.KEY=VALUE",
            help="override one configuration value, may be repeated",
            default=[])

    group.add_argument(
            "--seed",
            type=int,
            help="override run.seed",
            default=None)

    group.add_argument(
            "--deterministic",
            action="store_true",
            help="force fixed-order reductions (default from the configuration)",
            default=False)

    group = common.add_argument_group("output")

    group.add_argument(
            "--out",
            metavar="DIR",
            help="output directory, default: %(default)s",
            default="magvlasov-out")

    group = common.add_argument_group("diagnostics")

    group.add_argument(
            "-q", "--quiet",
            action="store_true",
            help="suppress non-error messages",
            default=False)

    group.add_argument(
            "--log-level",
            choices=sorted(LOGGER_LEVELS),
            help="logging level, default: %(default)s",
            default="info")

    group.add_argument(
            "--develop",
            action="store_true",
            help="show Python traceback on error",
            default=False)

    parser = argparse.ArgumentParser(
            prog="magvlasov",
            description="MagVlasov - magnetised Vlasov-Poisson particle simulator and estimate checker.")
    parser.add_argument(
            "--version",
            action="version",
            version="%(prog)s " + magvlasov.__version_str__)
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for name, (_fn, description) in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=description, description=description)
    return parser


def _overrides(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append('run.seed={}'.format(args.seed))
    if args.deterministic:
        overrides.append('run.deterministic=true')
    return overrides


def dispatch(args):
    """Runs the parsed command; returns the exit status."""
    try:
        config = parse_config(args.config, _overrides(args))
    except ConfigError as e:
        sys.stderr.write('configuration error: {}\n'.format(e))
        if args.develop:
            raise
        return EXIT_USAGE
    out = args.out
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as e:
        sys.stderr.write('cannot create output directory {!r}: {}\n'.format(out, e))
        return EXIT_USAGE
    config.echo(os.path.join(out, 'config.ini'))
    if not args.quiet:
        log.info('%s: omega=%r, output in %s', args.command, config.mag.omega, out)

    fn, _description = COMMANDS[args.command]
    reports = []
    try:
        reports = fn(config, out)
    except (UsageError, NonAnalyticFamilyError) as e:
        sys.stderr.write('{}: {}\n'.format(args.command, e))
        if args.develop:
            raise
        return EXIT_USAGE
    except MagVlasovError as e:
        sys.stderr.write('{} failed: {}\n'.format(args.command, e))
        if args.develop:
            raise
        return EXIT_FAILED
    finally:
        if reports:
            write_report(reports, os.path.join(out, 'report.txt'))
            write_summary(reports, os.path.join(out, 'summary.csv'))
        write_manifest(out)

    failed = first_failure(reports)
    if failed is not None:
        sys.stderr.write('check failed: {} (max_ratio={}, threshold={})\n'.format(
            failed.name, failed.max_ratio, failed.threshold))
        return EXIT_FAILED
    if not args.quiet:
        sys.stderr.write('--- {} checks passed ---\n'.format(len(reports)))
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.quiet)
    return dispatch(args)


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
if __name__ == '__main__':
    sys.exit(main())
