# coding=utf-8
from __future__ import absolute_import, print_function

import os
import sys
import csv
import json
import logging
import argparse

import numpy as np

from cmlab import __version__
from cmlab import distributions as dist
from cmlab import experiments
from cmlab.serialize import Serializable
from cmlab.config import get_option, get_seed, get_config, update_config, load_config_file
from cmlab.distributions import RngStream, as_generator
from cmlab.paths import sample_williams_path
from cmlab.geometry import meanders, minslope
from cmlab.poisson import sample_straddles, sample_tau_window, sample_zenith_increments
from cmlab.chains import chain_from_recursion
from cmlab.stats import save_reports
from cmlab.logger import logger, init_logger, init_file_logger
from cmlab.error import (
    ParameterError, InputError, RangeError, OrderingError, SetupError, RegistryError,
    ConstructionError, CoverageError
)

FORMATS = ('json', 'csv')
SAMPLE_TARGETS = {
    'chi5': 0, 'straddle1': 0, 'zenith': 2, 'meander': 1, 'chain': 1, 'tau-window': 2,
}
DENSITY_ORACLES = (
    'chi5', 'kb', 'h_ab', 'ig', 'ig_sb', 'tilde_meander', 'tilde_rn', 'd1_mixture', 'f3_marginal',
)
REPORT_COLUMNS = (
    'experiment', 'statistic', 'kind', 'p_value_or_distance', 'threshold', 'passed', 'n', 'seed',
    'retries', 'version',
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2


class RunConfig(Serializable):
    """Settings of one command line run: flags over the user config file over
    packaged defaults.

    Args:
        ``seed`` (int, optional): Defaults to get_seed().

        ``workers`` (int, optional): Defaults to the configured count.

        ``out_dir`` (str, optional): Defaults to the working directory.

        ``format`` (str, optional): json or csv. Defaults to json.

        ``params`` (dict, optional): Experiment parameter overrides. Defaults to None.
    """
    KEYS = ('seed', 'workers', 'out_dir', 'format', 'params')

    def __init__(self, seed=None, workers=None, out_dir=None, format=None, params=None):
        super(RunConfig, self).__init__()
        self.seed = get_seed() if seed is None else int(seed)
        self.workers = get_option('workers') if workers is None else int(workers)
        self.out_dir = out_dir or os.getcwd()
        self.format = format or 'json'
        self.params = dict(params or dict())
        if self.format not in FORMATS:
            raise ParameterError(
                "Unknown format '{}'. Valid formats: {}".format(self.format, ", ".join(FORMATS))
            )
        if self.workers < 1 or self.seed < 0:
            raise ParameterError(
                "Need workers >= 1 and seed >= 0, got {}, {}".format(self.workers, self.seed)
            )

    @classmethod
    def from_sources(cls, args, file_values=None):
        """Merge parsed flags with values read from a config file."""
        values = dict((k, v) for k, v in (file_values or dict()).items() if k in cls.KEYS)
        for key in cls.KEYS:
            flag = getattr(args, key, None)
            if flag is not None and flag != dict():
                values[key] = flag
        return cls(**values)


class _Parser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "{}: error: {}\n".format(self.prog, message))


def _parameter(text):
    """key=value with value read as JSON when possible."""
    if '=' not in text:
        raise argparse.ArgumentTypeError("Expected key=value, got '{}'".format(text))
    key, value = text.split('=', 1)
    try:
        return key, json.loads(value)
    except ValueError:
        return key, value


def build_parser():
    parser = _Parser(prog='cmlab', description='Monte Carlo lab for the concave majorant of Brownian motion.')
    parser.add_argument('--version', action='version', version='%(prog)s {}'.format(__version__))
    parser.add_argument('--config', help='JSON file with run settings and option overrides.')
    parser.add_argument('--verbose', action='store_true', help='Log progress to stdout.')
    parser.add_argument('--log-file', nargs='?', const='', default=None, metavar='DIR',
                        help='Also log to a dated file, under ~/.cmlab unless DIR is given.')
    parser.add_argument('--timing', action='store_true', help='Store wall times in reports.')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    run = commands.add_parser('experiment', help="Run a registered experiment, or 'all'.")
    run.add_argument('name')
    run.add_argument('--n', type=int, help="Override the experiment's sample size.")
    run.add_argument('--seed', type=int, help='Seed. Defaults to $CMLAB_SEED or the packaged seed.')
    run.add_argument('--workers', type=int, help='Processes. Results do not depend on it.')
    run.add_argument('--out', dest='out_dir', help='Output directory. Defaults to the working directory.')
    run.add_argument('--format', choices=FORMATS, help='Report file format. Defaults to json.')
    run.add_argument('--param', dest='params', type=_parameter, action='append', default=list(),
                     metavar='KEY=VALUE', help='Experiment parameter override, repeatable.')

    commands.add_parser('list', help='Registered experiments and their claims.')

    sample = commands.add_parser('sample', help='Dump raw samples as CSV.')
    sample.add_argument('target', choices=sorted(SAMPLE_TARGETS))
    sample.add_argument('args', nargs='*', type=float,
                        help='zenith: a b; meander: mu; chain: depth; tau-window: lo hi.')
    sample.add_argument('--n', type=int, default=1000)
    sample.add_argument('--seed', type=int)
    sample.add_argument('--points', type=int, help='Meander grid points.')
    sample.add_argument('--out', help='CSV file. Defaults to stdout.')

    density = commands.add_parser('density', help='Tabulate an oracle density as CSV.')
    density.add_argument('oracle', choices=DENSITY_ORACLES)
    density.add_argument('--grid', type=int, default=200, help='Points per axis.')
    density.add_argument('--a', type=float, default=2.0)
    density.add_argument('--b', type=float, default=1.0)
    density.add_argument('--y', type=float, default=1.0)
    density.add_argument('--mu', type=float, default=1.0)
    density.add_argument('--max', dest='upper', type=float, help='Upper end of the grid.')
    density.add_argument('--out', help='CSV file. Defaults to stdout.')
    return parser


# ------------------------------------------------------------------------------
# CSV
# ------------------------------------------------------------------------------
def _cell(value):
    if isinstance(value, (bool, np.bool_, str)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return '{:.17g}'.format(float(value))


def write_csv(columns, rows, fp):
    """Header row then one row per record, floats with 17 significant digits."""
    writer = csv.writer(fp, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


def _write_table(columns, values, out=None):
    rows = np.column_stack(values) if not isinstance(values, np.ndarray) else values
    if out:
        with open(out, 'w') as fp:
            write_csv(columns, rows, fp)
        logger.debug("Wrote {} rows to {}".format(len(rows), out))
        return out
    write_csv(columns, rows, sys.stdout)
    return None


def save_reports_csv(reports, filepath, timing=False):
    columns = REPORT_COLUMNS + (('wall_time',) if timing else ())
    with open(filepath, 'w') as fp:
        write_csv(columns, ([getattr(r, c) for c in columns] for r in reports), fp)
    return filepath


# ------------------------------------------------------------------------------
# Subcommands
# ------------------------------------------------------------------------------
def run_experiments(names, settings, n=None, timing=False):
    """Run experiments, writing report files and sample sidecars into settings.out_dir.

    Returns:
        list: All TestReport instances.
    """
    if not os.path.isdir(settings.out_dir):
        os.makedirs(settings.out_dir)
    every = list()
    for name in names:
        defaults = experiments.get_experiment(name).defaults
        params = settings.params
        if len(names) > 1:
            # a suite run applies each override only where the experiment takes it
            params = dict((k, v) for k, v in params.items() if k in defaults)
        if n is not None and 'n' in defaults:
            params = dict(params, n=n)
        spec = experiments.ExperimentSpec(name, params, settings.seed)
        samples = dict()
        reports = experiments.run(spec, settings.workers, timing, samples)
        base = os.path.join(settings.out_dir, name)
        if settings.format == 'json':
            save_reports(reports, base + '.reports.json')
        else:
            save_reports_csv(reports, base + '.reports.csv', timing)
        for sample, (columns, values) in sorted(samples.items()):
            _write_table(columns, values, '{}.{}.csv'.format(base, sample))
        every.extend(reports)
    return every


def _run_command(args, settings):
    if args.name == 'all':
        names = experiments.get_experiments()
    else:
        experiments.get_experiment(args.name)
        names = [args.name]
        if args.n is not None and 'n' not in experiments.get_experiment(args.name).defaults:
            raise RegistryError("Experiment {} takes no sample size".format(args.name))
    reports = run_experiments(names, settings, args.n, args.timing)
    for each in reports:
        print("{:<28} {:<60} {:<11} {:>12.6g} {}".format(
            each.experiment, each.statistic, each.kind, each.p_value_or_distance,
            'pass' if each.passed else 'FAIL'))
    failed = [each for each in reports if not each.passed]
    return EXIT_FAILED if failed else EXIT_OK


def _list_command():
    for name in experiments.get_experiments():
        print("{:<28} {}".format(name, experiments.get_experiment(name).claim))
    return EXIT_OK


def _check_arguments(target, values):
    expected = SAMPLE_TARGETS[target]
    if len(values) != expected:
        raise ParameterError(
            "Target {} takes {} positional values, got {}".format(target, expected, len(values))
        )


def sample_target(target, values, n, rng, points=None):
    """Raw samples of a target.

    Returns:
        tuple: (columns, 2D array)
    """
    _check_arguments(target, values)
    g = as_generator(rng)
    if target in ('chi5', 'straddle1'):
        batch = sample_straddles(n, g)
        if target == 'chi5':
            return ['value'], (batch.k + batch.y)[:, None]
        columns = ['slope', 'value', 'gap', 'd_minus_t', 'intercept', 'g', 'd']
        return columns, np.column_stack(
            [batch.a, batch.k, batch.y, batch.w, batch.intercept, batch.g, batch.d]
        )
    if target == 'zenith':
        ds, dz = sample_zenith_increments(values[0], values[1], n, g)
        return ['ds', 'dz'], np.column_stack([ds, dz])
    if target == 'meander':
        mu = values[0]
        points = points or get_option('meander_points')
        rows = np.empty((n, 5))
        for i in range(n):
            result = meanders(sample_williams_path(mu, points - 1, 8, g), mu, points)
            lowest, where = minslope(result.hat)
            rows[i] = (result.sigma, result.tilde.values[-1], result.hat.values[-1], lowest, where)
        return ['sigma', 'tilde_end', 'hat_end', 'hat_minslope', 'hat_minslope_time'], rows
    if target == 'chain':
        if int(values[0]) != values[0]:
            raise ParameterError("Chain depth must be an integer, got {}".format(values[0]))
        depth = int(values[0])
        chain = chain_from_recursion(depth, g, size=n)
        index = np.repeat(np.arange(n), depth + 1)
        step = np.tile(np.arange(depth + 1), n)
        return ['chain', 'step', 'tau', 'kappa', 'rho'], np.column_stack(
            [index, step, chain.tau.ravel(), chain.kappa.ravel(), chain.rho.ravel()])
    # tau-window
    rows = list()
    for i in range(n):
        jumps = sample_tau_window(values[0], values[1], g)
        rows.extend((i, r, dtau) for r, dtau in zip(jumps.r, jumps.dtau))
    return ['window', 'r', 'dtau'], np.array(rows, dtype=float).reshape(-1, 3)


def _sample_command(args):
    seed = get_seed() if args.seed is None else args.seed
    columns, values = sample_target(args.target, args.args, args.n, RngStream(seed), args.points)
    _write_table(columns, values, args.out)
    return EXIT_OK


def _grid(lo, hi, count):
    # midpoints keep singular end points out of the table
    edges = np.linspace(lo, hi, count + 1)
    return 0.5 * (edges[1:] + edges[:-1])


def _f3_marginal(z, nodes=48):
    """Density of 2K(1) - B(1) at z from f3, over {a + b + y = z}."""
    def integrand(u, v):
        y = zi * u
        a = (zi - y) * v
        return dist.f3_density(a, zi - y - a, y) * zi * (zi - y)

    out = np.empty(len(z))
    for i, zi in enumerate(z):
        out[i] = dist.tensor_quadrature(integrand, [(0.0, 1.0), (0.0, 1.0)], nodes)
    return out


def density_table(oracle, grid, a=2.0, b=1.0, y=1.0, mu=1.0, upper=None):
    """Tabulate an oracle on a midpoint grid.

    Returns:
        tuple: (columns, 2D array)
    """
    if grid < 2:
        raise ParameterError("Grid needs at least 2 points, got {}".format(grid))
    if oracle in ('chi5', 'f3_marginal'):
        x = _grid(0.0, upper or 7.0, grid)
        reference = dist.chi_pdf(x, 5)
        if oracle == 'chi5':
            return ['x', 'density', 'cdf'], np.column_stack([x, reference, dist.chi_cdf(x, 5)])
        return ['z', 'density', 'chi5'], np.column_stack([x, _f3_marginal(x), reference])
    if oracle == 'kb':
        k, gap = np.meshgrid(_grid(0.0, upper or 5.0, grid), _grid(0.0, upper or 5.0, grid), indexing='ij')
        density = dist.kb_density(k, gap)
        return ['k', 'gap', 'density'], np.column_stack([k.ravel(), gap.ravel(), density.ravel()])
    if oracle == 'h_ab':
        top = upper or 16.0
        s, z = np.meshgrid(_grid(0.0, top, grid), _grid(0.0, a * top, grid), indexing='ij')
        density = dist.zenith_density(a, b, s, z)
        return ['s', 'z', 'density'], np.column_stack([s.ravel(), z.ravel(), density.ravel()])
    if oracle in ('ig', 'ig_sb'):
        biased = oracle == 'ig_sb'
        t = _grid(0.0, upper or 4.0 * (y / mu + 1.0 / mu ** 2), grid)
        return ['t', 'density', 'cdf'], np.column_stack(
            [t, dist.ig_density(mu, y, t, size_biased=biased), dist.ig_cdf(mu, y, t, size_biased=biased)])
    if oracle in ('tilde_meander', 'tilde_rn'):
        x = _grid(0.0, upper or 5.0, grid)
        if oracle == 'tilde_rn':
            return ['x', 'rn'], np.column_stack([x, dist.tilde_rn(x)])
        return ['x', 'density', 'cdf'], np.column_stack(
            [x, dist.tilde_meander_density(x), dist.tilde_meander_cdf(x)])
    # d1_mixture, with the slope, intercept and gap taken from --a, --b and --y
    t = _grid(0.0, upper or 8.0, grid)
    return ['t', 'density', 'cdf'], np.column_stack(
        [t, dist.d1_mixture_density(t, a, b, y), dist.d1_mixture_cdf(t, a, b, y)])


def _density_command(args):
    columns, values = density_table(args.oracle, args.grid, args.a, args.b, args.y, args.mu, args.upper)
    _write_table(columns, values, args.out)
    return EXIT_OK


def _setup_logging(args):
    if args.verbose:
        init_logger(logging.DEBUG)
    if args.log_file is not None:
        path = init_file_logger(args.log_file or None)
        logger.info("Logging to {}".format(path))


def main(argv=None):
    """Command line entry point.

    Returns:
        int: 0 when every check passed, 2 when one failed, 1 on usage errors.
    """
    args = build_parser().parse_args(argv)
    _setup_logging(args)
    try:
        file_values = dict()
        if args.config:
            file_values = load_config_file(args.config, set(get_config().keys()) | set(RunConfig.KEYS))
            update_config(dict((k, v) for k, v in file_values.items() if k not in RunConfig.KEYS))
        if args.command == 'list':
            return _list_command()
        if args.command == 'sample':
            return _sample_command(args)
        if args.command == 'density':
            return _density_command(args)
        args.params = dict(args.params)
        settings = RunConfig.from_sources(args, file_values)
        return _run_command(args, settings)
    except (RegistryError, ParameterError, InputError, RangeError, OrderingError, SetupError) as error:
        sys.stderr.write("cmlab: {}\n".format(error))
        return EXIT_USAGE
    except (ConstructionError, CoverageError) as error:
        sys.stderr.write("cmlab: construction failed: {}\n".format(error))
        return EXIT_FAILED
    except (IOError, OSError) as error:
        sys.stderr.write("cmlab: {}\n".format(error))
        return EXIT_USAGE
