# coding=utf-8
from __future__ import absolute_import, print_function

import os
import csv
import json
import tempfile

import numpy as np

from cmlab import cli
from cmlab import stats
from cmlab import experiments
from cmlab.config import reset_config, get_option
from cmlab.distributions import RngStream
from cmlab.error import ConstructionError, ParameterError
from cmlab import logger

import pytest

# Debug logging
logger.init_logger()
# logger.init_file_logger()


def _failing(ctx):
    ctx.add(stats.distance_outcome('always off', 1.0, 0.5), 1)


def _broken(ctx):
    raise ConstructionError("window cap")


def _read_csv(filepath):
    with open(filepath) as fp:
        return list(csv.reader(fp))


def _read_bytes(filepath):
    with open(filepath, 'rb') as fp:
        return fp.read()


class Test_Experiment:
    @pytest.fixture(autouse=True)
    def setup(self):
        experiments.reset_experiments()
        reset_config()
        self.out = tempfile.mkdtemp()

    def test_unknown_name(self):
        assert cli.main(['experiment', 'nosuch', '--out', self.out]) == cli.EXIT_USAGE

    def test_pass(self):
        result = cli.main(['experiment', 'size_biased_ig', '--n', '2000', '--seed', '4', '--out', self.out])
        assert result == cli.EXIT_OK
        reports = stats.load_reports(os.path.join(self.out, 'size_biased_ig.reports.json'))
        assert len(reports) == 3
        assert all(r.seed == 4 and r.n in (0, 2000) for r in reports)

    def test_failure_exit(self):
        experiments.add_experiment('always_fails', _failing, 'never holds')
        assert cli.main(['experiment', 'always_fails', '--out', self.out]) == cli.EXIT_FAILED

    def test_construction_exit(self):
        experiments.add_experiment('broken', _broken, 'never builds')
        assert cli.main(['experiment', 'broken', '--out', self.out]) == cli.EXIT_FAILED

    def test_n_without_size(self):
        assert cli.main(['experiment', 'f5_quadrature', '--n', '10', '--out', self.out]) == cli.EXIT_USAGE

    def test_unknown_param(self):
        result = cli.main(['experiment', 'chi5_marginal', '--param', 'bins=3', '--out', self.out])
        assert result == cli.EXIT_USAGE

    def test_reruns_identical(self):
        first, second = tempfile.mkdtemp(), tempfile.mkdtemp()
        arguments = ['experiment', 'chi5_marginal', '--n', '5000', '--seed', '9']
        cli.main(arguments + ['--out', first])
        cli.main(arguments + ['--out', second, '--workers', '2'])
        for name in ('chi5_marginal.reports.json', 'chi5_marginal.two_k_minus_b.csv'):
            assert _read_bytes(os.path.join(first, name)) == _read_bytes(os.path.join(second, name))

    def test_csv_format(self):
        result = cli.main(['--timing', 'experiment', 'chi5_marginal', '--n', '2000', '--seed', '1',
                           '--format', 'csv', '--param', 't=2.0', '--out', self.out])
        assert result in (cli.EXIT_OK, cli.EXIT_FAILED)
        rows = _read_csv(os.path.join(self.out, 'chi5_marginal.reports.csv'))
        assert tuple(rows[0]) == cli.REPORT_COLUMNS + ('wall_time',)
        assert rows[1][0] == 'chi5_marginal'
        sample = _read_csv(os.path.join(self.out, 'chi5_marginal.two_k_minus_b.csv'))
        assert sample[0] == ['value'] and len(sample) == 2001

    def test_config_file(self):
        config = os.path.join(self.out, 'run.json')
        with open(config, 'w') as fp:
            json.dump({'seed': 5, 'params': {'n': 2000}, 'alpha': 1e-4}, fp)
        assert cli.main(['--config', config, 'experiment', 'size_biased_ig', '--out', self.out]) == cli.EXIT_OK
        reports = stats.load_reports(os.path.join(self.out, 'size_biased_ig.reports.json'))
        assert reports[1].seed == 5 and reports[1].n == 2000
        assert reports[1].threshold == 1e-4
        assert get_option('alpha') == 1e-4
        reset_config()

    def test_config_file_unknown_key(self):
        config = os.path.join(self.out, 'run.json')
        with open(config, 'w') as fp:
            json.dump({'colour': 'red'}, fp)
        assert cli.main(['--config', config, 'list']) == cli.EXIT_USAGE


class Test_RunConfig:
    def test_flags_win(self):
        args = cli.build_parser().parse_args(['experiment', 'chi5_marginal', '--seed', '3'])
        args.params = dict(args.params)
        settings = cli.RunConfig.from_sources(args, {'seed': 8, 'workers': 2})
        assert settings.seed == 3 and settings.workers == 2

    def test_validation(self):
        with pytest.raises(ParameterError):
            cli.RunConfig(format='xml')
        with pytest.raises(ParameterError):
            cli.RunConfig(workers=0)


class Test_Parser:
    def test_bad_target(self):
        with pytest.raises(SystemExit) as exception:
            cli.main(['sample', 'nosuch'])
        assert exception.value.code == cli.EXIT_USAGE

    def test_bad_parameter(self):
        with pytest.raises(SystemExit) as exception:
            cli.main(['experiment', 'chi5_marginal', '--param', 'n'])
        assert exception.value.code == cli.EXIT_USAGE

    def test_version(self):
        with pytest.raises(SystemExit) as exception:
            cli.main(['--version'])
        assert exception.value.code == 0

    def test_list(self, capsys):
        assert cli.main(['list']) == cli.EXIT_OK
        assert 'chi5_marginal' in capsys.readouterr().out


class Test_Sample:
    @pytest.fixture(autouse=True)
    def setup(self):
        self.out = tempfile.mkdtemp()

    def test_reruns_identical(self):
        first, second = os.path.join(self.out, 'a.csv'), os.path.join(self.out, 'b.csv')
        assert cli.main(['sample', 'chi5', '--n', '200', '--seed', '3', '--out', first]) == cli.EXIT_OK
        cli.main(['sample', 'chi5', '--n', '200', '--seed', '3', '--out', second])
        assert _read_bytes(first) == _read_bytes(second)
        assert len(_read_csv(first)) == 201

    def test_wrong_arguments(self):
        assert cli.main(['sample', 'zenith', '2', '--n', '10']) == cli.EXIT_USAGE

    def test_zenith(self):
        columns, values = cli.sample_target('zenith', [2.0, 1.0], 500, RngStream(1))
        assert columns == ['ds', 'dz']
        assert values.shape == (500, 2)

    def test_chain(self):
        columns, values = cli.sample_target('chain', [3.0], 4, RngStream(2))
        assert columns == ['chain', 'step', 'tau', 'kappa', 'rho']
        assert values.shape == (16, 5)
        with pytest.raises(ParameterError):
            cli.sample_target('chain', [2.5], 4, RngStream(2))

    def test_meander(self):
        columns, values = cli.sample_target('meander', [1.0], 3, RngStream(3), points=65)
        assert columns[0] == 'sigma' and values.shape == (3, 5)
        assert np.all(values[:, 0] > 0)

    def test_tau_window(self):
        columns, values = cli.sample_target('tau-window', [1.0, 8.0], 50, RngStream(4))
        assert columns == ['window', 'r', 'dtau']
        assert np.all((values[:, 1] > 1.0) & (values[:, 1] < 8.0))

    def test_straddle_stdout(self, capsys):
        assert cli.main(['sample', 'straddle1', '--n', '5', '--seed', '1']) == cli.EXIT_OK
        lines = capsys.readouterr().out.strip().split('\n')
        assert lines[0] == 'slope,value,gap,d_minus_t,intercept,g,d'
        assert len(lines) == 6


class Test_Density:
    def test_h_ab(self):
        out = os.path.join(tempfile.mkdtemp(), 'h21.csv')
        assert cli.main(['density', 'h_ab', '--a', '2', '--b', '1', '--grid', '64', '--out', out]) == cli.EXIT_OK
        rows = _read_csv(out)
        assert rows[0] == ['s', 'z', 'density']
        table = np.array(rows[1:], dtype=float)
        assert table.shape == (64 * 64, 3)
        s, z, density = table.T
        outside = (z > 2.0 * s) | (z < s)
        assert np.all(density[outside] == 0)
        assert np.all(density[~outside] > 0)

    def test_chi5(self):
        columns, values = cli.density_table('chi5', 100)
        assert columns == ['x', 'density', 'cdf']
        assert np.all(np.diff(values[:, 2]) > 0)

    def test_f3_marginal(self):
        columns, values = cli.density_table('f3_marginal', 20)
        np.testing.assert_allclose(values[:, 1], values[:, 2], rtol=1e-6, atol=1e-12)

    def test_kb_symmetric(self):
        _, values = cli.density_table('kb', 10)
        table = values[:, 2].reshape(10, 10)
        np.testing.assert_allclose(table, table.T)

    def test_d1_mixture(self):
        columns, values = cli.density_table('d1_mixture', 50, a=1.0, b=0.5, y=0.7)
        assert columns == ['t', 'density', 'cdf']
        assert np.all(values[:, 2] <= 1.0)

    def test_small_grid(self):
        assert cli.main(['density', 'chi5', '--grid', '1']) == cli.EXIT_USAGE
