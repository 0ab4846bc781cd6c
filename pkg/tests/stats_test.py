# coding=utf-8
from __future__ import absolute_import, print_function

import os
import tempfile

import numpy as np
from scipy import special

import cmlab.stats as stats
from cmlab import __version__
from cmlab.distributions import RngStream, phi
from cmlab.error import InputError, ParameterError, SetupError
from cmlab import logger

import pytest

# Debug logging
logger.init_logger()
# logger.init_file_logger()


class Test_KS:
    def test_two_identical_samples(self):
        sample = np.random.default_rng(1).standard_normal(500)
        outcome = stats.ks_test(sample, other=sample)
        assert outcome.value == pytest.approx(1.0)
        assert outcome.passed

    def test_shifted(self):
        g = np.random.default_rng(2)
        outcome = stats.ks_test(g.standard_normal(2000), other=g.standard_normal(2000) + 1.0)
        assert outcome.value < 1e-6
        assert outcome.passed is False

    def test_against_cdf(self):
        sample = np.random.default_rng(3).standard_normal(5000)
        outcome = stats.ks_test(sample, cdf=special.ndtr, alpha=1e-4)
        assert outcome.passed
        assert outcome.details['n_eff'] == 5000

    def test_arguments(self):
        with pytest.raises(InputError):
            stats.ks_test([0.1, 0.2])
        with pytest.raises(InputError):
            stats.ks_test([0.1], cdf=special.ndtr)
        with pytest.raises(InputError):
            stats.ks_test([0.1, np.inf], cdf=special.ndtr)

    def test_small_sample(self):
        with pytest.raises(InputError):
            stats.ks_test([0.1, 0.5, 0.9], cdf=lambda x: x)
        with pytest.raises(InputError):
            stats.ks_test(np.linspace(0.01, 0.99, 19), cdf=lambda x: x)
        with pytest.raises(InputError):
            stats.ks_test(np.linspace(0.01, 0.99, 50), other=[0.2, 0.4, 0.6])
        assert stats.ks_test(np.linspace(0.01, 0.99, 20), cdf=lambda x: x).details['n_eff'] == 20


class Test_ChiSquare:
    def test_normal(self):
        sample = np.random.default_rng(4).standard_normal(5000)
        outcome = stats.chi_square_gof(sample, phi, [(-4.0, 4.0)], bins=8, alpha=1e-4)
        assert outcome.passed
        assert outcome.details['dof'] >= 1

    def test_two_dimensions(self):
        sample = np.random.default_rng(5).standard_normal((5000, 2))
        outcome = stats.chi_square_gof(sample, lambda x, y: phi(x) * phi(y), [(-4.0, 4.0)] * 2, alpha=1e-4)
        assert outcome.passed

    def test_wrong_mass(self):
        sample = np.random.default_rng(6).standard_normal(1000)
        with pytest.raises(SetupError):
            stats.chi_square_gof(sample, phi, [(-4.0, 4.0)], expected_mass=0.5)

    def test_wrong_dimension(self):
        with pytest.raises(InputError):
            stats.chi_square_gof(np.zeros((10, 2)), phi, [(-4.0, 4.0)])


class Test_Energy:
    def test_same_sample(self):
        x = np.random.default_rng(7).standard_normal((300, 2))
        outcome = stats.energy_distance_test(x, x, RngStream(1), permutations=100)
        assert outcome.value > 0.9

    def test_shifted(self):
        g = np.random.default_rng(8)
        outcome = stats.energy_distance_test(
            g.standard_normal((300, 2)), g.standard_normal((300, 2)) + 1.0, RngStream(2), permutations=100
        )
        assert outcome.value == pytest.approx(1.0 / 101.0)

    def test_subsample(self):
        g = np.random.default_rng(9)
        outcome = stats.energy_distance_test(g.standard_normal(500), g.standard_normal(400), RngStream(3),
                                             permutations=100, subsample=100)
        assert outcome.details['n'] == 100 and outcome.details['m'] == 100

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            stats.energy_distance_test(np.zeros((5, 2)), np.zeros((5, 3)), RngStream(4))

    def test_few_permutations(self):
        g = np.random.default_rng(14)
        with pytest.raises(InputError):
            stats.energy_distance_test(g.standard_normal(50), g.standard_normal(50), RngStream(5), permutations=5)
        with pytest.raises(InputError):
            stats.energy_distance_test(g.standard_normal(50), g.standard_normal(50), RngStream(5), permutations=99)


class Test_ZTests:
    def test_poisson_counts(self):
        counts = np.random.default_rng(10).poisson(3.0, 5000)
        assert stats.poisson_count_test(counts, 3.0, threshold=4.0).passed
        outcome = stats.poisson_count_test(np.full(1000, 3), 3.0)
        assert outcome.passed is False
        assert outcome.details['variance'] == 0.0
        with pytest.raises(ParameterError):
            stats.poisson_count_test(counts, 0.0)
        with pytest.raises(InputError):
            stats.poisson_count_test(np.random.default_rng(10).poisson(3.0, 999), 3.0)

    def test_mean(self):
        assert stats.mean_test(np.random.default_rng(11).standard_normal(5000), 0.0, threshold=4.0).passed
        with pytest.raises(InputError):
            stats.mean_test(np.ones(10), 1.0)

    def test_binomial(self):
        outcome = stats.binomial_test(50, 100, 0.5)
        assert outcome.value == 0.0 and outcome.passed
        assert stats.binomial_test(90, 100, 0.5).passed is False
        with pytest.raises(ParameterError):
            stats.binomial_test(1, 10, 0.0)

    def test_weighted_mean(self):
        g = np.random.default_rng(12)
        # exponential(1) against uniform on (0, 20) reweighted by 20 e^-x
        direct = g.exponential(1.0, 20000)
        reference = 20.0 * g.random(20000)
        assert stats.weighted_mean_check(direct, reference, 20.0 * np.exp(-reference), threshold=4.0).passed

    def test_weighted_mean_errors(self):
        with pytest.raises(InputError):
            stats.weighted_mean_check(np.ones(3), np.ones(3), -np.ones(3))
        with pytest.raises(InputError):
            stats.weighted_mean_check(np.ones(3), np.ones(3), np.ones(4))

    def test_uniformity(self):
        assert stats.uniformity_meta_test(np.random.default_rng(13).random(500), alpha=1e-4).passed


class Test_Reports:
    def test_p_value_at_alpha(self):
        assert stats.p_value_outcome('edge', 0.001, alpha=0.001).passed is True
        assert stats.p_value_outcome('edge', 0.000999, alpha=0.001).passed is False

    def test_outcome(self):
        report = stats.TestReport.from_outcome('demo', stats.distance_outcome('gap', 0.1, 0.2), 10, 1)
        assert report.kind == 'distance'
        assert report.passed is True
        assert report.version == stats.build_version()
        assert report.version.startswith(__version__) or '-g' in report.version

    def test_bad_kind(self):
        with pytest.raises(ParameterError):
            stats.TestReport('demo', 10, 1, 'x', 0.5, 0.1, True, kind='bayes')

    def test_report_only(self):
        outcome = stats.report_only('spread', 3.0, note='x')
        assert outcome.passed is True and np.isnan(outcome.threshold)

    def test_save_load(self):
        reports = [
            stats.TestReport('demo', 10, 1, 'ks', 0.5, 0.001, True, details={'D': 0.1}),
            stats.TestReport('demo', 10, 1, 'gap', 0.3, 0.2, False, kind='distance', wall_time=1.5),
        ]
        filepath = os.path.join(tempfile.mkdtemp(), 'reports.json')
        stats.save_reports(reports, filepath)
        loaded = stats.load_reports(filepath)
        assert len(loaded) == 2
        assert loaded[0].details == {'D': 0.1}
        assert 'wall_time' not in reports[0].data()
        assert loaded[1].wall_time == 1.5
        assert loaded[1].passed is False

    def test_bonferroni(self):
        reports = [
            stats.TestReport('demo', 10, 1, 'a', 0.0005, 0.001, True),
            stats.TestReport('demo', 10, 1, 'b', 0.5, 0.001, True),
            stats.TestReport('demo', 10, 1, 'c', 0.3, 0.2, False, kind='distance'),
        ]
        stats.bonferroni(reports, alpha=0.001)
        assert reports[0].details['bonferroni_level'] == pytest.approx(0.0005)
        assert reports[0].details['bonferroni_passed'] is False
        assert reports[1].details['bonferroni_passed'] is True
        assert 'bonferroni_level' not in reports[2].details


class _Completed(object):
    def __init__(self, stdout, returncode=0):
        self.stdout = stdout
        self.returncode = returncode


class Test_BuildVersion:
    @pytest.fixture(autouse=True)
    def setup(self):
        stats._BUILD.clear()
        yield
        stats._BUILD.clear()

    def test_untagged_commit(self, monkeypatch):
        monkeypatch.setattr(stats.subprocess, 'run', lambda *args, **kwargs: _Completed('1a2b3c4-dirty\n'))
        assert stats.build_version() == '{}-g1a2b3c4-dirty'.format(__version__)

    def test_tagged(self, monkeypatch):
        monkeypatch.setattr(stats.subprocess, 'run', lambda *args, **kwargs: _Completed('v0.3.0-4-g1a2b3c4'))
        assert stats.build_version() == 'v0.3.0-4-g1a2b3c4'
        report = stats.TestReport('demo', 10, 1, 'x', 0.5, 0.1, True)
        assert report.data()['version'] == 'v0.3.0-4-g1a2b3c4'

    def test_outside_checkout(self, monkeypatch):
        monkeypatch.setattr(stats.subprocess, 'run', lambda *args, **kwargs: _Completed('', returncode=128))
        assert stats.build_version() == __version__

    def test_no_git(self, monkeypatch):
        def missing(*args, **kwargs):
            raise OSError("git not found")

        monkeypatch.setattr(stats.subprocess, 'run', missing)
        assert stats.build_version() == __version__
