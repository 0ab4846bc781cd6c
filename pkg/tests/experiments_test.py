# coding=utf-8
from __future__ import absolute_import, print_function

import numpy as np
from scipy import stats as scipy_stats

import cmlab.experiments as experiments
from cmlab import stats
from cmlab.config import reset_config
from cmlab.distributions import RngStream
from cmlab.error import RegistryError, ParameterError, SetupError
from cmlab import logger

import pytest

# Debug logging
logger.init_logger()
# logger.init_file_logger()


def _failing(ctx):
    ctx.add(stats.distance_outcome('always off', 1.0, 0.5), 1)


class Test_Registry:
    @pytest.fixture(autouse=True)
    def setup(self):
        experiments.reset_experiments()
        reset_config()

    def test_builtins(self):
        names = experiments.get_experiments()
        assert len(names) == 27
        assert 'chi5_marginal' in names and 'generator_check' in names

    def test_add_remove(self):
        result = experiments.add_experiment('always_fails', _failing, 'never holds', n=1)
        assert isinstance(result, experiments.Experiment)
        assert experiments.has_experiment('always_fails') is True
        assert experiments.remove_experiment('always_fails') is True
        assert experiments.remove_experiment('always_fails') is False

    def test_reset(self):
        experiments.remove_experiment('chi5_marginal')
        assert experiments.reset_experiments() is True
        assert experiments.has_experiment('chi5_marginal') is True

    def test_unknown(self):
        with pytest.raises(RegistryError) as exception:
            experiments.get_experiment('nosuch')
        assert 'chi5_marginal' in str(exception.value)

    def test_spec(self):
        spec = experiments.ExperimentSpec('chi5_marginal', {'n': 10}, seed=3)
        assert spec.resolved_params() == {'n': 10, 't': 1.0}
        copy = experiments.ExperimentSpec.from_data(spec.data())
        assert copy.params == {'n': 10} and copy.seed == 3
        with pytest.raises(RegistryError):
            experiments.ExperimentSpec('chi5_marginal', {'bins': 3})

    def test_spec_seed_from_environment(self, monkeypatch):
        monkeypatch.setenv('CMLAB_SEED', '77')
        assert experiments.ExperimentSpec('f5_quadrature').seed == 77


class Test_Replicate:
    def test_workers_do_not_matter(self):
        serial = experiments.replicate(experiments._straddle_block, 50, RngStream(5), workers=1, chunk=20)
        pooled = experiments.replicate(experiments._straddle_block, 50, RngStream(5), workers=2, chunk=20)
        assert serial.a.shape == (50,)
        np.testing.assert_array_equal(serial.a, pooled.a)
        np.testing.assert_array_equal(serial.y, pooled.y)

    def test_blocks_repeat(self):
        first = experiments.replicate(experiments._zenith_block, 30, RngStream(6), chunk=10, args=(2.0, 1.0))
        again = experiments.replicate(experiments._zenith_block, 30, RngStream(6), chunk=10, args=(2.0, 1.0))
        np.testing.assert_array_equal(first[0], again[0])

    def test_bad_size(self):
        with pytest.raises(ParameterError):
            experiments.replicate(experiments._straddle_block, 0, RngStream(5))


class Test_Run:
    @pytest.fixture(autouse=True)
    def setup(self):
        experiments.reset_experiments()
        reset_config()

    def test_chi5(self):
        samples = dict()
        spec = experiments.ExperimentSpec('chi5_marginal', {'n': 3000}, seed=1)
        reports = experiments.run(spec, timing=True, samples=samples)
        assert len(reports) == 1
        report = reports[0]
        assert report.experiment == 'chi5_marginal'
        assert report.kind == 'p_value'
        assert report.params == {'n': 3000, 't': 1.0}
        assert report.wall_time >= 0
        assert 'bonferroni_level' in report.details
        columns, values = samples['two_k_minus_b']
        assert columns == ['value'] and values.shape == (3000, 1)

    def test_same_seed_same_reports(self):
        spec = experiments.ExperimentSpec('chi5_marginal', {'n': 5000}, seed=2)
        serial = experiments.run(spec, workers=1)
        pooled = experiments.run(spec, workers=2)
        assert serial[0].p_value_or_distance == pooled[0].p_value_or_distance

    def test_failing_experiment(self):
        experiments.add_experiment('always_fails', _failing, 'never holds')
        reports = experiments.run(experiments.ExperimentSpec('always_fails', seed=1))
        assert reports[0].passed is False

    def test_size_biased(self):
        spec = experiments.ExperimentSpec('size_biased_ig', {'n': 5000}, seed=3)
        reports = experiments.run(spec)
        assert [r.kind for r in reports] == ['distance', 'p_value', 'p_value']
        assert reports[0].passed

    def test_tau_counts(self):
        reports = experiments.run(experiments.ExperimentSpec('tau_counts', {'n': 1000}, seed=4))
        assert len(reports) >= 1
        assert all(r.n > 0 for r in reports)

    @pytest.mark.slow
    def test_f5_quadrature(self):
        reports = experiments.run(experiments.ExperimentSpec('f5_quadrature', seed=5))
        assert reports[0].passed


class Test_Suites:
    def test_generator_arguments(self):
        with pytest.raises(ParameterError):
            experiments.generator_check(2.0, 0.1, 'gauss', 100)
        with pytest.raises(ParameterError):
            experiments.generator_check(-1.0, 1e-3, 'gauss', 100)
        with pytest.raises(ParameterError):
            experiments.generator_check(2.0, 1e-3, 'box', 100)

    def test_generator_band_too_narrow(self):
        with pytest.raises(SetupError):
            experiments.generator_check(2.0, 1e-3, 'gauss', 200, seed=1, band=1e-4)

    def test_conjecture_times(self):
        with pytest.raises(ParameterError):
            experiments.conjecture_suite([1.0, 0.5], 10)

    def test_conjecture_small(self):
        reports = experiments.conjecture_suite([0.5, 1.0], 300, seed=6)
        assert len(reports) == 5
        assert [r.kind for r in reports].count('report_only') == 1


class Test_Sizes:
    @pytest.fixture(autouse=True)
    def setup(self):
        experiments.reset_experiments()
        reset_config()

    def test_registered_sizes(self):
        for name in ('meander_rn_tilde', 'meander_rn_hat'):
            assert experiments.get_experiment(name).defaults['n'] >= 200000
        grid = experiments.get_experiment('grid_poisson_crosscheck').defaults
        assert grid['horizon'] * grid['steps_per_unit'] == 2 ** 20
        for name in ('generator_check', 'conditional_moments'):
            defaults = experiments.get_experiment(name).defaults
            assert defaults['n'] is None
            assert defaults['accepted'] >= 100000

    def test_band_draws(self):
        mass = scipy_stats.chi.cdf(2.0 + 0.02, 5) - scipy_stats.chi.cdf(2.0 - 0.02, 5)
        n = experiments.band_draws(2.0, 0.02, 100000)
        assert n * mass >= 100000
        assert (n - 1) * mass < 100000
        assert n > 400000
        with pytest.raises(SetupError):
            experiments.band_draws(-1.0, 0.1, 100)

    def test_moments_sized_by_acceptance(self):
        spec = experiments.ExperimentSpec('conditional_moments', {'accepted': 300, 'bands': [0.3]}, seed=7)
        reports = experiments.run(spec)
        assert len(reports) == 2
        assert all(r.n >= 100 for r in reports)
        assert reports[0].params['n'] is None

    def test_generator_sized_by_acceptance(self):
        params = {'accepted': 300, 'band': 0.3, 'bumps': ['gauss']}
        reports = experiments.run(experiments.ExperimentSpec('generator_check', params, seed=8))
        assert len(reports) == 3
        assert all(r.n >= 100 for r in reports)

    def test_explicit_draws(self):
        spec = experiments.ExperimentSpec('conditional_moments', {'n': 2000, 'bands': [0.3]}, seed=9)
        reports = experiments.run(spec)
        assert all(r.n < 2000 for r in reports)
