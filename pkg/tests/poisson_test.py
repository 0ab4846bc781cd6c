# coding=utf-8
from __future__ import absolute_import, print_function

import numpy as np
from scipy import integrate

import cmlab.poisson as poisson
from cmlab.distributions import RngStream, chi_cdf
from cmlab.stats import ks_test
from cmlab.error import ParameterError, InputError, RangeError, ConstructionError
from cmlab import logger

import pytest

# Debug logging
logger.init_logger()
# logger.init_file_logger()


class Test_TauJumps:
    def test_window(self):
        jumps = poisson.sample_tau_window(0.5, 8.0, RngStream(1))
        assert np.all((jumps.r > 0.5) & (jumps.r < 8.0))
        assert np.all(np.diff(jumps.r) >= 0)
        assert np.all(jumps.dtau > 0)
        assert jumps.count_in(0.0, 100.0) == len(jumps)

    def test_bad_window(self):
        with pytest.raises(ParameterError):
            poisson.sample_tau_window(2.0, 1.0, RngStream(1))
        with pytest.raises(ParameterError):
            poisson.sample_tau_window(0.0, 1.0, RngStream(1))

    def test_validation(self):
        with pytest.raises(InputError):
            poisson.TauJumps([1.0, 5.0], [1.0, 1.0], (0.5, 4.0))
        with pytest.raises(InputError):
            poisson.TauJumps([1.0, 2.0], [1.0, 0.0], (0.5, 4.0))

    def test_counts(self):
        counts = [len(poisson.sample_tau_window(1.0, np.e, RngStream(2, i))) for i in range(4000)]
        assert np.mean(counts) == pytest.approx(1.0, abs=0.06)

    def test_assemble(self):
        skeleton = poisson.assemble_K(poisson.TauJumps([1.0, 2.0], [1.0, 2.0], (0.5, 4.0)))
        assert skeleton.vertices == [(0.0, 0.0), (1.0, 1.0), (3.0, 2.0)]
        shifted = poisson.assemble_K(poisson.TauJumps([1.0], [1.0], (0.5, 4.0)), origin=(2.0, 1.0))
        assert shifted.vertices == [(2.0, 1.0), (3.0, 2.0)]

    def test_assemble_empty(self):
        with pytest.raises(ConstructionError):
            poisson.assemble_K(poisson.TauJumps([], [], (1.0, 2.0)))


class Test_Excursions:
    @pytest.fixture(autouse=True)
    def setup(self):
        self.skeleton = poisson.assemble_K(poisson.TauJumps([1.0, 2.0], [1.0, 2.0], (0.5, 4.0)))

    def test_vertices_exact(self):
        values = poisson.sample_path_at(self.skeleton, self.skeleton.times, RngStream(3))
        np.testing.assert_allclose(values, self.skeleton.values)

    def test_below_faces(self):
        times = np.linspace(0.0, 3.0, 31)
        values = poisson.sample_path_at(self.skeleton, times, RngStream(4))
        assert np.all(values <= self.skeleton.value_at(times) + 1e-12)

    def test_range(self):
        with pytest.raises(RangeError):
            poisson.sample_path_at(self.skeleton, [0.5, 3.5], RngStream(5))
        with pytest.raises(InputError):
            poisson.sample_path_at(self.skeleton, [2.0, 0.5], RngStream(5))

    def test_attach(self):
        path = poisson.attach_excursions(self.skeleton, 300, RngStream(6))
        assert path.n == 300
        assert path.horizon == pytest.approx(3.0)
        assert path.values[0] == pytest.approx(0.0)


class Test_PoissonMajorant:
    def test_cover(self):
        construction = poisson.PoissonMajorant(RngStream(7))
        construction.cover(0.01, 50.0)
        assert construction.times[0] < 0.01
        assert construction.times[-1] > 50.0
        assert construction.skeleton().is_valid()

    def test_bad_cover(self):
        with pytest.raises(RangeError):
            poisson.PoissonMajorant(RngStream(7)).cover(0.0)

    def test_straddle(self):
        info = poisson.PoissonMajorant(RngStream(8)).straddle(1.0)
        assert info.g <= 1.0 < info.d
        assert info.slope > 0
        assert info.gap > 0
        assert info.intercept == pytest.approx(info.value - info.slope)

    def test_cap(self):
        construction = poisson.PoissonMajorant(RngStream(9), window=(0.25, 4.0), cap_log2=5)
        with pytest.raises(ConstructionError):
            for _ in range(10):
                construction.extend_up()

    def test_path_below(self):
        construction = poisson.PoissonMajorant(RngStream(10))
        times = np.linspace(0.1, 3.0, 30)
        values = construction.sample_path_at(times)
        assert np.all(values <= construction.skeleton().value_at(times) + 1e-12)

    def test_straddles(self):
        batch = poisson.sample_straddles(5000, RngStream(11))
        assert np.all(batch.g <= 1.0) and np.all(batch.d > 1.0)
        assert np.all(batch.a > 0) and np.all(batch.y > 0)
        np.testing.assert_allclose(batch.w, batch.d - 1.0)
        np.testing.assert_allclose(batch.intercept, batch.k - batch.a)
        outcome = ks_test(batch.k + batch.y, cdf=lambda x: chi_cdf(x, 5), alpha=1e-4)
        assert outcome.passed

    def test_straddles_arguments(self):
        with pytest.raises(ParameterError):
            poisson.sample_straddles(0, RngStream(11))
        with pytest.raises(ParameterError):
            poisson.sample_straddles(10, RngStream(11), t=0.0)

    def test_straddle_time_one(self):
        sample = poisson.straddle_time_one(RngStream(12), t=2.0)
        assert sample.g <= 2.0 < sample.d
        assert sample.state.w == pytest.approx(sample.d - 2.0)


class Test_Zenith:
    def test_increments(self):
        ds, dz = poisson.sample_zenith_increments(2.0, 1.0, 20000, RngStream(13))
        atom = ds == 0
        assert np.mean(atom) == pytest.approx(0.5, abs=0.02)
        assert np.all(dz[atom] == 0)
        moved = ~atom
        assert np.all(dz[moved] >= ds[moved] - 1e-12)
        assert np.all(dz[moved] <= 2.0 * ds[moved] + 1e-12)

    def test_single(self):
        ds, dz = poisson.zenith_increment(2.0, 1.0, RngStream(14))
        assert ds >= 0 and dz >= 0

    def test_levels(self):
        with pytest.raises(ParameterError):
            poisson.sample_zenith_increments(1.0, 2.0, 10, RngStream(14))


class Test_Psi:
    def test_stays_on_face(self):
        state = poisson.PsiState(1.0, 2.0, 0.5, 3.0)
        moved = poisson.psi_step(state, 1.0, RngStream(15))
        assert moved.a == 1.0
        assert moved.k == pytest.approx(3.0)
        assert moved.w == pytest.approx(2.0)
        assert moved.y > 0

    def test_new_face(self):
        state = poisson.PsiState(1.0, 2.0, 0.5, 0.5)
        moved = poisson.psi_step(state, 1.0, RngStream(16))
        assert 0 < moved.a < 1.0
        assert moved.w > 0
        assert moved.y > 0

    def test_direct_construction(self):
        state = poisson.PsiState(1.0, 2.0, 0.5, 0.5)
        moved = poisson.psi_step(state, 1.0, RngStream(17), construction='direct', n=200)
        assert moved.a < 1.0
        assert moved.w > 0

    def test_arguments(self):
        state = poisson.PsiState(1.0, 2.0, 0.5, 0.5)
        with pytest.raises(ParameterError):
            poisson.psi_step(state, 0.0, RngStream(18))
        with pytest.raises(ParameterError):
            poisson.psi_step(state, 1.0, RngStream(18), construction='grid')
        with pytest.raises(ParameterError):
            poisson.psi_step(poisson.PsiState(-1.0, 2.0, 0.5, 0.5), 1.0, RngStream(18))

    def test_batch(self):
        moved = poisson.psi_step_batch([1.0, 1.0], [0.0, 0.0], [0.5, 0.5], [3.0, 0.2], 1.0, RngStream(19))
        assert moved.a[0] == 1.0
        assert 0 < moved.a[1] < 1.0
        assert moved.w[0] == pytest.approx(2.0)


class Test_BesselMinorant:
    def test_window(self):
        window = poisson.BesselMinorantWindow(1.0, RngStream(20))
        window.cover(5.0)
        assert window.times[-1] > 5.0
        assert np.all((window.slopes > 0) & (window.slopes < 1.0))
        assert window.skeleton().is_valid()
        info = window.straddle(2.0)
        assert info.g <= 2.0 < info.d

    def test_arguments(self):
        with pytest.raises(ParameterError):
            poisson.BesselMinorantWindow(0.0, RngStream(21))
        with pytest.raises(RangeError):
            poisson.BesselMinorantWindow(1.0, RngStream(21)).cover(-1.0)

    @pytest.mark.parametrize('construction', ['direct', 'poisson'])
    def test_minorant(self, construction):
        result = poisson.bessel_minorant(1.0, 2.0, 200, RngStream(22), construction=construction)
        assert result.construction == construction
        assert result.path.values[0] == 0.0
        assert np.all(result.path.values >= result.skeleton.value_at(result.path.times) - 1e-9)

    def test_unknown_construction(self):
        with pytest.raises(ParameterError):
            poisson.bessel_minorant(1.0, 2.0, 200, RngStream(22), construction='grid')


class Test_DriftFixed:
    def test_atom_probability(self):
        assert 0 < poisson.drift_fixed_atom_probability(1.0, 1.0) < 1
        assert poisson.drift_fixed_atom_probability(1e-8, 1.0) == pytest.approx(1.0, abs=1e-6)
        with pytest.raises(ParameterError):
            poisson.drift_fixed_atom_probability(0.0, 1.0)

    def test_slope_density_mass(self):
        mass, _ = integrate.quad(lambda a: poisson.drift_fixed_slope_density(a, 1.0, 1.0), 0.0, 1.0, limit=200)
        assert mass == pytest.approx(1.0, abs=5e-3)

    def test_outside(self):
        assert poisson.drift_fixed_slope_density(1.5, 1.0, 1.0) == 0.0
        assert poisson.drift_fixed_atom_density(0.5, 0.5, 1.0, 1.0, 1.0) == 0.0
