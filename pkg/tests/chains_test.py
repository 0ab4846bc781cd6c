# coding=utf-8
from __future__ import absolute_import, print_function

import numpy as np

import cmlab.chains as chains
from cmlab.geometry import MajorantSkeleton
from cmlab.poisson import PoissonMajorant
from cmlab.distributions import RngStream
from cmlab.error import ParameterError, CoverageError, InputError
from cmlab import logger

import pytest

# Debug logging
logger.init_logger()
# logger.init_file_logger()


class Test_Recursion:
    def test_step(self):
        tau, rho = chains.tau_rho_step(1.0, 1.0, RngStream(1), u=0.5, z=1.0)
        assert tau == pytest.approx(0.2)
        assert rho == pytest.approx(0.5)

    def test_step_vertex(self):
        below = chains.step_vertex(chains.ChainState(1.0, 2.0, 1.0), RngStream(1), u=0.5, z=1.0)
        assert below.tau == pytest.approx(0.2)
        assert below.kappa == pytest.approx(0.8)
        assert below.rho == pytest.approx(0.5)

    def test_bad_input(self):
        with pytest.raises(ParameterError):
            chains.tau_rho_step(0.0, 1.0, RngStream(1))
        with pytest.raises(ParameterError):
            chains.tau_rho_step(1.0, 1.0, RngStream(1), u=1.5, z=0.0)

    def test_theorem_map(self):
        assert chains.theorem_map(1.0, 1.0, 1.0, 0.5) == pytest.approx((0.5, 1.0, 0.5, 0.5))
        with pytest.raises(ParameterError):
            chains.theorem_map(1.0, 1.0, 1.0, 1.0)

    def test_theorem_map_arrays(self):
        t, r, q, u = chains.sample_map_law(1000, RngStream(2))
        mapped = chains.theorem_map(t, r, q, u)
        assert all(each.shape == (1000,) for each in mapped)
        assert np.all((mapped[3] > 0) & (mapped[3] < 1))


class Test_Chain:
    def test_shapes(self):
        chain = chains.chain_from_recursion(5, RngStream(3), size=100)
        assert chain.tau.shape == (100, 6)
        assert np.all(np.diff(chain.rho, axis=1) < 0)
        assert np.all(np.diff(chain.tau, axis=1) < 0)
        single = chains.chain_from_recursion(5, RngStream(3))
        assert len(single) == 6
        assert single[0].rho == pytest.approx(single[0].kappa - single[0].tau)

    def test_bad_depth(self):
        with pytest.raises(ParameterError):
            chains.chain_from_recursion(-1, RngStream(3))

    def test_innovations(self):
        chain = chains.chain_from_recursion(3, RngStream(4), size=20000)
        u, q = chains.recursion_innovations(chain)
        assert u.shape == (20000, 3)
        assert np.all((u > 0) & (u <= 1))
        assert np.mean(u) == pytest.approx(0.5, abs=0.01)
        assert np.mean(q) == pytest.approx(1.0, abs=0.03)

    def test_stick_breaking(self):
        slopes = chains.stick_breaking_slopes(6, RngStream(5))
        assert slopes.shape == (6,)
        assert np.all(slopes > 1) and np.all(np.diff(slopes) > 0)

    def test_kappa_diagnostic(self):
        chain = chains.chain_from_recursion(4, RngStream(6), size=2000)
        result = chains.kappa_markov_diagnostic(chain)
        assert sum(sum(row) for row in result['counts']) == 2000
        assert result['max_spread'] >= 0
        with pytest.raises(InputError):
            chains.kappa_markov_diagnostic(chain, step=4)


class Test_Extract:
    @pytest.fixture(autouse=True)
    def setup(self):
        # slopes 4, 3, 2, 0.5
        self.skeleton = MajorantSkeleton([0.0, 1.0, 2.0, 3.0, 4.0], [0.0, 4.0, 7.0, 9.0, 9.5])

    def test_from_skeleton(self):
        chain = chains.extract_chain(self.skeleton, depth=2, mu=1.0)
        assert [tuple(state) for state in chain] == [(3.0, 9.0, 6.0), (2.0, 7.0, 3.0), (1.0, 4.0, 1.0)]

    def test_too_deep(self):
        with pytest.raises(CoverageError):
            chains.extract_chain(self.skeleton, depth=3, mu=1.0)

    def test_beyond_span(self):
        with pytest.raises(CoverageError):
            chains.extract_chain(self.skeleton, depth=1, mu=0.1)

    def test_from_construction(self):
        chain = chains.extract_chain(PoissonMajorant(RngStream(7)), depth=4)
        assert len(chain) == 5
        assert all(later.rho < earlier.rho for earlier, later in zip(chain, chain[1:]))
        assert all(later.tau < earlier.tau for earlier, later in zip(chain, chain[1:]))

    def test_slope_above_window(self):
        # mu = 8 puts sigma_mu below the first vertex of the default window
        for stream_id in range(6):
            chain = chains.extract_chain(PoissonMajorant(RngStream(5, stream_id)), depth=4, mu=8.0)
            assert len(chain) == 5
            assert chain[0].rho == pytest.approx(chain[0].kappa - 8.0 * chain[0].tau)
            assert all(later.tau < earlier.tau for earlier, later in zip(chain, chain[1:]))
            slopes = [(a.kappa - b.kappa) / (a.tau - b.tau) for a, b in zip(chain, chain[1:])]
            assert all(slope > 8.0 for slope in slopes)

    def test_short_chain(self):
        with pytest.raises(InputError):
            chains.recursion_innovations([chains.ChainState(1.0, 1.0, 1.0)])
