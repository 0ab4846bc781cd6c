# coding=utf-8
from __future__ import absolute_import, print_function

import numpy as np

import cmlab.geometry as geometry
from cmlab.paths import GridPath, sample_bm, sample_williams_path
from cmlab.distributions import RngStream
from cmlab.error import InputError, RangeError, ParameterError
from cmlab import logger

import pytest

# Debug logging
logger.init_logger()
# logger.init_file_logger()


def brute_majorant(times, values):
    """Largest chord value over every pair of points around each point."""
    n = len(times)
    out = values.copy()
    for i in range(n):
        for j in range(i + 1):
            for k in range(i, n):
                if k == j:
                    continue
                chord = values[j] + (values[k] - values[j]) * (times[i] - times[j]) / (times[k] - times[j])
                out[i] = max(out[i], chord)
    return out


class Test_Hull:
    @pytest.mark.parametrize('size', [2, 3, 5, 8, 12])
    def test_against_brute_force(self, size):
        g = np.random.default_rng(size)
        for _ in range(20):
            times = np.cumsum(g.random(size) + 0.1)
            values = g.standard_normal(size)
            skeleton = geometry.concave_majorant((times, values))
            np.testing.assert_allclose(skeleton.value_at(times), brute_majorant(times, values), atol=1e-12)
            assert skeleton.is_valid()
            assert skeleton.times[0] == times[0] and skeleton.times[-1] == times[-1]

    def test_vertices(self):
        skeleton = geometry.concave_majorant(GridPath(0.0, 1.0, [0.0, 2.0, 1.0, 3.0]))
        assert skeleton.vertices == [(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]
        np.testing.assert_allclose(skeleton.slopes, [2.0, 0.5])

    def test_collinear_dropped(self):
        skeleton = geometry.concave_majorant((np.arange(4.0), np.arange(4.0)))
        assert len(skeleton) == 2

    def test_minorant(self):
        skeleton = geometry.convex_minorant(GridPath(0.0, 1.0, [0.0, -2.0, -1.0, -3.0]))
        assert skeleton.vertices == [(0.0, 0.0), (1.0, -2.0), (3.0, -3.0)]
        assert skeleton.kind == 'convex'
        assert skeleton.is_valid()

    def test_too_short(self):
        with pytest.raises(InputError):
            geometry.concave_majorant((np.array([0.0]), np.array([1.0])))

    def test_skeleton_validation(self):
        with pytest.raises(InputError):
            geometry.MajorantSkeleton([0.0, 0.0], [1.0, 2.0])
        with pytest.raises(ParameterError):
            geometry.MajorantSkeleton([0.0, 1.0], [1.0, 2.0], kind='flat')

    def test_path_below_majorant(self):
        path = sample_bm(2000, 1.0, 0.0, RngStream(1))
        skeleton = geometry.concave_majorant(path)
        assert np.all(skeleton.value_at(path.times) >= path.values - 1e-12)


class Test_Straddle:
    def test_straddle(self):
        path = GridPath(0.0, 1.0, [0.0, 2.0, 1.0, 3.0])
        info = geometry.straddle(geometry.concave_majorant(path), 2.0)
        assert (info.g, info.d) == (1.0, 3.0)
        assert info.slope == pytest.approx(0.5)
        assert info.value == pytest.approx(2.5)
        assert info.intercept == pytest.approx(1.5)
        assert info.gap == pytest.approx(1.5)

    def test_no_source(self):
        skeleton = geometry.concave_majorant((np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 1.0])))
        assert np.isnan(geometry.straddle(skeleton, 0.5).gap)

    def test_vertex_takes_right_face(self):
        skeleton = geometry.concave_majorant(GridPath(0.0, 1.0, [0.0, 2.0, 1.0, 3.0]))
        assert geometry.straddle(skeleton, 1.0).g == 1.0

    def test_outside(self):
        skeleton = geometry.concave_majorant(GridPath(0.0, 1.0, [0.0, 2.0, 1.0, 3.0]))
        with pytest.raises(RangeError):
            geometry.straddle(skeleton, 3.0)
        with pytest.raises(RangeError):
            skeleton.slope_at(-0.5)


class Test_Sigma:
    def test_tent(self):
        path = GridPath(0.0, 0.5, [0.0, 0.5, 1.0, 0.5, 0.0])
        result = geometry.sigma_mu(path, 0.5)
        assert result.time == 1.0
        assert result.index == 2
        assert result.value == 1.0
        assert result.horizon_warning is False

    def test_rightmost(self):
        path = GridPath(0.0, 1.0, [0.0, 1.0, 2.0, 2.5])
        assert geometry.sigma_mu(path, 1.0).index == 2

    def test_horizon_warning(self):
        path = GridPath(0.0, 1.0, [0.0, 2.0, 4.0])
        assert geometry.sigma_mu(path, 1.0).horizon_warning is True

    def test_bad_mu(self):
        with pytest.raises(ParameterError):
            geometry.sigma_mu(GridPath(0.0, 1.0, [0.0, 1.0]), 0.0)


class Test_Meanders:
    def test_minslope(self):
        square = GridPath(0.0, 0.25, np.linspace(0.0, 1.0, 5) ** 2)
        assert geometry.minslope(square) == (0.25, 0.25)
        line = GridPath(0.0, 0.25, np.linspace(0.0, 1.0, 5))
        value, time = geometry.minslope(line)
        assert value == pytest.approx(1.0)
        assert time == 1.0
        with pytest.raises(InputError):
            geometry.minslope(GridPath(0.0, 0.5, [0.0, -1.0, 1.0]))

    def test_minslope_domain(self):
        with pytest.raises(InputError):
            geometry.minslope(GridPath(0.0, 0.5, [0.1, 0.5, 1.0]))
        with pytest.raises(InputError):
            geometry.minslope(GridPath(0.5, 0.25, [0.0, 0.5, 1.0]))
        with pytest.raises(InputError):
            geometry.minslope(GridPath(0.0, 0.25, [0.0, 0.5, 1.0]))

    def test_meander_identities(self):
        path = sample_williams_path(1.0, 400, 400, RngStream(2))
        result = geometry.meanders(path, 1.0, points=257)
        assert len(result.tilde) == 257
        assert result.sigma == pytest.approx(geometry.sigma_mu(path, 1.0).time)
        assert np.all(result.tilde.values >= -1e-9)
        assert result.hat.values[0] == 0.0
        np.testing.assert_allclose(
            result.hat.values - result.tilde.values, np.sqrt(result.sigma) * np.linspace(0.0, 1.0, 257)
        )
        slope, _ = geometry.minslope(result.hat)
        assert slope >= np.sqrt(result.sigma) - 1e-9

    def test_quadratic_variation(self):
        path = sample_bm(10000, 1.0, 0.0, RngStream(3))
        assert geometry.quadratic_variation(path) == pytest.approx(1.0, abs=0.06)
