# coding=utf-8
from __future__ import absolute_import, print_function

import numpy as np

from cmlab.serialize import Serializable
from cmlab.distributions import as_generator, sample_williams
from cmlab.error import ParameterError, InputError


class GridPath(Serializable):
    """Continuous path sampled on the uniform grid t0, t0 + dt, ..., t0 + n dt.

    Args:
        ``t0`` (float): First grid time.

        ``dt`` (float): Grid step > 0.

        ``values`` (array): n + 1 finite values, n >= 1.

        ``drift_tag`` (float, optional): Drift the path was sampled with, for
        documentation only. Defaults to None.
    """

    def __init__(self, t0, dt, values, drift_tag=None):
        super(GridPath, self).__init__()
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise InputError("A grid path needs at least 2 values, got shape {}".format(values.shape))
        if not dt > 0:
            raise ParameterError("Grid step must be positive, got {}".format(dt))
        if not np.all(np.isfinite(values)):
            raise InputError("Grid path values must be finite")
        self.t0 = float(t0)
        self.dt = float(dt)
        self.values = values
        self.drift_tag = drift_tag

    @property
    def n(self):
        return len(self.values) - 1

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self.values))

    @property
    def horizon(self):
        return self.t0 + self.dt * self.n

    def value_at(self, t):
        """Linear interpolation between grid values."""
        return np.interp(t, self.times, np.asarray(self.values, dtype=float))

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return "GridPath(t0={}, dt={}, n={})".format(self.t0, self.dt, self.n)


def _check_grid(n, T):
    if int(n) != n or n < 1:
        raise ParameterError("Number of steps must be an integer >= 1, got {}".format(n))
    if not T > 0:
        raise ParameterError("Horizon must be positive, got {}".format(T))


def _walk(g, n, dt, dim=None):
    shape = (n,) if dim is None else (n, dim)
    steps = g.standard_normal(shape) * np.sqrt(dt)
    walk = np.cumsum(steps, axis=0)
    return np.concatenate([np.zeros((1,) + shape[1:]), walk], axis=0)


def _pinned(g, n, T, start, end):
    """Brownian bridge vectors from start to end on the grid, shape (n + 1, d)."""
    start = np.atleast_1d(np.asarray(start, dtype=float))
    end = np.atleast_1d(np.asarray(end, dtype=float))
    walk = _walk(g, n, T / n, start.size)
    frac = (np.arange(n + 1) / float(n))[:, None]
    bridge = start + walk - frac * walk[-1] + frac * (end - start)
    bridge[0] = start
    bridge[-1] = end
    return bridge


def sample_bm(n, T, mu, rng):
    """Brownian motion B(t) + mu t on n steps over [0, T].

    Args:
        n (int): Steps >= 1.
        T (float): Horizon > 0.
        mu (float): Drift.
        rng (RngStream): Random stream.

    Returns:
        GridPath
    """
    _check_grid(n, T)
    g = as_generator(rng)
    dt = T / float(n)
    values = _walk(g, n, dt) + mu * dt * np.arange(n + 1)
    return GridPath(0.0, dt, values, drift_tag=mu)


def sample_bridge(n, T, x, y, rng):
    """Brownian bridge from (0, x) to (T, y) by the pinned construction.

    Returns:
        GridPath: Endpoints equal x and y exactly.
    """
    _check_grid(n, T)
    values = _pinned(as_generator(rng), n, T, [x], [y])[:, 0]
    return GridPath(0.0, T / float(n), values)


def sample_excursion(n, rng):
    """Standard Brownian excursion on [0, 1], the norm of three independent
    standard Brownian bridges.

    Args:
        n (int): Steps >= 2.
        rng (RngStream): Random stream.

    Returns:
        GridPath
    """
    if int(n) != n or n < 2:
        raise ParameterError("An excursion needs at least 2 steps, got {}".format(n))
    vectors = _pinned(as_generator(rng), n, 1.0, np.zeros(3), np.zeros(3))
    return GridPath(0.0, 1.0 / n, np.linalg.norm(vectors, axis=1))


def sample_bessel(dim, r0, mu, n, T, rng):
    """Radial part of a dim-dimensional Brownian motion started at radius r0 with
    drift of magnitude mu along the first axis.

    Args:
        dim (int): 3 or 5.
        r0 (float): Starting radius >= 0.
        mu (float): Drift >= 0; must be 0 when dim is 5.
        n (int): Steps.
        T (float): Horizon.
        rng (RngStream): Random stream.

    Raises:
        ParameterError: Unsupported (dim, mu) combination or negative r0.

    Returns:
        GridPath
    """
    if dim not in (3, 5):
        raise ParameterError("Bessel dimension must be 3 or 5, got {}".format(dim))
    if dim == 5 and mu != 0:
        raise ParameterError("Five-dimensional Bessel paths are only supported without drift")
    if r0 < 0 or mu < 0:
        raise ParameterError("Bessel start and drift must be non negative, got r0={}, mu={}".format(r0, mu))
    _check_grid(n, T)
    dt = T / float(n)
    vectors = _walk(as_generator(rng), n, dt, dim)
    vectors[:, 0] += r0 + mu * dt * np.arange(n + 1)
    values = np.linalg.norm(vectors, axis=1)
    values[0] = r0
    return GridPath(0.0, dt, values, drift_tag=mu)


def _von_mises_fisher(g, kappa):
    """Unit vector on the sphere with density proportional to exp(kappa x_1)."""
    if kappa <= 0:
        cosine = 2.0 * g.random() - 1.0
    else:
        u = g.random()
        cosine = 1.0 + np.log(u + (1.0 - u) * np.exp(-2.0 * kappa)) / kappa
    cosine = min(max(cosine, -1.0), 1.0)
    angle = 2.0 * np.pi * g.random()
    sine = np.sqrt(1.0 - cosine * cosine)
    return np.array([cosine, sine * np.cos(angle), sine * np.sin(angle)])


def sample_bessel_bridge(a, x, y, n, rng):
    """Three-dimensional Bessel bridge from x to y over [0, a].

    The radial endpoint is pinned by drawing the endpoint direction of the
    underlying 3-dimensional Brownian bridge from its conditional law given the
    radius, a von Mises-Fisher law with concentration x y / a.

    Raises:
        ParameterError: Negative endpoints or a <= 0.

    Returns:
        GridPath
    """
    if x < 0 or y < 0:
        raise ParameterError("Bessel bridge endpoints must be non negative, got {}, {}".format(x, y))
    _check_grid(n, a)
    g = as_generator(rng)
    direction = _von_mises_fisher(g, x * y / float(a)) if x > 0 else np.array([1.0, 0.0, 0.0])
    vectors = _pinned(g, n, a, [x, 0.0, 0.0], y * direction)
    values = np.linalg.norm(vectors, axis=1)
    values[0] = x
    values[-1] = y
    return GridPath(0.0, a / float(n), values)


def sample_fp_bridge(T, y, n, rng):
    """Brownian path from 0 first hitting level y at time T, as y minus a
    three-dimensional Bessel bridge from y to 0.

    Returns:
        GridPath: value(T) = y exactly and interior values below y.
    """
    if not y > 0:
        raise ParameterError("First passage level must be positive, got {}".format(y))
    bridge = sample_bessel_bridge(T, y, 0.0, n, rng)
    values = y - bridge.values
    values[0] = 0.0
    values[-1] = y
    return GridPath(0.0, bridge.dt, values)


def sample_williams_path(mu, n_pre, n_post, rng):
    """Brownian path whose rightmost maximizer of B(t) - mu t is the grid point
    n_pre. The maximizer and the value there are drawn exactly, the pre-maximum
    piece is mu t plus a first passage bridge and the post-maximum piece is
    mu t minus a BES(3, mu) path, on a common grid step.

    Args:
        mu (float): Slope > 0.
        n_pre (int): Steps before the maximizer.
        n_post (int): Steps after it.
        rng (RngStream): Random stream.

    Returns:
        GridPath
    """
    g = as_generator(rng)
    sigma, peak = sample_williams(mu, g)
    dt = sigma / float(n_pre)
    before = sample_fp_bridge(sigma, peak - mu * sigma, n_pre, g)
    pre = before.values + mu * dt * np.arange(n_pre + 1)
    after = sample_bessel(3, 0.0, mu, n_post, n_post * dt, g)
    post = peak + mu * dt * np.arange(1, n_post + 1) - after.values[1:]
    pre[-1] = peak
    return GridPath(0.0, dt, np.concatenate([pre, post]), drift_tag=0.0)


# ------------------------------------------------------------------------------
# Exact marginals at given times
# ------------------------------------------------------------------------------
def bridge_norm_at(fractions, rng, start=None, end=None, dim=3):
    """Norm of a dim-dimensional Brownian bridge on [0, 1] read at sorted fractions
    in (0, 1). Rows of fractions are independent bridges.

    Args:
        fractions (array): Shape (m,) or (rows, m), increasing along the last axis.
        rng (RngStream): Random stream.
        start (array, optional): Start vectors, shape (rows, dim). Defaults to 0.
        end (array, optional): End vectors, shape (rows, dim). Defaults to 0.
        dim (int, optional): Dimension. Defaults to 3.

    Returns:
        numpy.ndarray: Same shape as fractions.
    """
    g = as_generator(rng)
    fractions = np.asarray(fractions, dtype=float)
    single = fractions.ndim == 1
    frac = np.atleast_2d(fractions)
    rows, m = frac.shape
    grid = np.concatenate([np.zeros((rows, 1)), frac, np.ones((rows, 1))], axis=1)
    steps = np.sqrt(np.diff(grid, axis=1))[:, :, None] * g.standard_normal((rows, m + 1, dim))
    walk = np.cumsum(steps, axis=1)
    bridge = walk[:, :m, :] - frac[:, :, None] * walk[:, m:, :]
    if start is not None:
        bridge = bridge + (1.0 - frac[:, :, None]) * np.asarray(start, dtype=float).reshape(rows, 1, dim)
    if end is not None:
        bridge = bridge + frac[:, :, None] * np.asarray(end, dtype=float).reshape(rows, 1, dim)
    values = np.linalg.norm(bridge, axis=2)
    if single:
        return values[0]
    return values


def sample_excursion_at(fractions, rng):
    """Standard excursion read at sorted fractions of [0, 1], exactly. Fractions equal
    to 0 or 1 give 0."""
    fractions = np.asarray(fractions, dtype=float)
    inner = (fractions > 0) & (fractions < 1)
    out = np.zeros(fractions.shape)
    if np.any(inner):
        out[inner] = bridge_norm_at(fractions[inner], rng)
    return out


def sample_bessel_at(dim, times, rng, size):
    """BES(dim) from 0 read at sorted positive times, size independent rows."""
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ParameterError("Times must be positive and increasing, got {}".format(times))
    g = as_generator(rng)
    steps = np.sqrt(np.diff(np.concatenate([[0.0], times])))[None, :, None] * g.standard_normal(
        (size, len(times), dim)
    )
    return np.linalg.norm(np.cumsum(steps, axis=1), axis=2)
