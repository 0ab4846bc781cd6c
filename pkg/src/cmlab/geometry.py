# coding=utf-8
from __future__ import absolute_import, print_function

from collections import namedtuple

import numpy as np
from numba import njit

from cmlab.paths import GridPath
from cmlab.logger import logger
from cmlab.error import InputError, RangeError, ParameterError

StraddleInfo = namedtuple('StraddleInfo', ['g', 'd', 'slope', 'value', 'intercept', 'gap'])
SigmaResult = namedtuple('SigmaResult', ['time', 'index', 'value', 'horizon_warning'])
Meanders = namedtuple('Meanders', ['tilde', 'hat', 'sigma', 'horizon_warning'])

_REL_EPS = 1e-12


@njit(cache=True)
def _upper_hull(times, values, rel_eps):
    """Indices of the upper convex hull of (times, values), times increasing.
    Middle points on or below the chord of their neighbours are dropped."""
    n = times.shape[0]
    hull = np.empty(n, dtype=np.int64)
    size = 0
    for i in range(n):
        while size >= 2:
            o = hull[size - 2]
            a = hull[size - 1]
            left = (times[a] - times[o]) * (values[i] - values[o])
            right = (times[i] - times[o]) * (values[a] - values[o])
            # left >= right: point a does not stick out above the chord o -> i
            if left - right >= -rel_eps * (abs(left) + abs(right)):
                size -= 1
            else:
                break
        hull[size] = i
        size += 1
    return hull[:size].copy()


class MajorantSkeleton(object):
    """Piecewise linear concave majorant (or convex minorant) given by its vertices.

    Args:
        ``times`` (array): Increasing vertex times, at least 2.

        ``values`` (array): Vertex values.

        ``kind`` (str, optional): 'concave' or 'convex'. Defaults to 'concave'.

        ``source`` (GridPath, optional): Path the skeleton was computed from, used
        to report gaps. Defaults to None.
    """

    def __init__(self, times, values, kind='concave', source=None):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.size < 2 or self.times.shape != self.values.shape:
            raise InputError("A skeleton needs at least 2 vertices with matching values")
        if np.any(np.diff(self.times) <= 0):
            raise InputError("Skeleton vertex times must be strictly increasing")
        if kind not in ('concave', 'convex'):
            raise ParameterError("Skeleton kind must be 'concave' or 'convex', got {}".format(kind))
        self.kind = kind
        self.source = source

    @property
    def slopes(self):
        return np.diff(self.values) / np.diff(self.times)

    @property
    def durations(self):
        return np.diff(self.times)

    @property
    def span(self):
        return float(self.times[0]), float(self.times[-1])

    @property
    def vertices(self):
        return list(zip(self.times.tolist(), self.values.tolist()))

    def face_index(self, t):
        """Index i of the face [times[i], times[i+1]) holding t.

        Raises:
            RangeError: t outside [first vertex, last vertex).
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t >= self.times[-1]):
            raise RangeError("Time {} outside skeleton span {}".format(t, self.span))
        return np.searchsorted(self.times, t, side='right') - 1

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.times, self.values)

    def slope_at(self, t):
        """Right-hand derivative."""
        return self.slopes[self.face_index(t)]

    def is_valid(self, tol=_REL_EPS):
        """True if slopes are strictly monotone in the direction kind asks for."""
        change = np.diff(self.slopes)
        scale = np.abs(self.slopes[1:]) + np.abs(self.slopes[:-1]) + 1.0
        if self.kind == 'concave':
            return bool(np.all(change < tol * scale))
        return bool(np.all(change > -tol * scale))

    def __len__(self):
        return len(self.times)

    def __repr__(self):
        return "MajorantSkeleton(kind={}, vertices={}, span={})".format(self.kind, len(self), self.span)


def _path_arrays(path):
    if isinstance(path, GridPath):
        return path.times, np.asarray(path.values, dtype=float)
    times, values = path
    return np.asarray(times, dtype=float), np.asarray(values, dtype=float)


def concave_majorant(path):
    """Least concave majorant of a grid path by a monotone chain scan.

    Args:
        path (GridPath or tuple): GridPath, or (times, values) with increasing times.

    Raises:
        InputError: Fewer than 2 points.

    Returns:
        MajorantSkeleton
    """
    times, values = _path_arrays(path)
    if times.size < 2:
        raise InputError("Need at least 2 points for a majorant, got {}".format(times.size))
    hull = _upper_hull(times, values, _REL_EPS)
    source = path if isinstance(path, GridPath) else None
    return MajorantSkeleton(times[hull], values[hull], 'concave', source)


def convex_minorant(path):
    """Greatest convex minorant, the negated majorant of the negated path."""
    times, values = _path_arrays(path)
    if times.size < 2:
        raise InputError("Need at least 2 points for a minorant, got {}".format(times.size))
    hull = _upper_hull(times, -values, _REL_EPS)
    source = path if isinstance(path, GridPath) else None
    return MajorantSkeleton(times[hull], values[hull], 'convex', source)


def straddle(skeleton, t):
    """Face of the skeleton straddling t. At a vertex the face to the right is used.

    Args:
        skeleton (MajorantSkeleton): Majorant.
        t (float): Time inside the span.

    Raises:
        RangeError: t outside the span.

    Returns:
        StraddleInfo: (g, d, slope, value, intercept, gap); gap is nan when the
        skeleton has no source path.
    """
    i = int(skeleton.face_index(t))
    g, d = float(skeleton.times[i]), float(skeleton.times[i + 1])
    slope = (skeleton.values[i + 1] - skeleton.values[i]) / (d - g)
    value = float(skeleton.values[i] + slope * (t - g))
    gap = float('nan')
    if skeleton.source is not None:
        gap = value - float(skeleton.source.value_at(t))
        if skeleton.kind == 'convex':
            gap = -gap
    return StraddleInfo(g, d, float(slope), value, value - t * float(slope), gap)


def _last_attainer(values, best):
    tol = _REL_EPS * max(1.0, abs(best))
    return int(np.nonzero(values >= best - tol)[0][-1])


def sigma_mu(path, mu):
    """Rightmost grid maximizer of B(t) - mu t.

    Args:
        path (GridPath): Path B.
        mu (float): Slope > 0.

    Returns:
        SigmaResult: (time, index, value of B there, horizon_warning). The warning
        is set when the maximizer is the final grid point.
    """
    if not mu > 0:
        raise ParameterError("mu must be positive, got {}".format(mu))
    times = path.times
    values = np.asarray(path.values, dtype=float)
    drifted = values - mu * times
    index = _last_attainer(drifted, float(np.max(drifted)))
    warning = index == len(values) - 1
    if warning:
        logger.warning("Drifted maximum at the horizon {} for mu={}".format(path.horizon, mu))
    return SigmaResult(float(times[index]), index, float(values[index]), warning)


def minslope(f):
    """Minslope of a nonnegative function through the origin on [0, 1].

    Args:
        f (GridPath): Grid over [0, 1] with f(0) = 0.

    Raises:
        InputError: Negative values, f(0) != 0 or a grid other than [0, 1].

    Returns:
        tuple: (m, b), the minimal ratio f(u)/u over grid u > 0 and the last grid
        time attaining it.
    """
    if f.t0 != 0 or abs(f.horizon - 1.0) > _REL_EPS:
        raise InputError("Minslope needs a grid over [0, 1], got [{}, {}]".format(f.t0, f.horizon))
    values = np.asarray(f.values, dtype=float)
    if values[0] != 0:
        raise InputError("Minslope needs f(0) = 0, got {}".format(values[0]))
    if np.any(values < 0):
        raise InputError("Minslope needs a nonnegative function")
    times = f.times[1:]
    ratios = values[1:] / times
    best = float(np.min(ratios))
    index = int(np.nonzero(ratios <= best + _REL_EPS * max(1.0, abs(best)))[0][-1])
    return best, float(times[index])


def meanders(path, mu, points=1025):
    """The two rescaled reversed pieces of a path before sigma_mu.

    With sigma the rightmost maximizer of B(t) - mu t:
        hat(u) = (B(sigma) - B((1-u) sigma)) / sqrt(sigma)
        tilde(u) = hat(u) - mu sqrt(sigma) u
    resampled on a uniform grid of [0, 1] by linear interpolation.

    Returns:
        Meanders: (tilde, hat, sigma, horizon_warning)
    """
    result = sigma_mu(path, mu)
    sigma = result.time
    if not sigma > 0:
        raise InputError("Drifted maximum at time 0, no meander to read")
    u = np.linspace(0.0, 1.0, points)
    drop = result.value - path.value_at((1.0 - u) * sigma)
    drop[0] = 0.0
    hat = drop / np.sqrt(sigma)
    tilde = hat - mu * np.sqrt(sigma) * u
    step = 1.0 / (points - 1)
    return Meanders(
        GridPath(0.0, step, tilde, drift_tag=mu), GridPath(0.0, step, hat), sigma, result.horizon_warning
    )


def quadratic_variation(path):
    """Sum of squared increments."""
    values = np.asarray(path.values, dtype=float)
    if values.size < 2:
        raise InputError("Need at least 2 points for a quadratic variation")
    return float(np.sum(np.diff(values) ** 2))
