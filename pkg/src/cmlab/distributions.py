# coding=utf-8
from __future__ import absolute_import, print_function

from collections import namedtuple

import numpy as np
from scipy import integrate, special, stats

from cmlab.serialize import Serializable
from cmlab.logger import logger
from cmlab.error import ParameterError, OrderingError

GaussianKernels = namedtuple('GaussianKernels', ['pdf', 'tail', 'mills'])

_SQRT_2PI = np.sqrt(2.0 * np.pi)
_SQRT_HALF_PI = np.sqrt(0.5 * np.pi)


class RngStream(Serializable):
    """Reproducible random substream. A (seed, stream_id) pair always yields the
    same sequence, independently of process or worker count. Substreams of a stream
    are derived through numpy's SeedSequence spawn keys.

    Args:
        ``seed`` (int): Non negative 64-bit seed.

        ``stream_id`` (int, optional): Substream index. Defaults to 0.

        ``key`` (tuple, optional): Extra spawn key levels below stream_id. Defaults to ().
    """
    _transient = ('_generator',)

    def __init__(self, seed, stream_id=0, key=()):
        super(RngStream, self).__init__()
        if int(seed) < 0 or int(stream_id) < 0 or any(int(k) < 0 for k in key):
            raise ParameterError(
                "Seed and stream ids must be non negative, got {}, {}, {}".format(seed, stream_id, key)
            )
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.key = [int(k) for k in key]
        self._generator = None

    @property
    def generator(self):
        """
        Returns:
            numpy.random.Generator: PCG64 generator bound to this stream.
        """
        if self._generator is None:
            sequence = np.random.SeedSequence(
                self.seed, spawn_key=(self.stream_id,) + tuple(self.key)
            )
            self._generator = np.random.Generator(np.random.PCG64(sequence))
        return self._generator

    def substream(self, index):
        """Independent child stream.

        Args:
            index (int): Child index.

        Returns:
            RngStream: Stream with this stream's key extended by index.
        """
        return RngStream(self.seed, self.stream_id, tuple(self.key) + (int(index),))

    def __repr__(self):
        return "RngStream(seed={}, stream_id={}, key={})".format(self.seed, self.stream_id, self.key)


def as_generator(rng):
    """Accept either an RngStream or a numpy Generator.

    Raises:
        ParameterError: Anything else was given.

    Returns:
        numpy.random.Generator
    """
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError("Expected RngStream or numpy Generator, got {}".format(type(rng).__name__))


def _scalar_or_array(value):
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return float(value)
    return value


# ------------------------------------------------------------------------------
# Gaussian kernels
# ------------------------------------------------------------------------------
def phi(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(np.exp(-0.5 * x * x) / _SQRT_2PI)


def tail(x):
    """Gaussian tail probability, computed from erfc without subtracting from 1."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(0.5 * special.erfc(x / np.sqrt(2.0)))


def mills(x):
    """Mills ratio tail(x)/phi(x) through the scaled complementary error function."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(_SQRT_HALF_PI * special.erfcx(x / np.sqrt(2.0)))


def gaussian_kernels(x):
    """Density, tail and Mills ratio of the standard normal law at x.

    Args:
        x (float): Finite real.

    Returns:
        GaussianKernels: (pdf, tail, mills)
    """
    return GaussianKernels(phi(x), tail(x), mills(x))


# ------------------------------------------------------------------------------
# Scalar laws
# ------------------------------------------------------------------------------
def _check_dof(k):
    if int(k) != k or k < 1:
        raise ParameterError("Degrees of freedom must be an integer >= 1, got {}".format(k))


def _check_shape(a, b):
    if not (a > 0 and b > 0):
        raise ParameterError("Beta shapes must be positive, got ({}, {})".format(a, b))


def _normal(g, size):
    return g.standard_normal(size)


def _uniform01(g, size):
    # Open at zero: products and logs of uniforms stay finite.
    return 1.0 - g.random(size)


def _chi(g, size, k):
    _check_dof(k)
    return np.sqrt(g.chisquare(k, size))


def _chi_sq(g, size, k):
    _check_dof(k)
    return g.chisquare(k, size)


def _beta(g, size, a, b):
    _check_shape(a, b)
    return g.beta(a, b, size)


_laws = {
    'normal': (_normal, 0),
    'uniform01': (_uniform01, 0),
    'chi': (_chi, 1),
    'chi_sq': (_chi_sq, 1),
    'beta': (_beta, 2),
}


def has_law(name):
    """Test if a scalar law with given name can be sampled.

    Args:
        name (str): Law name.

    Returns:
        bool: True if sample_scalar() knows the law.
    """
    return name in _laws.keys()


def get_laws():
    """
    Returns:
        list: Sorted names of all scalar laws.
    """
    return sorted(_laws.keys())


def sample_scalar(law, rng, *params, **kwargs):
    """Draw from one of the named scalar laws.

    Args:
        law (str): One of normal, uniform01, chi, chi_sq, beta.
        rng (RngStream): Random stream.
        *params: k for chi and chi_sq, (a, b) for beta.
        size (int or tuple, optional): Keyword only. Defaults to None, a single draw.

    Raises:
        ParameterError: Unknown law, wrong number of parameters or parameters out
            of domain.

    Returns:
        float or numpy.ndarray: Draw(s).
    """
    size = kwargs.pop('size', None)
    if kwargs:
        raise ParameterError("Unexpected arguments: {}".format(", ".join(sorted(kwargs))))
    if not has_law(law):
        raise ParameterError("Unknown law '{}'. Valid laws: {}".format(law, ", ".join(get_laws())))
    sampler, arity = _laws[law]
    if len(params) != arity:
        raise ParameterError("Law '{}' takes {} parameter(s), got {}".format(law, arity, len(params)))
    value = sampler(as_generator(rng), size, *params)
    if size is None:
        return float(value)
    return value


def sample_williams(mu, rng, size=None):
    """Exact draw of (sigma_mu, B(sigma_mu)), the rightmost maximizer of B(t) - mu t
    and the value of B there, from (mu^2 sigma, mu B(sigma)) = (chi3^2 beta^2, chi3^2 beta)
    with beta ~ Beta(1, 2).

    Args:
        mu (float): Slope > 0.
        rng (RngStream): Random stream.
        size (int, optional): Number of pairs. Defaults to None.

    Returns:
        tuple: (sigma, value) as floats or arrays.
    """
    if not mu > 0:
        raise ParameterError("mu must be positive, got {}".format(mu))
    g = as_generator(rng)
    radius = g.chisquare(3, size)
    beta = g.beta(1.0, 2.0, size)
    sigma = radius * beta * beta / (mu * mu)
    value = radius * beta / mu
    if size is None:
        return float(sigma), float(value)
    return sigma, value


# ------------------------------------------------------------------------------
# Inverse Gaussian laws
# ------------------------------------------------------------------------------
def _check_ig(mu, y):
    if np.any(np.asarray(mu) <= 0) or np.any(np.asarray(y) <= 0):
        raise ParameterError("Inverse Gaussian needs mu > 0 and y > 0, got mu={}, y={}".format(mu, y))


def ig_density(mu, y, t, size_biased=False):
    """Density of the first passage time of B(t) + mu t at level y, or of its
    size-biased version (the last passage time).

    Args:
        mu (float): Drift > 0.
        y (float): Level > 0.
        t (float or array): Times; the density is zero for t <= 0.
        size_biased (bool, optional): Weight by (mu/y) t. Defaults to False.

    Raises:
        ParameterError: mu <= 0 or y <= 0.

    Returns:
        float or numpy.ndarray: Density values.
    """
    _check_ig(mu, y)
    t, mu, y = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(mu, dtype=float), np.asarray(y, dtype=float)
    )
    pos = t > 0
    tp = np.where(pos, t, 1.0)
    out = y / np.sqrt(2.0 * np.pi * tp ** 3) * np.exp(-(y - mu * tp) ** 2 / (2.0 * tp))
    if size_biased:
        out = out * mu / y * tp
    return _scalar_or_array(np.where(pos, out, 0.0))


def ig_cdf(mu, y, t, size_biased=False):
    """CDF matching ig_density():
        Phi((mu t - y)/sqrt(t)) +- exp(2 mu y) Phi(-(mu t + y)/sqrt(t))
    with + for the plain law and - for the size-biased one. The second term is
    evaluated in log space.

    Returns:
        float or numpy.ndarray: Probabilities.
    """
    _check_ig(mu, y)
    t, mu, y = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(mu, dtype=float), np.asarray(y, dtype=float)
    )
    pos = t > 0
    tp = np.where(pos, t, 1.0)
    root = np.sqrt(tp)
    first = special.ndtr((mu * tp - y) / root)
    second = np.exp(2.0 * mu * y + special.log_ndtr(-(mu * tp + y) / root))
    value = first - second if size_biased else first + second
    return _scalar_or_array(np.where(pos, np.clip(value, 0.0, 1.0), 0.0))


_decomposition_checks = dict()


def check_size_biased_decomposition(mu, y, grid=None):
    """Sup-norm distance between the size-biased density and the convolution of
    the plain density with the density of chi1^2/mu^2.

    Args:
        mu (float): Drift > 0.
        y (float): Level > 0.
        grid (array, optional): Evaluation times. Defaults to 40 points spanning
            the bulk of the law.

    Returns:
        float: max |f*(t) - (f conv L)(t)| over the grid.
    """
    _check_ig(mu, y)
    if grid is None:
        mean = y / mu + 1.0 / mu ** 2
        grid = np.linspace(0.05, 4.0, 40) * mean
    scale = mu / _SQRT_2PI

    def integrand(s, t):
        # (t - s)^(-1/2) is supplied by the quadrature weight
        return ig_density(mu, y, s) * scale * np.exp(-0.5 * mu * mu * (t - s))

    worst = 0.0
    for t in np.asarray(grid, dtype=float):
        conv, _ = integrate.quad(
            integrand, 0.0, t, args=(t,), weight='alg', wvar=(0.0, -0.5), epsabs=1e-13, epsrel=1e-11
        )
        worst = max(worst, abs(conv - ig_density(mu, y, t, size_biased=True)))
    return worst


def _decomposition_holds(mu, y):
    key = (float(mu), float(y))
    if key not in _decomposition_checks:
        distance = check_size_biased_decomposition(mu, y)
        _decomposition_checks[key] = distance <= 1e-6
        if not _decomposition_checks[key]:
            logger.warning(
                "Size-biased decomposition off by {} for mu={}, y={}; using direct sampler".format(
                    distance, mu, y
                )
            )
    return _decomposition_checks[key]


def sample_ig(mu, y, size_biased, rng, size=None, verify=True):
    """Draw first passage times (plain) or last passage times (size-biased) for
    B(t) + mu t at level y. The size-biased law is sampled as an inverse Gaussian
    draw plus an independent chi1^2/mu^2, once the decomposition is checked by
    quadrature for these parameters.

    Args:
        mu (float): Drift > 0.
        y (float): Level > 0.
        size_biased (bool): Sample the size-biased law.
        rng (RngStream): Random stream.
        size (int, optional): Number of draws. Defaults to None.
        verify (bool, optional): Check the decomposition first. Defaults to True.

    Returns:
        float or numpy.ndarray: Times.
    """
    _check_ig(mu, y)
    g = as_generator(rng)
    if size_biased and verify and not _decomposition_holds(mu, y):
        value = stats.geninvgauss.rvs(0.5, mu * y, scale=y / mu, size=size, random_state=g)
    else:
        value = g.wald(y / mu, y * y, size)
        if size_biased:
            value = value + g.chisquare(1, size) / (mu * mu)
    if size is None:
        return float(value)
    return value


# ------------------------------------------------------------------------------
# Zenith increments and bridges
# ------------------------------------------------------------------------------
def truncated_second_moment(c, s):
    """E[(c - V/sqrt(s))_+^2] for a standard normal V, from Gaussian partial moments:
    (c^2 + 1/s) Phi(c sqrt(s)) + (c/sqrt(s)) phi(c sqrt(s)).

    Args:
        c (float or array): Level.
        s (float or array): Time > 0.

    Raises:
        ParameterError: s <= 0.

    Returns:
        float or numpy.ndarray
    """
    c = np.asarray(c, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ParameterError("s must be positive, got {}".format(s))
    root = np.sqrt(s)
    d = c * root
    return _scalar_or_array((c * c + 1.0 / s) * special.ndtr(d) + c / root * np.exp(-0.5 * d * d) / _SQRT_2PI)


def zenith_density(a, b, s, z):
    """Continuous part of the law of (sigma_b - sigma_a, B(sigma_b) - B(sigma_a)).
    Integrates to 1 - b/a; the remaining mass b/a sits at (0, 0).

    Args:
        a (float): Larger slope.
        b (float): Smaller slope, 0 < b < a.
        s (float or array): Time increment.
        z (float or array): Space increment.

    Raises:
        ParameterError: b <= 0 or b >= a.

    Returns:
        float or numpy.ndarray: Density, zero outside {s > 0, b s <= z <= a s}.
    """
    if not (np.all(np.asarray(b) > 0) and np.all(np.asarray(b) < np.asarray(a))):
        raise ParameterError("Zenith density needs 0 < b < a, got a={}, b={}".format(a, b))
    s, z, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, z, a, b)))
    inside = (s > 0) & (z >= b * s) & (z <= a * s)
    si = np.where(inside, s, 1.0)
    zi = np.where(inside, z, b)
    ratio = zi / si
    level = np.sqrt(np.clip((a - ratio) * (ratio - b), 0.0, None))
    moment = np.asarray(truncated_second_moment(level, si))
    out = 2.0 * b / a * moment * np.exp(-0.5 * zi * zi / si) / (_SQRT_2PI * np.sqrt(si))
    return _scalar_or_array(np.where(inside, out, 0.0))


def bridge_crossing_prob(s, t, a, b, x, y):
    """Probability that a Brownian bridge from (s, x) to (t, y) goes above the
    line u -> a u + b.

    Raises:
        OrderingError: s >= t.
        ParameterError: s <= 0.

    Returns:
        float
    """
    if not s < t:
        raise OrderingError("Bridge needs s < t, got s={}, t={}".format(s, t))
    if not s > 0:
        raise ParameterError("Bridge start time must be positive, got {}".format(s))
    left = max(a * s + b - x, 0.0)
    right = max(a * t + b - y, 0.0)
    return float(np.exp(-2.0 * left * right / (t - s)))


# ------------------------------------------------------------------------------
# Oracles for the majorant at a fixed time
# ------------------------------------------------------------------------------
def chi_pdf(x, k):
    return _scalar_or_array(stats.chi.pdf(x, k))


def chi_cdf(x, k):
    return _scalar_or_array(stats.chi.cdf(x, k))


def f3_density(a, b, y):
    """Joint density of (K'(1), I(1), K(1) - B(1)): 4 y (a+b+y) phi(a+b+y)."""
    a, b, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, y)))
    total = a + b + y
    out = 4.0 * y * total * np.exp(-0.5 * total * total) / _SQRT_2PI
    return _scalar_or_array(np.where((a > 0) & (b > 0) & (y > 0), out, 0.0))


def f5_density(a, b, y, v, w):
    """Joint density of (K'(1), I(1), K(1) - B(1), 1/G_1, D_1) at (a, b, y, v, w).

    The slope a pairs with D_1 = w and the intercept b with 1/G_1 = v; given
    (G_1, D_1) the gap is sqrt((v-1)(w-1)/(wv-1)) chi_3, hence the y^2 factor.
    """
    a, b, y, v, w = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, y, v, w)))
    valid = (a > 0) & (b > 0) & (y > 0) & (v > 1) & (w > 1)
    v = np.where(valid, v, 2.0)
    w = np.where(valid, w, 2.0)
    vm, wm, cross = v - 1.0, w - 1.0, w * v - 1.0
    exponent = b * b * v + 2.0 * a * b + a * a * w + y * y * cross / (vm * wm)
    out = np.sqrt(2.0 / (np.pi ** 3 * vm ** 3 * wm ** 3)) * a * b * y * y * cross * np.exp(-0.5 * exponent)
    return _scalar_or_array(np.where(valid, out, 0.0))


def d1_mixture_density(t, a, b, y):
    """Density of D_1 - 1 given (K'(1), I(1), K(1) - B(1)) = (a, b, y): a mixture of
    the plain and size-biased inverse Gaussian laws with weights a and b + y.
    """
    total = np.asarray(a) + np.asarray(b) + np.asarray(y)
    plain = np.asarray(ig_density(a, y, t))
    biased = np.asarray(ig_density(a, y, t, size_biased=True))
    return _scalar_or_array((a * plain + (b + y) * biased) / total)


def d1_mixture_cdf(t, a, b, y):
    total = np.asarray(a) + np.asarray(b) + np.asarray(y)
    plain = np.asarray(ig_cdf(a, y, t))
    biased = np.asarray(ig_cdf(a, y, t, size_biased=True))
    return _scalar_or_array((a * plain + (b + y) * biased) / total)


def kb_density(k, y):
    """Joint density of (K(1), K(1) - B(1)), symmetric in its arguments."""
    k, y = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(y, dtype=float))
    total = k + y
    out = 4.0 * k * y * total * np.exp(-0.5 * total * total) / _SQRT_2PI
    return _scalar_or_array(np.where((k > 0) & (y > 0), out, 0.0))


def slope_given_z_density(a, z):
    """Density of K'(1) given 2K(1) - B(1) = z."""
    a = np.asarray(a, dtype=float)
    return _scalar_or_array(np.where((a > 0) & (a < z), 3.0 * (z - a) ** 2 / z ** 3, 0.0))


def slope_given_z_cdf(a, z):
    a = np.clip(np.asarray(a, dtype=float), 0.0, z)
    return _scalar_or_array(1.0 - (1.0 - a / z) ** 3)


def gap_given_z_density(y, z):
    """Density of K(1) - B(1) given 2K(1) - B(1) = z."""
    y = np.asarray(y, dtype=float)
    return _scalar_or_array(np.where((y > 0) & (y < z), 6.0 * y * (z - y) / z ** 3, 0.0))


def gap_given_z_cdf(y, z):
    u = np.clip(np.asarray(y, dtype=float), 0.0, z) / z
    return _scalar_or_array(3.0 * u * u - 2.0 * u ** 3)


def bes5_generator(first, second, z):
    """Generator of the five-dimensional Bessel process applied to a function
    with derivatives (first, second) at z."""
    return 2.0 / z * first + 0.5 * second


# ------------------------------------------------------------------------------
# Meanders
# ------------------------------------------------------------------------------
def tilde_meander_density(x):
    """Density 4 x tail(x) of the drift-corrected meander endpoint."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(np.where(x > 0, 4.0 * x * np.asarray(tail(x)), 0.0))


def tilde_meander_cdf(x):
    """1 + 2(x^2 - 1) tail(x) - 2 x phi(x) for x > 0."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    return _scalar_or_array(1.0 + 2.0 * (x * x - 1.0) * np.asarray(tail(x)) - 2.0 * x * np.asarray(phi(x)))


def tilde_rn(x):
    """Radon-Nikodym derivative 2 M(x)/x of the drift-corrected meander with respect
    to BES(3) from 0, as a function of the endpoint."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(2.0 * np.asarray(mills(x)) / x)


def hat_rn(minslope_value, end):
    """Radon-Nikodym derivative 2 minslope / endpoint of the plain meander with
    respect to BES(3) from 0."""
    return _scalar_or_array(2.0 * np.asarray(minslope_value, dtype=float) / np.asarray(end, dtype=float))


# ------------------------------------------------------------------------------
# Quadrature
# ------------------------------------------------------------------------------
def tensor_quadrature(func, bounds, nodes=32):
    """Tensor Gauss-Legendre rule over a box.

    Args:
        func (callable): Vectorized integrand taking one array per dimension.
        bounds (list): [(lo, hi), ...] per dimension.
        nodes (int or list, optional): Nodes per dimension. Defaults to 32.

    Returns:
        float: Integral estimate.
    """
    dims = len(bounds)
    if np.isscalar(nodes):
        nodes = [int(nodes)] * dims
    points, weights = list(), list()
    for (lo, hi), count in zip(bounds, nodes):
        x, w = np.polynomial.legendre.leggauss(count)
        half = 0.5 * (hi - lo)
        points.append(lo + half * (x + 1.0))
        weights.append(half * w)
    if dims == 1:
        return float(np.sum(weights[0] * func(points[0])))
    grids = np.meshgrid(*points[1:], indexing='ij')
    inner = weights[1]
    for each in weights[2:]:
        inner = np.multiply.outer(inner, each)
    total = 0.0
    for x0, w0 in zip(points[0], weights[0]):
        values = func(np.full(grids[0].shape, x0), *grids)
        total += w0 * float(np.sum(values * inner))
    return total
