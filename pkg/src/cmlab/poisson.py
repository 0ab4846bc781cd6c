# coding=utf-8
from __future__ import absolute_import, print_function

from collections import namedtuple

import numpy as np

from cmlab.serialize import Serializable
from cmlab.config import get_option
from cmlab.distributions import as_generator, sample_williams, phi, tail, chi_pdf, zenith_density
from cmlab.paths import GridPath, sample_bessel, sample_excursion_at, bridge_norm_at
from cmlab.geometry import MajorantSkeleton, StraddleInfo, convex_minorant, straddle as skeleton_straddle
from cmlab.chains import ChainState, step_vertex
from cmlab.logger import logger
from cmlab.error import ParameterError, ConstructionError, RangeError, InputError

PsiState = namedtuple('PsiState', ['a', 'k', 'y', 'w'])
StraddleSample = namedtuple('StraddleSample', ['state', 'intercept', 'g', 'd', 'retries'])
StraddleBatch = namedtuple('StraddleBatch', ['a', 'k', 'y', 'w', 'intercept', 'g', 'd', 'retries'])
BesselMinorant = namedtuple('BesselMinorant', ['path', 'skeleton', 'construction'])

_MAX_RETRIES = 10
_CONSTRUCTIONS = ('direct', 'poisson')


def _check_window(r_lo, r_hi):
    if not 0 < r_lo < r_hi:
        raise ParameterError("Window needs 0 < r_lo < r_hi, got ({}, {})".format(r_lo, r_hi))


def _cap(cap_log2):
    if cap_log2 is None:
        cap_log2 = get_option('window_cap_log2')
    return 2.0 ** cap_log2


class TauJumps(Serializable):
    """Jumps of the pure-jump process tau over a window of inverse slopes.

    Args:
        ``r`` (array): Inverse slopes, increasing.

        ``dtau`` (array): Durations of the matching faces, positive.

        ``window`` (tuple): (r_lo, r_hi) holding every r.
    """

    def __init__(self, r, dtau, window):
        super(TauJumps, self).__init__()
        r = np.asarray(r, dtype=float)
        dtau = np.asarray(dtau, dtype=float)
        _check_window(*window)
        if r.shape != dtau.shape or r.ndim != 1:
            raise InputError("Jumps need matching 1d r and dtau, got {} and {}".format(r.shape, dtau.shape))
        if np.any(np.diff(r) < 0) or np.any(dtau <= 0):
            raise InputError("Jumps need increasing r and positive durations")
        if np.any(r <= window[0]) or np.any(r >= window[1]):
            raise InputError("Jump inverse slopes must lie inside the window {}".format(window))
        self.r = r
        self.dtau = dtau
        self.window = [float(window[0]), float(window[1])]

    def count_in(self, lo, hi):
        """Number of jumps with lo < r < hi."""
        return int(np.count_nonzero((self.r > lo) & (self.r < hi)))

    def __len__(self):
        return len(self.r)

    def __repr__(self):
        return "TauJumps(window={}, jumps={})".format(self.window, len(self))


def sample_tau_window(r_lo, r_hi, rng):
    """Jumps of tau with inverse slopes in (r_lo, r_hi).

    Locations form a Poisson process of intensity dr/r, so the count is
    Poisson(log(r_hi/r_lo)) and log r is uniform given the count. Each jump
    carries dtau = r^2 chi1^2.

    Args:
        r_lo (float): Window start > 0.
        r_hi (float): Window end > r_lo.
        rng (RngStream): Random stream.

    Raises:
        ParameterError: Bad window.

    Returns:
        TauJumps
    """
    _check_window(r_lo, r_hi)
    g = as_generator(rng)
    width = np.log(r_hi / float(r_lo))
    count = g.poisson(width)
    r = np.sort(r_lo * np.exp(width * g.random(count)))
    # exp of the log-uniform draw can round onto the window edges
    r = np.clip(r, np.nextafter(r_lo, np.inf), np.nextafter(r_hi, 0.0))
    dtau = r * r * g.chisquare(1, count)
    return TauJumps(r, dtau, (r_lo, r_hi))


def assemble_K(jumps, origin=(0.0, 0.0)):
    """Concave majorant pieced together from tau jumps.

    Faces follow the jumps in order of increasing r, each with slope 1/r and
    duration dtau, starting at origin.

    Args:
        jumps (TauJumps): Nonempty jumps.
        origin (tuple, optional): (time, value) of the first vertex. Defaults to (0, 0).

    Raises:
        ConstructionError: No jumps.

    Returns:
        MajorantSkeleton
    """
    if len(jumps) == 0:
        raise ConstructionError("Cannot assemble a majorant from an empty jump set")
    times = origin[0] + np.concatenate([[0.0], np.cumsum(jumps.dtau)])
    values = origin[1] + np.concatenate([[0.0], np.cumsum(jumps.dtau / jumps.r)])
    return MajorantSkeleton(times, values, 'concave')


# ------------------------------------------------------------------------------
# Excursions between vertices
# ------------------------------------------------------------------------------
def _excursion_gaps(vertex_times, times, g):
    """Gaps between a skeleton and the path at sorted times, one scaled standard
    excursion per face, read jointly for times on the same face."""
    faces = np.searchsorted(vertex_times, times, side='right') - 1
    faces = np.clip(faces, 0, len(vertex_times) - 2)
    gaps = np.zeros(times.shape)
    for face in np.unique(faces):
        chosen = faces == face
        left, right = vertex_times[face], vertex_times[face + 1]
        width = right - left
        fractions = np.clip((times[chosen] - left) / width, 0.0, 1.0)
        gaps[chosen] = np.sqrt(width) * sample_excursion_at(fractions, g)
    return gaps


def sample_path_at(skeleton, times, rng):
    """Path read exactly at sorted times from its majorant (or minorant) skeleton.

    Args:
        skeleton (MajorantSkeleton): Skeleton whose faces carry independent excursions.
        times (array): Sorted times inside the span, ends included.
        rng (RngStream): Random stream.

    Raises:
        RangeError: A time outside the span.
        InputError: Times not sorted.

    Returns:
        numpy.ndarray: K - gap for a concave skeleton, C + gap for a convex one.
    """
    times = np.asarray(times, dtype=float)
    first, last = skeleton.span
    if np.any(times < first) or np.any(times > last):
        raise RangeError("Times outside the skeleton span {}".format(skeleton.span))
    if np.any(np.diff(times) < 0):
        raise InputError("Query times must be sorted")
    gaps = _excursion_gaps(skeleton.times, times, as_generator(rng))
    if skeleton.kind == 'convex':
        return skeleton.value_at(times) + gaps
    return skeleton.value_at(times) - gaps


def attach_excursions(skeleton, n, rng):
    """Path on a uniform grid of n steps over the skeleton's span, with an
    independent excursion under (or above) each face.

    Args:
        skeleton (MajorantSkeleton): Skeleton.
        n (int): Total number of grid steps.
        rng (RngStream): Random stream.

    Returns:
        GridPath
    """
    if int(n) != n or n < 1:
        raise ParameterError("Number of steps must be an integer >= 1, got {}".format(n))
    first, last = skeleton.span
    times = np.linspace(first, last, int(n) + 1)
    values = sample_path_at(skeleton, times, rng)
    return GridPath(first, (last - first) / float(n), values)


def _face_gap(t, g, d, generator):
    return np.sqrt((t - g) * (d - t) / (d - g)) * generator.chisquare(3) ** 0.5


# ------------------------------------------------------------------------------
# Concave majorant of Brownian motion
# ------------------------------------------------------------------------------
class PoissonMajorant(object):
    """Concave majorant of a standard Brownian motion on (0, inf), built lazily.

    The first vertex is the rightmost maximizer of B(t) - t/r_lo, drawn exactly
    from the Williams marginals. Faces above it come from the tau jumps of
    (r_lo, r_hi); the window grows upward with fresh jumps on (r_hi, 2 r_hi) and
    downward by the (tau, rho) vertex recursion started from the first vertex.

    Args:
        ``rng`` (RngStream): Random stream.

        ``window`` (tuple, optional): Initial (r_lo, r_hi). Defaults to the
        configured initial window.

        ``cap_log2`` (float, optional): Largest allowed log2 of the ratio
        between the extreme inverse slopes. Defaults to the configured cap.
    """

    def __init__(self, rng, window=None, cap_log2=None):
        r_lo, r_hi = window if window is not None else get_option('initial_window')
        _check_window(r_lo, r_hi)
        g = as_generator(rng)
        sigma, peak = sample_williams(1.0 / r_lo, g)
        jumps = sample_tau_window(r_lo, r_hi, g)
        self._setup(g, sigma, peak, r_lo, r_hi, jumps.r, jumps.dtau, cap_log2)

    @classmethod
    def from_state(cls, rng, origin, window, r, dtau, cap_log2=None):
        """Continue a construction whose origin and window jumps are already drawn."""
        _check_window(*window)
        construction = cls.__new__(cls)
        construction._setup(as_generator(rng), origin[0], origin[1], window[0], window[1], r, dtau, cap_log2)
        return construction

    def _setup(self, g, sigma, peak, r_lo, r_hi, r, dtau, cap_log2):
        self._g = g
        self.cap = _cap(cap_log2)
        self.r_lo = float(r_lo)
        self.r_hi = float(r_hi)
        self.r_floor = float(r_lo)
        self.origin = (float(sigma), float(peak))
        r = np.asarray(r, dtype=float)
        dtau = np.asarray(dtau, dtype=float)
        self.times = sigma + np.concatenate([[0.0], np.cumsum(dtau)])
        self.values = peak + np.concatenate([[0.0], np.cumsum(dtau / r)])
        # Intercept of the supporting line of slope 1/r_lo at the origin
        self.rho = float(peak - sigma / r_lo)

    @property
    def ratio(self):
        return self.r_hi / self.r_floor

    def _check_cap(self):
        if self.ratio > self.cap:
            raise ConstructionError(
                "Window ratio {:.3g} passed the cap {:.3g}".format(self.ratio, self.cap)
            )

    def extend_up(self):
        """Add the faces with inverse slopes in (r_hi, 2 r_hi)."""
        jumps = sample_tau_window(self.r_hi, 2.0 * self.r_hi, self._g)
        if len(jumps):
            self.times = np.concatenate([self.times, self.times[-1] + np.cumsum(jumps.dtau)])
            self.values = np.concatenate([self.values, self.values[-1] + np.cumsum(jumps.dtau / jumps.r)])
        self.r_hi *= 2.0
        logger.debug("Window grown up to r_hi={}".format(self.r_hi))
        self._check_cap()

    def extend_down(self):
        """Add one vertex below the lowest one by the (tau, rho) recursion."""
        state = ChainState(float(self.times[0]), float(self.values[0]), self.rho)
        below = step_vertex(state, self._g)
        if not 0 < below.tau < state.tau:
            raise ConstructionError("Vertex recursion stalled at tau={}".format(state.tau))
        slope = (state.kappa - below.kappa) / (state.tau - below.tau)
        self.times = np.concatenate([[below.tau], self.times])
        self.values = np.concatenate([[below.kappa], self.values])
        self.rho = below.rho
        self.r_floor = min(self.r_floor, 1.0 / slope)
        self._check_cap()

    def cover(self, t_lo, t_hi=None):
        """Grow until the vertex span strictly contains [t_lo, t_hi].

        Raises:
            RangeError: t_lo <= 0.
            ConstructionError: The window cap was reached.
        """
        t_hi = t_lo if t_hi is None else t_hi
        if not 0 < t_lo <= t_hi:
            raise RangeError("Cover needs 0 < t_lo <= t_hi, got ({}, {})".format(t_lo, t_hi))
        while self.times[0] >= t_lo:
            self.extend_down()
        while self.times[-1] <= t_hi:
            self.extend_up()

    def cover_chain(self, mu, depth):
        """Grow until sigma_mu is a vertex with depth vertices below it."""
        while not np.any(np.diff(self.values) <= mu * np.diff(self.times)):
            self.extend_up()
        # faces added below the origin are only steeper than 1 / r_lo, not mu
        while np.count_nonzero(np.diff(self.values) > mu * np.diff(self.times)) < depth:
            self.extend_down()

    def skeleton(self):
        return MajorantSkeleton(self.times, self.values, 'concave')

    def straddle(self, t):
        """Face straddling t with the gap K(t) - B(t) drawn exactly.

        Returns:
            StraddleInfo
        """
        self.cover(t)
        i = int(np.searchsorted(self.times, t, side='right')) - 1
        g, d = float(self.times[i]), float(self.times[i + 1])
        slope = float((self.values[i + 1] - self.values[i]) / (d - g))
        value = float(self.values[i] + slope * (t - g))
        return StraddleInfo(g, d, slope, value, value - slope * t, float(_face_gap(t, g, d, self._g)))

    def sample_path_at(self, times):
        """B at sorted times > 0, jointly exact."""
        times = np.asarray(times, dtype=float)
        self.cover(float(times[0]), float(times[-1]))
        return sample_path_at(self.skeleton(), times, self._g)

    def sample_gaps(self, times):
        """K - B at sorted times > 0, jointly exact."""
        times = np.asarray(times, dtype=float)
        self.cover(float(times[0]), float(times[-1]))
        return _excursion_gaps(self.times, times, self._g)

    def __repr__(self):
        return "PoissonMajorant(window=({}, {}), vertices={})".format(
            self.r_floor, self.r_hi, len(self.times))


def straddle_time_one(rng, t=1.0, window=None):
    """Exact state of the majorant at time t.

    Args:
        rng (RngStream): Random stream.
        t (float, optional): Time > 0. Defaults to 1.
        window (tuple, optional): Initial window. Defaults to the configured one.

    Raises:
        ConstructionError: The window cap was hit on every retry.

    Returns:
        StraddleSample: (PsiState(K'(t), K(t), K(t) - B(t), D_t - t), I(t), G_t, D_t, retries)
    """
    g = as_generator(rng)
    retries = 0
    while True:
        try:
            info = PoissonMajorant(g, window).straddle(t)
            break
        except ConstructionError as error:
            retries += 1
            logger.warning("Straddle retry {}: {}".format(retries, error))
            if retries > _MAX_RETRIES:
                raise
    state = PsiState(info.slope, info.value, info.gap, info.d - t)
    return StraddleSample(state, info.intercept, info.g, info.d, retries)


def sample_straddles(n, rng, t=1.0, window=None):
    """Batch of independent exact straddles at time t.

    The initial window is drawn for all rows at once; rows whose window does not
    straddle t are continued one by one with PoissonMajorant.

    Args:
        n (int): Number of samples.
        rng (RngStream): Random stream.
        t (float, optional): Time > 0. Defaults to 1.
        window (tuple, optional): Initial window. Defaults to the configured one.

    Returns:
        StraddleBatch: Arrays of length n.
    """
    if int(n) != n or n < 1:
        raise ParameterError("Sample size must be a positive integer, got {}".format(n))
    if not t > 0:
        raise ParameterError("Straddle time must be positive, got {}".format(t))
    n = int(n)
    r_lo, r_hi = window if window is not None else get_option('initial_window')
    _check_window(r_lo, r_hi)
    g = as_generator(rng)
    sigma, peak = sample_williams(1.0 / r_lo, g, size=n)
    width = np.log(r_hi / float(r_lo))
    counts = g.poisson(width, n)
    owner = np.repeat(np.arange(n), counts)
    r = r_lo * np.exp(width * g.random(owner.size))
    order = np.lexsort((r, owner))
    r = r[order]
    dtau = r * r * g.chisquare(1, owner.size)
    rise = dtau / r

    ends = np.cumsum(counts)
    starts = ends - counts
    run_t = np.concatenate([[0.0], np.cumsum(dtau)])
    run_v = np.concatenate([[0.0], np.cumsum(rise)])
    right_t = sigma[owner] + run_t[1:] - run_t[starts][owner]
    right_v = peak[owner] + run_v[1:] - run_v[starts][owner]
    left_t = right_t - dtau
    left_v = right_v - rise

    out = dict((name, np.full(n, np.nan)) for name in ('a', 'g', 'd', 'left'))
    hit = (left_t <= t) & (t < right_t)
    rows = owner[hit]
    out['a'][rows] = 1.0 / r[hit]
    out['g'][rows] = left_t[hit]
    out['d'][rows] = right_t[hit]
    out['left'][rows] = left_v[hit]

    retries = np.zeros(n, dtype=int)
    missing = np.nonzero(np.isnan(out['a']))[0]
    for row in missing:
        span = slice(starts[row], ends[row])
        try:
            construction = PoissonMajorant.from_state(
                g, (sigma[row], peak[row]), (r_lo, r_hi), r[span], dtau[span]
            )
            info = construction.straddle(t)
        except ConstructionError as error:
            logger.warning("Straddle row {} restarted: {}".format(row, error))
            sample = straddle_time_one(g, t, window)
            info = StraddleInfo(sample.g, sample.d, sample.state.a, sample.state.k, sample.intercept, 0.0)
            retries[row] = sample.retries + 1
        out['a'][row] = info.slope
        out['g'][row] = info.g
        out['d'][row] = info.d
        out['left'][row] = info.value - info.slope * (t - info.g)
    logger.debug("Straddles: {} of {} rows continued past the initial window".format(len(missing), n))

    k = out['left'] + out['a'] * (t - out['g'])
    y = np.sqrt((t - out['g']) * (out['d'] - t) / (out['d'] - out['g']) * g.chisquare(3, n))
    return StraddleBatch(out['a'], k, y, out['d'] - t, k - out['a'] * t, out['g'], out['d'], retries)


# ------------------------------------------------------------------------------
# Convex minorant of BES(3, mu)
# ------------------------------------------------------------------------------
class BesselMinorantWindow(object):
    """Convex minorant of a three-dimensional Bessel process with drift mu,
    started at 0, built lazily from its faces.

    Writing c = mu - alpha for a face of slope alpha, the values c form a Poisson
    process of intensity dc/c on (0, mu) and a face's duration is chi1^2 / c^2.
    Faces are laid out from time 0 in order of increasing slope; the window of c
    halves its lower end until the requested time is covered.

    Args:
        ``mu`` (float): Drift > 0.

        ``rng`` (RngStream): Random stream.

        ``cap_log2`` (float, optional): Largest allowed log2 of mu / c_lo.
        Defaults to the configured cap.
    """

    def __init__(self, mu, rng, cap_log2=None):
        if not mu > 0:
            raise ParameterError("mu must be positive, got {}".format(mu))
        self.mu = float(mu)
        self.cap = _cap(cap_log2)
        self._g = as_generator(rng)
        self.c_lo = self.mu
        self.times = np.zeros(1)
        self.values = np.zeros(1)
        self.extend(4.0)

    def extend(self, factor=2.0):
        """Add the faces with c in (c_lo / factor, c_lo)."""
        lower = self.c_lo / factor
        width = np.log(factor)
        c = np.sort(lower * np.exp(width * self._g.random(self._g.poisson(width))))[::-1]
        durations = self._g.chisquare(1, c.size) / (c * c)
        slopes = self.mu - c
        self.times = np.concatenate([self.times, self.times[-1] + np.cumsum(durations)])
        self.values = np.concatenate([self.values, self.values[-1] + np.cumsum(slopes * durations)])
        self.c_lo = lower
        if self.mu / self.c_lo > self.cap:
            raise ConstructionError("Minorant window passed the cap at c_lo={:.3g}".format(self.c_lo))

    def cover(self, u):
        if u < 0:
            raise RangeError("Minorant starts at time 0, got {}".format(u))
        while self.times[-1] <= u:
            self.extend()
            logger.debug("Minorant window grown to c_lo={}".format(self.c_lo))

    def skeleton(self):
        return MajorantSkeleton(self.times, self.values, 'convex')

    @property
    def slopes(self):
        return np.diff(self.values) / np.diff(self.times)

    def straddle(self, u):
        """Face of C straddling u with the gap R(u) - C(u) drawn exactly.

        Returns:
            StraddleInfo
        """
        self.cover(u)
        i = int(np.searchsorted(self.times, u, side='right')) - 1
        g, d = float(self.times[i]), float(self.times[i + 1])
        slope = float((self.values[i + 1] - self.values[i]) / (d - g))
        value = float(self.values[i] + slope * (u - g))
        return StraddleInfo(g, d, slope, value, value - slope * u, float(_face_gap(u, g, d, self._g)))

    def sample_path_at(self, times):
        times = np.asarray(times, dtype=float)
        self.cover(float(times[-1]))
        return sample_path_at(self.skeleton(), times, self._g)

    def __repr__(self):
        return "BesselMinorantWindow(mu={}, c_lo={}, vertices={})".format(self.mu, self.c_lo, len(self.times))


def bessel_minorant(mu, T, n, rng, construction='direct'):
    """BES(3, mu) path on [0, T] with its convex minorant.

    Args:
        mu (float): Drift > 0.
        T (float): Horizon > 0.
        n (int): Grid steps.
        rng (RngStream): Random stream.
        construction (str, optional): 'direct' takes the minorant of a grid path,
            'poisson' builds the minorant first and fills in excursions.
            Defaults to 'direct'.

    Returns:
        BesselMinorant: (path, skeleton, construction)
    """
    if not mu > 0 or not T > 0:
        raise ParameterError("Bessel minorant needs mu > 0 and T > 0, got {}, {}".format(mu, T))
    if construction not in _CONSTRUCTIONS:
        raise ParameterError("Unknown construction {}, use one of {}".format(construction, _CONSTRUCTIONS))
    g = as_generator(rng)
    if construction == 'direct':
        path = sample_bessel(3, 0.0, mu, n, T, g)
        return BesselMinorant(path, convex_minorant(path), construction)
    window = BesselMinorantWindow(mu, g)
    times = np.linspace(0.0, T, int(n) + 1)
    values = window.sample_path_at(times)
    values[0] = 0.0
    return BesselMinorant(GridPath(0.0, T / float(n), values, drift_tag=mu), window.skeleton(), construction)


# ------------------------------------------------------------------------------
# Zenith increments and the four-dimensional Markov process
# ------------------------------------------------------------------------------
def _check_levels(a, b):
    if not 0 < b < a:
        raise ParameterError("Zenith increments need 0 < b < a, got a={}, b={}".format(a, b))


def zenith_increment(a, b, rng):
    """(sigma_b - sigma_a, B(sigma_b) - B(sigma_a)) for 0 < b < a.

    Returns:
        tuple: (ds, dz); (0, 0) when the window (1/a, 1/b) holds no jump.
    """
    _check_levels(a, b)
    jumps = sample_tau_window(1.0 / a, 1.0 / b, rng)
    return float(np.sum(jumps.dtau)), float(np.sum(jumps.dtau / jumps.r))


def sample_zenith_increments(a, b, n, rng):
    """n independent zenith increments as two arrays."""
    _check_levels(a, b)
    g = as_generator(rng)
    width = np.log(a / float(b))
    counts = g.poisson(width, n)
    owner = np.repeat(np.arange(n), counts)
    r = np.exp(width * g.random(owner.size)) / a
    dtau = r * r * g.chisquare(1, owner.size)
    ds = np.bincount(owner, weights=dtau, minlength=n)
    dz = np.bincount(owner, weights=dtau / r, minlength=n)
    return ds, dz


def _check_state(state):
    if not (state.a > 0 and state.w > 0 and state.y >= 0):
        raise ParameterError("Bad state {}".format(state))


def _direct_minorant_straddle(a, u, steps_per_unit, g):
    horizon = max(2.0 * u, 4.0 / (a * a), 1.0)
    for attempt in range(_MAX_RETRIES + 1):
        n = max(int(np.ceil(horizon * steps_per_unit)), 2)
        path = sample_bessel(3, 0.0, a, n, horizon, g)
        minorant = convex_minorant(path)
        # the last vertex is the grid end, which is not a vertex of the true minorant
        if minorant.times[-2] > u:
            return skeleton_straddle(minorant, u)
        logger.warning("Bessel horizon {} too short for u={}, doubling".format(horizon, u))
        horizon *= 2.0
    raise ConstructionError("Bessel horizon cap reached for u={}".format(u))


def psi_step(state, delta, rng, construction='poisson', n=None):
    """Evolve (K'(t), K(t), K(t) - B(t), D_t - t) by delta.

    While delta < w the majorant stays on its face and only the gap moves, as a
    BES(3) bridge from y to 0 over w. Otherwise the new face is read from the
    convex minorant C of a fresh BES(3, a) path R at u = delta - w:
    (a - C'(u), k + a delta - C(u), R(u) - C(u), D^R_u - u).

    Args:
        state (PsiState): Current state.
        delta (float): Time step > 0.
        rng (RngStream): Random stream.
        construction (str, optional): 'poisson' (exact) or 'direct' (grid).
            Defaults to 'poisson'.
        n (int, optional): Grid steps per unit time for 'direct'. Defaults to
            the configured grid density.

    Returns:
        PsiState
    """
    if not delta > 0:
        raise ParameterError("Step must be positive, got {}".format(delta))
    if construction not in _CONSTRUCTIONS:
        raise ParameterError("Unknown construction {}, use one of {}".format(construction, _CONSTRUCTIONS))
    _check_state(state)
    g = as_generator(rng)
    a, k, y, w = state
    if delta < w:
        scale = np.sqrt(w)
        start = np.array([[y / scale, 0.0, 0.0]])
        z = scale * bridge_norm_at(np.array([[delta / w]]), g, start=start)[0, 0]
        return PsiState(a, k + a * delta, float(z), w - delta)
    u = delta - w
    if construction == 'poisson':
        info = BesselMinorantWindow(a, g).straddle(u)
    else:
        info = _direct_minorant_straddle(a, u, n or get_option('grid_steps_per_unit'), g)
    return PsiState(a - info.slope, k + a * delta - info.value, info.gap, info.d - u)


def psi_step_batch(a, k, y, w, delta, rng):
    """psi_step over arrays of states with the exact construction.

    Returns:
        PsiState: Arrays.
    """
    if not delta > 0:
        raise ParameterError("Step must be positive, got {}".format(delta))
    a, k, y, w = (np.array(v, dtype=float) for v in (a, k, y, w))
    g = as_generator(rng)
    out_a, out_k, out_y, out_w = a.copy(), k + a * delta, y.copy(), w - delta
    stay = delta < w
    if np.any(stay):
        scale = np.sqrt(w[stay])
        start = np.zeros((scale.size, 3))
        start[:, 0] = y[stay] / scale
        out_y[stay] = scale * bridge_norm_at((delta / w[stay])[:, None], g, start=start)[:, 0]
    for row in np.nonzero(~stay)[0]:
        u = delta - w[row]
        info = BesselMinorantWindow(a[row], g).straddle(u)
        out_a[row] = a[row] - info.slope
        out_k[row] = k[row] + a[row] * delta - info.value
        out_y[row] = info.gap
        out_w[row] = info.d - u
    return PsiState(out_a, out_k, out_y, out_w)


# ------------------------------------------------------------------------------
# Convex minorant of BES(3, mu) at a fixed time
# ------------------------------------------------------------------------------
def _gap_scale(t, u, x):
    return np.sqrt((t - u) * (x + u - t) / x)


def drift_fixed_density(alpha, u, x, l, y, t, mu):
    """Density of (C'(t), G_t, D_t - G_t, C(G_t), R(t) - C(t)) on {G_t > 0} for the
    convex minorant C of BES(3, mu) from 0.

    Args:
        alpha, u, x, l, y (float or array): Slope, left vertex time, face length,
            value at the left vertex, gap.
        t (float): Time > 0.
        mu (float): Drift > 0.

    Returns:
        float or numpy.ndarray
    """
    alpha, u, x, l, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, u, x, l, y)))
    inside = ((alpha > 0) & (alpha < mu) & (u > 0) & (u < t) & (x > t - u)
              & (l >= 0) & (l <= alpha * u) & (y > 0))
    alpha = np.where(inside, alpha, 0.5 * mu)
    u = np.where(inside, u, 0.5 * t)
    x = np.where(inside, x, t)
    c = mu - alpha
    scale = _gap_scale(t, u, x)
    face = phi(c * np.sqrt(x)) / np.sqrt(x)
    vertex = zenith_density(mu, c, u, mu * u - l)
    gap = chi_pdf(y / scale, 3) / scale
    return np.where(inside, face * vertex * gap, 0.0)


def drift_fixed_atom_density(alpha, x, y, t, mu):
    """Density of (C'(t), D_t, R(t) - C(t)) on {G_t = 0}."""
    alpha, x, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, x, y)))
    inside = (alpha > 0) & (alpha < mu) & (x > t) & (y > 0)
    alpha = np.where(inside, alpha, 0.5 * mu)
    x = np.where(inside, x, 2.0 * t)
    c = mu - alpha
    scale = _gap_scale(t, 0.0, x)
    density = (1.0 - alpha / mu) * phi(c * np.sqrt(x)) / np.sqrt(x) * chi_pdf(y / scale, 3) / scale
    return np.where(inside, density, 0.0)


def drift_fixed_slope_density(alpha, t, mu, nodes=48):
    """Density of C'(t), the gap and the face length integrated in closed form and
    the left vertex by Gauss-Legendre quadrature.

    Args:
        alpha (float or array): Slopes in (0, mu).
        t (float): Time > 0.
        mu (float): Drift > 0.
        nodes (int, optional): Nodes per quadrature axis. Defaults to 48.

    Returns:
        float or numpy.ndarray
    """
    if not (t > 0 and mu > 0):
        raise ParameterError("Need t > 0 and mu > 0, got t={}, mu={}".format(t, mu))
    scalar = np.ndim(alpha) == 0
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    inside = (alpha > 0) & (alpha < mu)
    alpha_safe = np.where(inside, alpha, 0.5 * mu)
    c = mu - alpha_safe

    v, wv = np.polynomial.legendre.leggauss(nodes)
    v, wv = 0.5 * (v + 1.0), 0.5 * wv
    theta, wtheta = np.polynomial.legendre.leggauss(nodes)
    theta, wtheta = 0.5 * np.pi * (theta + 1.0), 0.5 * np.pi * wtheta

    # u = t v^2 removes the u^(-1/2) singularity of the vertex law at 0
    u = t * v * v
    a3 = alpha_safe[:, None, None]
    c3 = c[:, None, None]
    u3 = u[None, :, None]
    th3 = theta[None, None, :]
    z = u3 * (c3 + a3 * 0.5 * (1.0 - np.cos(th3)))
    jacobian = u3 * a3 * 0.5 * np.sin(th3)
    vertex = zenith_density(mu, np.broadcast_to(c3, z.shape), u3, z)
    mass = np.sum(vertex * jacobian * wtheta, axis=2)
    spread = np.sum(mass * (2.0 * t * v * wv) * tail(c[:, None] * np.sqrt(t - u[None, :])), axis=1)

    density = 2.0 / c * ((1.0 - alpha_safe / mu) * tail(c * np.sqrt(t)) + spread)
    density = np.where(inside, density, 0.0)
    return float(density[0]) if scalar else density


def drift_fixed_atom_probability(t, mu):
    """P(G_t = 0): the minorant's first face still runs at time t."""
    if not (t > 0 and mu > 0):
        raise ParameterError("Need t > 0 and mu > 0, got t={}, mu={}".format(t, mu))
    m = mu * np.sqrt(t)
    return float(2.0 / m * (m * tail(m) - phi(m) + phi(0.0)))
