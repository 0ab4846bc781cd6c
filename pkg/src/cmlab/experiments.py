# coding=utf-8
from __future__ import absolute_import, print_function

import time
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import stats as scipy_stats
from scipy.integrate import cumulative_trapezoid

from cmlab.serialize import Serializable
from cmlab.config import get_config, get_option, get_seed, update_config
from cmlab import distributions as dist
from cmlab.distributions import RngStream, as_generator
from cmlab.paths import GridPath, sample_bm, sample_bessel, sample_bessel_at, sample_williams_path
from cmlab.geometry import concave_majorant, convex_minorant, straddle, sigma_mu, minslope, meanders
from cmlab.geometry import quadratic_variation
from cmlab import poisson
from cmlab.poisson import PoissonMajorant, BesselMinorantWindow, sample_straddles, psi_step_batch
from cmlab import chains
from cmlab import stats
from cmlab.logger import logger
from cmlab.error import RegistryError, ParameterError, SetupError, ConstructionError

Experiment = namedtuple('Experiment', ['name', 'function', 'claim', 'defaults'])
Bump = namedtuple('Bump', ['value', 'first', 'second'])

_experiments = dict()

BUMPS = ('gauss', 'shifted_gauss', 'compact')
# Continuity correction for a discretely monitored barrier
_BARRIER_SHIFT = 0.5826


class ExperimentSpec(Serializable):
    """A registered experiment with parameter overrides.

    Args:
        ``name`` (str): Registered experiment name.

        ``params`` (dict, optional): Overrides of the registered defaults. Defaults to None.

        ``seed`` (int, optional): Defaults to get_seed().

    Raises:
        RegistryError: Unknown name or parameter.
    """

    def __init__(self, name, params=None, seed=None):
        super(ExperimentSpec, self).__init__()
        experiment = get_experiment(name)
        params = dict(params or dict())
        unknown = sorted(set(params) - set(experiment.defaults))
        if unknown:
            raise RegistryError(
                "Unknown parameters for {}: {}. Valid parameters: {}".format(
                    name, ", ".join(unknown), ", ".join(sorted(experiment.defaults))
                )
            )
        self.name = name
        self.params = params
        self.seed = get_seed() if seed is None else int(seed)

    def resolved_params(self):
        values = dict(get_experiment(self.name).defaults)
        values.update(self.params)
        return values


# ------------------------------------------------------------------------------
# Registry
# ------------------------------------------------------------------------------
def add_experiment(name, function, claim, **defaults):
    """Register an experiment.

    Args:
        ``name`` (str): Name used to run it.

        ``function`` (callable): Takes a RunContext and adds reports to it.

        ``claim`` (str): One line naming the identity the experiment checks.

        ``**defaults``: Parameters and their default values; nothing else is accepted.

    Returns:
        Experiment
    """
    experiment = Experiment(name, function, claim, defaults)
    _experiments[name] = experiment
    return experiment


def remove_experiment(name):
    """
    Returns:
        bool: True if successful, False if the name was not found.
    """
    if has_experiment(name):
        del _experiments[name]
        return True
    return False


def has_experiment(name):
    return name in _experiments.keys()


def reset_experiments():
    """Drop every registered experiment and register the built-in ones again.

    Returns:
        bool: True if clearing was successful.
    """
    _experiments.clear()
    _register_builtins()
    return True


def get_experiment(name):
    """
    Raises:
        RegistryError: Unknown name; the message lists the valid ones.

    Returns:
        Experiment
    """
    if not has_experiment(name):
        raise RegistryError(
            "Unknown experiment '{}'. Valid experiments: {}".format(name, ", ".join(get_experiments()))
        )
    return _experiments[name]


def get_experiments():
    """
    Returns:
        list: Sorted experiment names.
    """
    return sorted(_experiments.keys())


# ------------------------------------------------------------------------------
# Running
# ------------------------------------------------------------------------------
def _run_block(block):
    function, size, stream, args = block
    return function(size, stream, *args)


def _concatenate(results):
    first = results[0]
    if isinstance(first, tuple):
        fields = [np.concatenate(parts) for parts in zip(*results)]
        return type(first)(*fields) if hasattr(first, '_fields') else tuple(fields)
    return np.concatenate(results)


def replicate(function, n, stream, workers=1, chunk=None, args=()):
    """Run function(size, stream, *args) over fixed-size blocks and concatenate.

    Block i always gets stream.substream(i), so results only depend on (n, chunk,
    stream) and never on the number of workers.

    Args:
        function (callable): Top-level function returning an array or a tuple of arrays.
        n (int): Total size.
        stream (RngStream): Parent stream.
        workers (int, optional): Processes. Defaults to 1.
        chunk (int, optional): Block size. Defaults to the configured chunk.
        args (tuple, optional): Extra arguments.

    Returns:
        numpy.ndarray or tuple: Concatenated block results.
    """
    chunk = get_option('chunk') if chunk is None else int(chunk)
    n = int(n)
    if n < 1 or chunk < 1:
        raise ParameterError("Need n >= 1 and chunk >= 1, got {}, {}".format(n, chunk))
    blocks = [
        (function, min(chunk, n - start), stream.substream(i), tuple(args))
        for i, start in enumerate(range(0, n, chunk))
    ]
    if workers and workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=int(workers), initializer=update_config,
                                 initargs=(get_config(),)) as executor:
            results = list(executor.map(_run_block, blocks))
    else:
        results = [_run_block(block) for block in blocks]
    return _concatenate(results)


class RunContext(object):
    """State shared by the steps of one experiment run."""

    def __init__(self, name, seed, params, workers=1):
        self.name = name
        self.seed = int(seed)
        self.params = params
        self.workers = int(workers or 1)
        self.reports = list()
        self.samples = dict()

    def __getitem__(self, key):
        return self.params[key]

    def stream(self, index):
        return RngStream(self.seed, index)

    def replicate(self, function, n, index, *args):
        return replicate(function, n, self.stream(index), self.workers, args=args)

    def add(self, outcome, n, retries=0):
        report = stats.TestReport.from_outcome(self.name, outcome, n, self.seed, retries, self.params)
        self.reports.append(report)
        logger.info("{} {}: {}={:.4g} passed={}".format(
            self.name, report.statistic, report.kind, report.p_value_or_distance, report.passed))
        return report

    def record(self, sample, columns, values):
        """Keep a sample for a sidecar file; values has one column per name."""
        self.samples[sample] = (list(columns), np.column_stack(values))


def run(spec, workers=None, timing=False, samples=None):
    """Run a registered experiment.

    Args:
        spec (ExperimentSpec): What to run.
        workers (int, optional): Processes. Defaults to the configured count.
        timing (bool, optional): Store the wall time on every report. Defaults to False.
        samples (dict, optional): Filled with {sample: (columns, array)} when given.

    Returns:
        list: TestReport instances, with Bonferroni verdicts in their details.
    """
    experiment = get_experiment(spec.name)
    params = spec.resolved_params()
    workers = get_option('workers') if workers is None else workers
    context = RunContext(spec.name, spec.seed, params, workers)
    logger.debug("Running {} with seed {} and {}".format(spec.name, spec.seed, params))
    start = time.time()
    experiment.function(context)
    elapsed = time.time() - start
    if timing:
        for each in context.reports:
            each.wall_time = elapsed
    if samples is not None:
        samples.update(context.samples)
    return stats.bonferroni(context.reports)


# ------------------------------------------------------------------------------
# Sampling blocks, top level so that process pools can pickle them
# ------------------------------------------------------------------------------
def _straddle_block(size, stream, t=1.0):
    return sample_straddles(size, stream, t)


def _zenith_block(size, stream, a, b):
    return poisson.sample_zenith_increments(a, b, size, stream)


def _tau_count_block(size, stream, window, counted):
    g = as_generator(stream)
    counts = np.empty(size)
    marks = list()
    for i in range(size):
        jumps = poisson.sample_tau_window(window[0], window[1], g)
        counts[i] = jumps.count_in(counted[0], counted[1])
        marks.append(jumps.dtau / jumps.r ** 2)
    return counts, np.concatenate(marks)


def _fresh_majorant(g, t_lo, t_hi):
    for attempt in range(11):
        try:
            construction = PoissonMajorant(g)
            construction.cover(t_lo, t_hi)
            return construction
        except ConstructionError as error:
            logger.warning("Majorant restarted: {}".format(error))
    raise ConstructionError("Majorant construction failed on every retry")


def _majorant_times_block(size, stream, times):
    g = as_generator(stream)
    times = np.asarray(times, dtype=float)
    k = np.empty((size, times.size))
    gaps = np.empty((size, times.size))
    for i in range(size):
        construction = _fresh_majorant(g, times[0], times[-1])
        k[i] = construction.skeleton().value_at(times)
        gaps[i] = construction.sample_gaps(times)
    return k, gaps


def _excursion_check_block(size, stream, steps):
    """Worst violations of K - B >= 0 and of B = K at vertices on reconstructed paths."""
    g = as_generator(stream)
    below, vertex = np.empty(size), np.empty(size)
    for i in range(size):
        construction = _fresh_majorant(g, 0.25, 2.0)
        skeleton = construction.skeleton()
        path = poisson.attach_excursions(skeleton, steps, g)
        below[i] = max(0.0, float(np.max(path.values - skeleton.value_at(path.times))))
        at_vertices = poisson.sample_path_at(skeleton, skeleton.times, g)
        vertex[i] = float(np.max(np.abs(at_vertices - skeleton.values)))
    return below, vertex


MeanderBlock = namedtuple('MeanderBlock', ['tilde_end', 'tilde_mid', 'hat_end', 'hat_mid', 'hat_minslope'])


def _meander_block(size, stream, mu, points):
    g = as_generator(stream)
    out = [np.empty(size) for _ in MeanderBlock._fields]
    for i in range(size):
        path = sample_williams_path(mu, points - 1, 8, g)
        result = meanders(path, mu, points)
        out[0][i] = result.tilde.values[-1]
        out[1][i] = result.tilde.value_at(0.5)
        out[2][i] = result.hat.values[-1]
        out[3][i] = result.hat.value_at(0.5)
        out[4][i] = minslope(result.hat)[0]
    return MeanderBlock(*out)


def _bessel_reference_block(size, stream, points):
    """BES(3) from 0 on [0, 1]: endpoint, midpoint and grid minslope."""
    g = as_generator(stream)
    steps = points - 1
    increments = g.standard_normal((size, steps, 3)) * np.sqrt(1.0 / steps)
    radius = np.linalg.norm(np.cumsum(increments, axis=1), axis=2)
    u = np.arange(1, points) / float(steps)
    return radius[:, -1], radius[:, steps // 2 - 1], np.min(radius / u, axis=1)


def _direct_minorant_block(size, stream, mu, t, horizon, steps_per_unit):
    g = as_generator(stream)
    out = [np.empty(size) for _ in range(4)]
    n = int(horizon * steps_per_unit)
    for i in range(size):
        path = sample_bessel(3, 0.0, mu, n, horizon, g)
        info = straddle(convex_minorant(path), t)
        out[0][i], out[1][i], out[2][i], out[3][i] = info.slope, info.gap, info.g, info.d
    return tuple(out)


def _window_minorant_block(size, stream, mu, t):
    g = as_generator(stream)
    out = [np.empty(size) for _ in range(4)]
    for i in range(size):
        info = BesselMinorantWindow(mu, g).straddle(t)
        out[0][i], out[1][i], out[2][i], out[3][i] = info.slope, info.gap, info.g, info.d
    return tuple(out)


def _minorant_count_block(size, stream, mu, low, high):
    g = as_generator(stream)
    counts = np.empty(size)
    outside = np.zeros(size)
    for i in range(size):
        window = BesselMinorantWindow(mu, g)
        # faces with slope below high have c above mu - high
        while window.c_lo >= mu - high:
            window.extend()
        slopes = window.slopes
        counts[i] = np.count_nonzero((slopes > low) & (slopes < high))
        outside[i] = np.count_nonzero((slopes <= 0) | (slopes >= mu))
    return counts, outside


def _direct_minorant_count_block(size, stream, mu, low, high, horizon, steps_per_unit):
    g = as_generator(stream)
    counts = np.empty(size)
    for i in range(size):
        path = sample_bessel(3, 0.0, mu, int(horizon * steps_per_unit), horizon, g)
        slopes = convex_minorant(path).slopes[:-1]
        counts[i] = np.count_nonzero((slopes > low) & (slopes < high))
    return counts


def _grid_majorant_block(size, stream, horizon, steps_per_unit, t):
    g = as_generator(stream)
    out = [np.empty(size) for _ in range(3)]
    for i in range(size):
        path = sample_bm(int(horizon * steps_per_unit), horizon, 0.0, g)
        info = straddle(concave_majorant(path), t)
        out[0][i], out[1][i], out[2][i] = info.slope, info.value, info.gap
    return tuple(out)


def _grid_sigma_block(size, stream, mu, horizon, steps_per_unit):
    g = as_generator(stream)
    sigma, value = np.empty(size), np.empty(size)
    for i in range(size):
        result = sigma_mu(sample_bm(int(horizon * steps_per_unit), horizon, 0.0, g), mu)
        sigma[i], value[i] = result.time, result.value
    return sigma, value


def _bridge_cross_block(size, stream, s, t, a, b, x, y, steps):
    g = as_generator(stream)
    dt = (t - s) / float(steps)
    walk = np.cumsum(g.standard_normal((size, steps)) * np.sqrt(dt), axis=1)
    frac = np.arange(1, steps + 1) / float(steps)
    bridge = x + walk - frac * walk[:, -1:] + frac * (y - x)
    line = a * (s + dt * np.arange(1, steps + 1)) + b - _BARRIER_SHIFT * np.sqrt(dt)
    return np.any(bridge > line, axis=1).astype(float)


def _recursion_block(size, stream, depth):
    return chains.chain_from_recursion(depth, stream, size)


def _extracted_chain_block(size, stream, depth):
    g = as_generator(stream)
    # a low origin leaves the vertices before sigma_1 to the jumps, not the recursion
    window = (np.exp(-(depth + 8.0)), 4.0)
    tau, kappa, rho = (np.empty((size, depth + 1)) for _ in range(3))
    for i in range(size):
        chain = chains.extract_chain(PoissonMajorant(g, window=window), depth, mu=1.0)
        tau[i], kappa[i], rho[i] = zip(*chain)
    return chains.ChainArrays(tau, kappa, rho)


def _qv_block(size, stream, steps):
    g = as_generator(stream)
    times = np.arange(1, steps + 1) / float(steps)
    qv, reference = np.empty(size), np.empty(size)
    for i in range(size):
        construction = _fresh_majorant(g, times[0], times[-1])
        values = construction.skeleton().value_at(times) + construction.sample_gaps(times)
        qv[i] = quadratic_variation(GridPath(0.0, 1.0 / steps, np.concatenate([[0.0], values])))
        reference[i] = quadratic_variation(sample_bessel(5, 0.0, 0.0, steps, 1.0, g))
    return qv, reference


# ------------------------------------------------------------------------------
# Shared helpers
# ------------------------------------------------------------------------------
def _chi_sq_cdf(k):
    return scipy_stats.chi2(k).cdf


def _chi_cdf(k, scale=1.0):
    def cdf(x):
        return dist.chi_cdf(x / scale, k)
    return cdf


def _uniform_cdf(u):
    return np.clip(u, 0.0, 1.0)


def _straddles(ctx, n, index, t=1.0):
    batch = ctx.replicate(_straddle_block, n, index, t)
    retries = int(np.sum(batch.retries))
    if retries:
        logger.warning("{}: {} straddle retries".format(ctx.name, retries))
    return batch, retries


def _gap_scale(t, g, d):
    return np.sqrt((t - g) * (d - t) / (d - g))


def _accept_band(batch, z, band):
    value = batch.k + batch.y
    chosen = np.abs(value - z) <= band
    return chosen, value[chosen]


def band_draws(z, band, accepted):
    """Straddles to draw so that about accepted of them land within band of z.

    2K(1) - B(1) is chi5, so the band holds a fraction F(z + band) - F(z - band)
    of the draws, F the chi5 CDF.

    Raises:
        SetupError: The band has no chi5 mass.

    Returns:
        int
    """
    mass = float(dist.chi_cdf(z + band, 5) - dist.chi_cdf(max(z - band, 0.0), 5))
    if not mass > 0:
        raise SetupError("Band {} around z={} holds no mass".format(band, z))
    return int(np.ceil(accepted / mass))


def _banded_size(ctx, band):
    return ctx['n'] if ctx['n'] is not None else band_draws(ctx['z'], band, ctx['accepted'])


# ------------------------------------------------------------------------------
# Fixed time marginals of the majorant
# ------------------------------------------------------------------------------
def _chi5_marginal(ctx):
    t = ctx['t']
    batch, retries = _straddles(ctx, ctx['n'], 0, t)
    value = batch.k + batch.y
    ctx.record('two_k_minus_b', ['value'], [value])
    outcome = stats.ks_test(value, cdf=_chi_cdf(5, np.sqrt(t)), name='ks 2K-B vs chi5')
    ctx.add(outcome, ctx['n'], retries)


def _exchangeability(ctx):
    n = ctx['n']
    first, retries = _straddles(ctx, n, 0)
    second, more = _straddles(ctx, n, 1)
    pair = np.column_stack([first.k, first.y])
    swapped = np.column_stack([second.y, second.k])
    ctx.record('pair', ['k', 'gap'], [first.k, first.y])
    ctx.add(stats.energy_distance_test(pair, swapped, ctx.stream(2), name='energy (K, K-B) vs swap'),
            n, retries + more)
    ctx.add(stats.ks_test(first.k, other=second.y, name='ks K vs K-B'), n, retries + more)


def _f3_gof(ctx):
    n = ctx['n']
    batch, retries = _straddles(ctx, n, 0)
    samples = np.column_stack([batch.a, batch.intercept, batch.y])
    ctx.record('slope_intercept_gap', ['slope', 'intercept', 'gap'], [batch.a, batch.intercept, batch.y])
    outcome = stats.chi_square_gof(samples, dist.f3_density, [(0.0, 12.0)] * 3, bins=ctx['bins'],
                                   expected_mass=1.0, name='chi2 f3')
    ctx.add(outcome, n, retries)
    mass = dist.tensor_quadrature(dist.f3_density, [(0.0, 12.0)] * 3, ctx['nodes'])
    ctx.add(stats.distance_outcome('quadrature f3 mass', abs(mass - 1.0), 1e-5, mass=mass), 0)


def _f5_mass(nodes):
    """Mass of f5 over (0, 10)^3 for (a, b, y) and the whole range of (1/G_1, D_1).

    With v - 1 = (y/b) e^eta and w - 1 = (y/a) e^xi the integrand decays like
    exp(-b y cosh eta - a y cosh xi); eta and xi are cut where that factor drops
    below exp(-80) relative to its peak and rescaled to (-1, 1).
    """
    def integrand(a, b, y, x1, x2):
        reach_b = np.arccosh(1.0 + 80.0 / (b * y))
        reach_a = np.arccosh(1.0 + 80.0 / (a * y))
        v_shift = y / b * np.exp(reach_b * x1)
        w_shift = y / a * np.exp(reach_a * x2)
        density = dist.f5_density(a, b, y, 1.0 + v_shift, 1.0 + w_shift)
        return density * v_shift * reach_b * w_shift * reach_a

    return dist.tensor_quadrature(integrand, [(0.0, 10.0)] * 3 + [(-1.0, 1.0)] * 2, nodes)


def _d1_from_f5(t, a, b, y, nodes=64):
    """Integral of f5 over 1/G_1 at D_1 = 1 + t, divided by f3."""
    x, weights = np.polynomial.legendre.leggauss(nodes)
    reach = np.arccosh(1.0 + 80.0 / (b * y))
    shift = y / b * np.exp(reach * x)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    density = dist.f5_density(a, b, y, 1.0 + shift[None, :], 1.0 + t[:, None])
    return np.sum(density * shift * reach * weights, axis=1) / dist.f3_density(a, b, y)


def _f5_quadrature(ctx):
    mass = _f5_mass(ctx['nodes'])
    ctx.add(stats.distance_outcome('quadrature f5 mass', abs(mass - 1.0), 1e-4, mass=mass), 0)


def _d1_mixture_consistency(ctx):
    grid = np.linspace(0.05, 6.0, 60)
    worst = 0.0
    for a, b, y in ctx['points']:
        difference = _d1_from_f5(grid, a, b, y) - dist.d1_mixture_density(grid, a, b, y)
        worst = max(worst, float(np.max(np.abs(difference))))
    ctx.add(stats.distance_outcome('sup |int f5 dv / f3 - g|', worst, ctx['tolerance'],
                                   points=ctx['points']), 0)

    n = ctx['n']
    batch, retries = _straddles(ctx, n, 0)
    levels = dist.d1_mixture_cdf(batch.w, batch.a, batch.intercept, batch.y)
    ctx.record('pit_d1', ['slope', 'intercept', 'gap', 'd1_minus_1', 'pit'],
               [batch.a, batch.intercept, batch.y, batch.w, levels])
    ctx.add(stats.ks_test(levels, cdf=_uniform_cdf, name='ks PIT of D1-1 given (a, b, y)'), n, retries)
    cell = np.ones(n, dtype=bool)
    for column in (batch.a, batch.intercept, batch.y):
        lo, hi = np.quantile(column, [0.25, 0.75])
        cell &= (column >= lo) & (column <= hi)
    ctx.add(stats.ks_test(levels[cell], cdf=_uniform_cdf, name='ks PIT of D1-1 in the central cell'),
            int(np.count_nonzero(cell)), retries)


def _time_inversion(ctx):
    n = ctx['n']
    first, retries = _straddles(ctx, n, 0)
    second, more = _straddles(ctx, n, 1)
    # log of the time coordinates, applied alike on both sides
    left = np.column_stack([first.intercept, first.a, first.y, -np.log(first.g), np.log(first.d)])
    right = np.column_stack([second.a, second.intercept, second.y, np.log(second.d), -np.log(second.g)])
    ctx.add(stats.energy_distance_test(left, right, ctx.stream(2), name='energy time inversion 5-tuple'),
            n, retries + more)
    ctx.add(stats.ks_test(first.intercept, other=second.a, name='ks I(1) vs K\'(1)'), n, retries + more)
    ctx.add(stats.ks_test(1.0 / first.g, other=second.d, name='ks 1/G1 vs D1'), n, retries + more)


def _excursion_conditional(ctx):
    n = ctx['n']
    batch, retries = _straddles(ctx, n, 0)
    scaled = batch.y / _gap_scale(1.0, batch.g, batch.d)
    chi3 = _chi_cdf(3)
    ctx.add(stats.ks_test(scaled, cdf=chi3, name='ks scaled gap vs chi3'), n, retries)
    u, v = ctx['cell']
    for width in ctx['bands']:
        chosen = (np.abs(batch.g - u) <= width) & (np.abs(batch.d - v) <= width)
        if np.count_nonzero(chosen) < 20:
            raise SetupError("Band {} around (G1, D1) = ({}, {}) holds too few samples".format(width, u, v))
        ctx.add(stats.ks_test(batch.y[chosen] / _gap_scale(1.0, u, v), cdf=chi3,
                              name='ks gap in band {} vs chi3'.format(width)),
                int(np.count_nonzero(chosen)), retries)
    below, vertex = ctx.replicate(_excursion_check_block, ctx['paths'], 1, ctx['steps'])
    ctx.add(stats.distance_outcome('max (B - K) on reconstructed paths', float(np.max(below)), 1e-9),
            ctx['paths'])
    ctx.add(stats.distance_outcome('max |B - K| at vertices', float(np.max(vertex)), 1e-9), ctx['paths'])


def _grid_poisson_crosscheck(ctx):
    n = ctx['n']
    slope, value, gap = ctx.replicate(_grid_majorant_block, n, 0, ctx['horizon'], ctx['steps_per_unit'], 1.0)
    batch, retries = _straddles(ctx, n, 1)
    grid = np.column_stack([slope, value, gap])
    exact = np.column_stack([batch.a, batch.k, batch.y])
    ctx.record('grid', ['slope', 'value', 'gap'], [slope, value, gap])
    ctx.add(stats.energy_distance_test(grid, exact, ctx.stream(2), name='energy grid vs Poisson at t=1'),
            n, retries)


def _williams_marginals(ctx):
    n, mu = ctx['n'], ctx['mu']
    # sigma_mu from the window origin at 4 mu plus the jumps between slopes 4 mu and mu
    origin, peak = dist.sample_williams(4.0 * mu, ctx.stream(0), size=n)
    ds, dz = poisson.sample_zenith_increments(4.0 * mu, mu, n, ctx.stream(1))
    sigma, value = dist.sample_williams(mu, ctx.stream(2), size=n)
    ctx.add(stats.ks_test(mu * mu * (origin + ds), other=mu * mu * sigma, name='ks mu^2 sigma, jumps'), n)
    ctx.add(stats.ks_test(mu * (peak + dz), other=mu * value, name='ks mu B(sigma), jumps'), n)
    grid_n = ctx['grid_n']
    grid_sigma, grid_value = ctx.replicate(_grid_sigma_block, grid_n, 3, mu, ctx['horizon'],
                                           ctx['steps_per_unit'])
    ctx.add(stats.ks_test(mu * mu * grid_sigma, other=mu * mu * sigma, name='ks mu^2 sigma, grid'), grid_n)
    ctx.add(stats.ks_test(mu * grid_value, other=mu * value, name='ks mu B(sigma), grid'), grid_n)


# ------------------------------------------------------------------------------
# The tau process and the zenith
# ------------------------------------------------------------------------------
def _tau_counts(ctx):
    n = ctx['n']
    counts, marks = ctx.replicate(_tau_count_block, n, 0, (0.5, 2.0 * np.e), (1.0, np.e))
    ctx.add(stats.poisson_count_test(counts, 1.0, name='poisson counts on (1, e)'), n)
    ctx.add(stats.ks_test(marks, cdf=_chi_sq_cdf(1), name='ks dtau / r^2 vs chi1^2'), marks.size)
    narrow = ctx.replicate(_tau_count_block, n, 1, (1.0, 1.0 + ctx['narrow']), (1.0, 1.0 + ctx['narrow']))[0]
    expected = ctx['narrow'] / (1.0 + ctx['narrow'])
    ctx.add(stats.binomial_test(np.count_nonzero(narrow), n, expected, name='jumps in a narrow window'), n)


def _zenith_atom_and_density(ctx):
    n, a, b = ctx['n'], ctx['a'], ctx['b']
    ds, dz = ctx.replicate(_zenith_block, n, 0, a, b)
    atom = ds == 0
    ctx.record('zenith', ['ds', 'dz'], [ds, dz])
    ctx.add(stats.binomial_test(np.count_nonzero(atom), n, b / a, name='atom at (0, 0)'), n)
    ds, dz = ds[~atom], dz[~atom]
    violation = max(np.max(b * ds - dz, initial=0.0), np.max(dz - a * ds, initial=0.0)) / max(1.0, np.max(ds))
    ctx.add(stats.distance_outcome('max support violation', float(violation), 1e-12), n)

    def transformed(w, theta):
        s = w * w
        z = s * (b + (a - b) * 0.5 * (1.0 - np.cos(theta)))
        return dist.zenith_density(a, b, s, z) * 2.0 * w * s * (a - b) * 0.5 * np.sin(theta)

    ratio = np.clip((dz / ds - b) / (a - b), 0.0, 1.0)
    samples = np.column_stack([np.sqrt(ds), np.arccos(1.0 - 2.0 * ratio)])
    reach = ctx['reach']
    outcome = stats.chi_square_gof(samples, transformed, [(0.0, reach), (0.0, np.pi)], bins=ctx['bins'],
                                   expected_mass=1.0 - b / a, name='chi2 zenith density')
    ctx.add(outcome, int(ds.size))
    mass = dist.tensor_quadrature(transformed, [(0.0, reach), (0.0, np.pi)], ctx['nodes'])
    ctx.add(stats.distance_outcome('quadrature zenith mass', abs(mass - (1.0 - b / a)), 1e-4, mass=mass), 0)


# ------------------------------------------------------------------------------
# Convex minorant of BES(3, mu)
# ------------------------------------------------------------------------------
def _bessel_minorant_counts(ctx):
    n, mu, low, high = ctx['n'], ctx['mu'], ctx['low'], ctx['high']
    expected = np.log((mu - low) / (mu - high))
    counts, outside = ctx.replicate(_minorant_count_block, n, 0, mu, low, high)
    ctx.add(stats.poisson_count_test(counts, expected, name='poisson face counts'), n)
    ctx.add(stats.distance_outcome('faces with slope outside (0, mu)', float(np.sum(outside)), 0.0), n)
    direct = ctx.replicate(_direct_minorant_count_block, ctx['direct_n'], 1, mu, low, high,
                           ctx['horizon'], ctx['steps_per_unit'])
    outcome = stats.poisson_count_test(direct, expected, name='poisson face counts, grid minorant')
    ctx.add(stats.report_only(outcome.statistic, outcome.value, **outcome.details), ctx['direct_n'])


def _bessel_cross_construction(ctx):
    n, mu, t = ctx['n'], ctx['mu'], ctx['t']
    direct = ctx.replicate(_direct_minorant_block, n, 0, mu, t, ctx['horizon'], ctx['steps_per_unit'])
    window = ctx.replicate(_window_minorant_block, n, 1, mu, t)
    ctx.record('direct', ['slope', 'gap'], direct[:2])
    ctx.add(stats.energy_distance_test(np.column_stack(direct[:2]), np.column_stack(window[:2]),
                                       ctx.stream(2), name='energy (C\'(t), R(t)-C(t)) direct vs Poisson'), n)


def _table_cdf(grid, table):
    def cdf(x):
        return np.interp(x, grid, table)
    return cdf


def _slope_cdf_table(t, mu, points=801):
    alpha = np.linspace(0.0, mu, points)
    density = poisson.drift_fixed_slope_density(alpha, t, mu)
    table = cumulative_trapezoid(density, alpha, initial=0.0)
    return alpha, table


def _drift_fixed_marginals(ctx):
    n, mu, t = ctx['n'], ctx['mu'], ctx['t']
    alpha, table = _slope_cdf_table(t, mu)
    ctx.add(stats.distance_outcome('slope density mass', abs(table[-1] - 1.0), 1e-3,
                                   mass=float(table[-1])), 0)
    cdf = _table_cdf(alpha, table / table[-1])
    slope, gap, g, d = ctx.replicate(_window_minorant_block, n, 0, mu, t)
    ctx.record('window', ['slope', 'gap', 'g', 'd'], [slope, gap, g, d])
    ctx.add(stats.ks_test(slope, cdf=cdf, name='ks C\'(t), Poisson'), n)
    atom = poisson.drift_fixed_atom_probability(t, mu)
    ctx.add(stats.binomial_test(np.count_nonzero(g == 0), n, atom, name='P(G_t = 0), Poisson'), n)
    direct_n = ctx['direct_n']
    slope, gap, g, d = ctx.replicate(_direct_minorant_block, direct_n, 1, mu, t, ctx['horizon'],
                                     ctx['steps_per_unit'])
    ctx.add(stats.ks_test(slope, cdf=cdf, name='ks C\'(t), grid'), direct_n)
    ctx.add(stats.ks_test(gap / _gap_scale(t, g, d), cdf=_chi_cdf(3),
                          name='ks scaled gap vs chi3, grid'), direct_n)


# ------------------------------------------------------------------------------
# Vertex chains
# ------------------------------------------------------------------------------
def _ratio(chain, column, index):
    return getattr(chain, column)[:, index] / np.sqrt(chain.tau[:, index])


def _tau_rho_stationarity(ctx):
    n, depth = ctx['n'], ctx['depth']
    first = ctx.replicate(_recursion_block, n, 0, depth)
    second = ctx.replicate(_recursion_block, n, 1, depth)
    ctx.add(stats.ks_test(_ratio(first, 'rho', 0), other=_ratio(second, 'rho', depth),
                          name='ks rho/sqrt(tau) at 0 vs {}'.format(depth)), n)
    extracted_n = ctx['extracted_n']
    extracted = ctx.replicate(_extracted_chain_block, extracted_n, 2, depth)
    ctx.add(stats.ks_test(_ratio(extracted, 'rho', 1), other=_ratio(first, 'rho', 1),
                          name='ks rho1/sqrt(tau1), extracted vs recursion'), extracted_n)
    u, q = chains.recursion_innovations(extracted)
    ctx.add(stats.ks_test(u.ravel(), cdf=_uniform_cdf, name='ks innovation U vs uniform'), u.size)
    ctx.add(stats.ks_test(q.ravel(), cdf=_chi_sq_cdf(1), name='ks innovation Q vs chi1^2'), q.size)


def _kappa_stationarity(ctx):
    n, depth = ctx['n'], ctx['depth']
    first = ctx.replicate(_recursion_block, n, 0, depth)
    second = ctx.replicate(_recursion_block, n, 1, depth)
    ctx.add(stats.ks_test(_ratio(first, 'kappa', 0), other=_ratio(second, 'kappa', depth),
                          name='ks kappa/sqrt(tau) at 0 vs {}'.format(depth)), n)
    extracted_n = ctx['extracted_n']
    extracted = ctx.replicate(_extracted_chain_block, extracted_n, 2, depth)
    ctx.add(stats.ks_test(_ratio(extracted, 'kappa', depth), other=_ratio(first, 'kappa', 0),
                          name='ks kappa/sqrt(tau), extracted at {} vs 0'.format(depth)), extracted_n)
    increasing = np.count_nonzero(np.diff(extracted.rho, axis=1) >= 0)
    ctx.add(stats.distance_outcome('rho steps that do not decrease', float(increasing), 0.0), extracted_n)
    faces = (np.diff(extracted.kappa, axis=1) / np.diff(extracted.tau, axis=1))[:, -1]
    sticks = chains.stick_breaking_slopes(depth, ctx.stream(3), size=extracted_n)[:, -1]
    name = 'ks log slope of face {}, extracted vs stick breaking'.format(depth)
    ctx.add(stats.ks_test(np.log(faces), other=np.log(sticks), name=name), extracted_n)
    diagnostic = chains.kappa_markov_diagnostic(first, step=min(2, depth - 1))
    ctx.add(stats.report_only('kappa Markov diagnostic', diagnostic['max_spread'], **diagnostic), n)


def _log_tuple(values):
    # t, r and q span decades
    return np.column_stack([np.log(values[0]), np.log(values[1]), np.log(values[2]), values[3]])


def _map_preservation(ctx):
    n = ctx['n']
    before = chains.sample_map_law(n, ctx.stream(0))
    after = chains.theorem_map(*before)
    fresh = chains.sample_map_law(n, ctx.stream(1))
    for label, mapped, reference in zip(('t', 'r', 'q', 'u'), after, fresh):
        ctx.add(stats.ks_test(mapped, other=reference, name='ks mapped {} vs fresh'.format(label)), n)
    g = as_generator(ctx.stream(2))
    pairs = ctx['pairs']
    left = np.column_stack(chains.sample_map_law(pairs, g))
    right = np.column_stack(chains.sample_map_law(pairs, g))
    images = np.column_stack(chains.theorem_map(*left.T)) - np.column_stack(chains.theorem_map(*right.T))
    closest = float(np.min(np.max(np.abs(images), axis=1)))
    outcome = stats.energy_distance_test(_log_tuple(after), _log_tuple(fresh), ctx.stream(3),
                                         name='energy mapped 4-tuple vs fresh')
    outcome.details['min_pair_image_distance'] = closest
    ctx.add(outcome, n)


# ------------------------------------------------------------------------------
# Meanders
# ------------------------------------------------------------------------------
def _meander_samples(ctx):
    n, points = ctx['n'], ctx['points']
    sample = ctx.replicate(_meander_block, n, 0, ctx['mu'], points)
    reference = ctx.replicate(_bessel_reference_block, n, 1, points)
    return sample, reference


def _test_functions():
    return (('x', lambda x: x), ('exp(-x)', lambda x: np.exp(-x)))


def _meander_rn_tilde(ctx):
    n = ctx['n']
    sample, (end, middle, _) = _meander_samples(ctx)
    weights = dist.tilde_rn(end)
    ctx.add(stats.mean_test(weights, 1.0, name='mean tilde RN weight'), n)
    for label, f in _test_functions():
        ctx.add(stats.weighted_mean_check(f(sample.tilde_end), f(end), weights,
                                          name='E f(tilde(1)), f={}'.format(label)), n)
        ctx.add(stats.weighted_mean_check(f(sample.tilde_mid), f(middle), weights,
                                          name='E f(tilde(1/2)), f={}'.format(label)), n)


def _meander_rn_hat(ctx):
    n = ctx['n']
    sample, (end, middle, lowest) = _meander_samples(ctx)
    weights = dist.hat_rn(lowest, end)
    ctx.add(stats.mean_test(weights, 1.0, name='mean hat RN weight'), n)
    for label, f in _test_functions():
        ctx.add(stats.weighted_mean_check(f(sample.hat_minslope), f(lowest), weights,
                                          name='E f(minslope of hat), f={}'.format(label)), n)
        ctx.add(stats.weighted_mean_check(f(sample.hat_mid), f(middle), weights,
                                          name='E f(hat(1/2)), f={}'.format(label)), n)


def _meander_marginals(ctx):
    n = ctx['n']
    sample = ctx.replicate(_meander_block, n, 0, ctx['mu'], ctx['points'])
    ctx.record('meander', list(MeanderBlock._fields), list(sample))
    ctx.add(stats.ks_test(sample.tilde_end, cdf=dist.tilde_meander_cdf, name='ks tilde(1) vs 4x tail(x)'), n)
    ctx.add(stats.ks_test(sample.hat_end, cdf=_chi_cdf(3), name='ks hat(1) vs chi3'), n)
    ctx.add(stats.ks_test(sample.hat_minslope / sample.hat_end, cdf=lambda x: np.clip(x, 0.0, 1.0) ** 2,
                          name='ks minslope/hat(1) vs beta(2,1)'), n)
    grid = np.linspace(0.0, 8.0, 161)
    integrated = cumulative_trapezoid(dist.tilde_meander_density(np.linspace(0.0, 8.0, 16001)),
                                      np.linspace(0.0, 8.0, 16001), initial=0.0)[::100]
    worst = float(np.max(np.abs(integrated - dist.tilde_meander_cdf(grid))))
    ctx.add(stats.distance_outcome('sup |CDF - integrated density| of tilde(1)', worst, 1e-6), 0)


# ------------------------------------------------------------------------------
# Five-dimensional Bessel comparisons
# ------------------------------------------------------------------------------
def conjecture_suite(times, n, seed=None, workers=1, scale=2.0):
    """Compare 2K - B at several times with BES(5) from 0 at the same times.

    Per-time KS tests and the Brownian scaling check carry pass semantics; the
    pairwise joint comparisons are recorded as report-only evidence.

    Args:
        times (list): Positive sorted times.
        n (int): Samples.
        seed (int, optional): Defaults to get_seed().
        workers (int, optional): Processes. Defaults to 1.
        scale (float, optional): c of the scaling check c^2 t vs c value(t). Defaults to 2.

    Returns:
        list: TestReport instances.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ParameterError("Times must be positive and increasing, got {}".format(times))
    seed = get_seed() if seed is None else seed
    ctx = RunContext('conjecture_marginals', seed, {'times': times.tolist(), 'n': n}, workers)
    k, gaps = ctx.replicate(_majorant_times_block, n, 0, times)
    value = k + gaps
    reference = sample_bessel_at(5, times, ctx.stream(1), n)
    k_scaled, gaps_scaled = ctx.replicate(_majorant_times_block, n, 2, scale * scale * times)
    for i, t in enumerate(times):
        ctx.add(stats.ks_test(value[:, i], cdf=_chi_cdf(5, np.sqrt(t)),
                              name='ks 2K-B at t={:g} vs BES5'.format(t)), n)
        ctx.add(stats.ks_test((k_scaled[:, i] + gaps_scaled[:, i]) / scale, other=value[:, i],
                              name='ks scaling at t={:g}'.format(t)), n)
    for i in range(len(times)):
        for j in range(i + 1, len(times)):
            name = 'energy pair ({:g}, {:g}) vs BES5'.format(times[i], times[j])
            outcome = stats.energy_distance_test(value[:, [i, j]], reference[:, [i, j]],
                                                 ctx.stream(3 + i * 16 + j), name=name)
            ctx.add(stats.report_only(outcome.statistic, outcome.value, **outcome.details), n)
    return ctx.reports


def _conjecture_marginals(ctx):
    ctx.reports.extend(conjecture_suite(ctx['times'], ctx['n'], ctx.seed, ctx.workers))


def _conjecture_qv(ctx):
    n = ctx['n']
    qv, reference = ctx.replicate(_qv_block, n, 0, ctx['steps'])
    ctx.record('qv', ['two_k_minus_b', 'bes5'], [qv, reference])
    mean = float(np.mean(qv))
    ctx.add(stats.distance_outcome('relative error of mean QV of 2K-B on [0, 1]', abs(mean - 1.0), 0.02,
                                   mean=mean), n)
    ctx.add(stats.report_only('mean QV of BES5 on [0, 1]', float(np.mean(reference))), n)


# ------------------------------------------------------------------------------
# Generator of 2K - B
# ------------------------------------------------------------------------------
def _bump(name, z):
    if name == 'gauss' or name == 'shifted_gauss':
        center = z if name == 'gauss' else z + 0.5

        def value(x):
            return np.exp(-(x - center) ** 2)

        def first(x):
            return -2.0 * (x - center) * value(x)

        def second(x):
            return (4.0 * (x - center) ** 2 - 2.0) * value(x)

        return Bump(value, first, second)
    if name == 'compact':
        def value(x):
            r = np.clip(x - z, -1.0, 1.0)
            return (1.0 - r * r) ** 3

        def first(x):
            r = np.clip(x - z, -1.0, 1.0)
            return -6.0 * r * (1.0 - r * r) ** 2

        def second(x):
            r = np.clip(x - z, -1.0, 1.0)
            return -6.0 * (1.0 - r * r) ** 2 + 24.0 * r * r * (1.0 - r * r)

        return Bump(value, first, second)
    raise ParameterError("Unknown bump '{}'. Valid bumps: {}".format(name, ", ".join(BUMPS)))


def _accepted_states(ctx, n, z, band, index):
    batch, retries = _straddles(ctx, n, index)
    chosen, value = _accept_band(batch, z, band)
    if np.count_nonzero(chosen) < 100:
        raise SetupError("Band {} around z={} accepted {} samples, too narrow".format(
            band, z, np.count_nonzero(chosen)))
    return batch, chosen, value, retries


def _check_generator_inputs(z, h):
    if not z > 0:
        raise ParameterError("z must be positive, got {}".format(z))
    if not 1e-4 <= h <= 1e-2:
        raise ParameterError("h must lie in [1e-4, 1e-2], got {}".format(h))


def _generator_outcome(batch, chosen, value, h, test_fn, z, ctx, index):
    bump = _bump(test_fn, z)
    after = psi_step_batch(batch.a[chosen], batch.k[chosen], batch.y[chosen], batch.w[chosen], h,
                           ctx.stream(index))
    moved = after.k + after.y
    estimate = (bump.value(moved) - bump.value(value)) / h
    target = dist.bes5_generator(bump.first(value), bump.second(value), value)
    difference = estimate - target
    error = float(np.std(difference, ddof=1) / np.sqrt(difference.size))
    mean_target = float(np.mean(target))
    tolerance = max(0.05 * abs(mean_target), 3.0 * error)
    return stats.distance_outcome(
        'generator of {} at z={:g}, h={:g}'.format(test_fn, z, h), abs(float(np.mean(difference))), tolerance,
        estimate=float(np.mean(estimate)), target=mean_target, stderr=error,
    )


def generator_check(z, h, test_fn, n, seed=None, band=0.02, workers=1):
    """Finite difference estimate of the generator of 2K - B at z against the BES(5)
    generator (2/z) f' + f''/2.

    Straddles at t = 1 with 2K(1) - B(1) within band of z are moved by h with the
    exact psi step; each accepted sample is compared with the generator at its own
    value of 2K(1) - B(1).

    Args:
        z (float): Level > 0.
        h (float): Step in [1e-4, 1e-2].
        test_fn (str): One of BUMPS.
        n (int): Straddles drawn before acceptance.
        seed (int, optional): Defaults to get_seed().
        band (float, optional): Half width of the acceptance band. Defaults to 0.02.
        workers (int, optional): Processes. Defaults to 1.

    Raises:
        SetupError: Fewer than 100 samples in the band.

    Returns:
        TestReport
    """
    _check_generator_inputs(z, h)
    _bump(test_fn, z)
    seed = get_seed() if seed is None else seed
    params = {'z': z, 'h': h, 'test_fn': test_fn, 'n': n, 'band': band}
    ctx = RunContext('generator_check', seed, params, workers)
    batch, chosen, value, retries = _accepted_states(ctx, n, z, band, 0)
    outcome = _generator_outcome(batch, chosen, value, h, test_fn, z, ctx, 1)
    return ctx.add(outcome, int(np.count_nonzero(chosen)), retries)


def _generator_check(ctx):
    z, h, band = ctx['z'], ctx['h'], ctx['band']
    _check_generator_inputs(z, h)
    batch, chosen, value, retries = _accepted_states(ctx, _banded_size(ctx, band), z, band, 0)
    accepted = int(np.count_nonzero(chosen))
    levels = dist.slope_given_z_cdf(batch.a[chosen], value)
    ctx.add(stats.ks_test(levels, cdf=_uniform_cdf, name='ks PIT of K\'(1) given 2K-B'), accepted, retries)
    levels = dist.gap_given_z_cdf(batch.y[chosen], value)
    ctx.add(stats.ks_test(levels, cdf=_uniform_cdf, name='ks PIT of K(1)-B(1) given 2K-B'), accepted, retries)
    for i, test_fn in enumerate(ctx['bumps']):
        ctx.add(_generator_outcome(batch, chosen, value, h, test_fn, z, ctx, 1 + i), accepted, retries)


def _conditional_moments(ctx):
    z = ctx['z']
    # the narrowest band sets the draw count
    batch, retries = _straddles(ctx, _banded_size(ctx, min(ctx['bands'])), 0)
    means = dict()
    for width in ctx['bands']:
        chosen, value = _accept_band(batch, z, width)
        accepted = int(np.count_nonzero(chosen))
        if accepted < 100:
            raise SetupError("Band {} around z={} accepted {} samples, too narrow".format(width, z, accepted))
        slope = ctx.add(stats.mean_test(batch.a[chosen] - value / 4.0, 0.0,
                                        name='E[K\'(1) - z/4 | 2K-B in band {}]'.format(width)),
                        accepted, retries)
        inverse = ctx.add(stats.mean_test(1.0 / batch.y[chosen] - 3.0 / value, 0.0,
                                          name='E[1/(K-B) - 3/z | 2K-B in band {}]'.format(width)),
                          accepted, retries)
        means[width] = (slope.details['mean'], inverse.details['mean'])
    widths = sorted(means)
    for report in ctx.reports:
        report.details['band_means'] = {str(w): means[w] for w in widths}


def _psi_scaling_consistency(ctx):
    n, delta = ctx['n'], ctx['delta']
    start, retries = _straddles(ctx, n, 0, 1.0)
    evolved = psi_step_batch(start.a, start.k, start.y, start.w, delta, ctx.stream(1))
    direct, more = _straddles(ctx, n, 2, 1.0 + delta)
    ctx.add(stats.ks_test(evolved.a, other=direct.a, name='ks K\' evolved vs direct'), n, retries + more)
    ctx.add(stats.ks_test(evolved.y, other=direct.y, name='ks K-B evolved vs direct'), n, retries + more)
    root = np.sqrt(1.0 + delta)
    rescaled, again = _straddles(ctx, n, 3, 1.0)
    ctx.add(stats.ks_test(evolved.k, other=rescaled.k * root, name='ks K evolved vs scaled K(1)'),
            n, retries + again)
    ctx.add(stats.energy_distance_test(
        np.column_stack([evolved.a, evolved.k, evolved.y, np.log(evolved.w)]),
        np.column_stack([direct.a, direct.k, direct.y, np.log(direct.w)]),
        ctx.stream(4), name='energy evolved state vs direct'), n, retries + more)


def _bridge_line_mc(ctx):
    n = ctx['n']
    s, t, a, b, x, y = ctx['s'], ctx['t'], ctx['a'], ctx['b'], ctx['x'], ctx['y']
    exact = dist.bridge_crossing_prob(s, t, a, b, x, y)
    hits = ctx.replicate(_bridge_cross_block, n, 0, s, t, a, b, x, y, ctx['steps'])
    ctx.add(stats.binomial_test(float(np.sum(hits)), n, exact, name='bridge crossing frequency'), n)


def _size_biased_ig(ctx):
    n, mu, y = ctx['n'], ctx['mu'], ctx['y']
    distance = dist.check_size_biased_decomposition(mu, y)
    ctx.add(stats.distance_outcome('size-biased decomposition', distance, 1e-6), 0)
    biased = dist.sample_ig(mu, y, True, ctx.stream(0), size=n)
    plain = dist.sample_ig(mu, y, False, ctx.stream(1), size=n)
    ctx.add(stats.ks_test(biased, cdf=lambda t: dist.ig_cdf(mu, y, t, size_biased=True),
                          name='ks size-biased IG'), n)
    ctx.add(stats.ks_test(plain, cdf=lambda t: dist.ig_cdf(mu, y, t), name='ks IG'), n)


# ------------------------------------------------------------------------------
# Built-in registry
# ------------------------------------------------------------------------------
def _register_builtins():
    add_experiment('chi5_marginal', _chi5_marginal, "2K(t) - B(t) is sqrt(t) chi5", n=200000, t=1.0)
    add_experiment('exchangeability', _exchangeability, "(K(1), K(1) - B(1)) is exchangeable", n=4000)
    add_experiment('f3_gof', _f3_gof, "(K'(1), I(1), K(1) - B(1)) has density f3", n=100000, bins=4, nodes=48)
    add_experiment('f5_quadrature', _f5_quadrature, "f5 integrates to 1", nodes=32)
    add_experiment('d1_mixture_consistency', _d1_mixture_consistency,
                   "D1 - 1 given (K'(1), I(1), K(1) - B(1)) is the inverse Gaussian mixture",
                   n=100000, tolerance=1e-5, points=[[0.5, 0.5, 0.5], [1.0, 0.3, 0.8], [0.2, 1.5, 0.4]])
    add_experiment('tau_counts', _tau_counts, "jumps of tau form a Poisson process of intensity dr/r",
                   n=50000, narrow=1e-3)
    add_experiment('excursion_conditional', _excursion_conditional,
                   "given (G1, D1) the gap K(1) - B(1) is a scaled chi3",
                   n=100000, cell=[0.3, 2.0], bands=[0.05, 0.1], paths=200, steps=4096)
    add_experiment('zenith_atom_and_density', _zenith_atom_and_density,
                   "zenith increments have an atom b/a at (0, 0) and density h",
                   n=100000, a=2.0, b=1.0, bins=5, nodes=64, reach=8.0)
    add_experiment('bessel_minorant_counts', _bessel_minorant_counts,
                   "faces of the BES(3, mu) minorant are Poisson in log(mu - alpha)",
                   n=20000, mu=2.0, low=0.5, high=1.5, direct_n=1000, horizon=64.0, steps_per_unit=256)
    add_experiment('bessel_cross_construction', _bessel_cross_construction,
                   "direct and Poissonian BES(3, mu) minorants agree at t",
                   n=2000, mu=2.0, t=1.0, horizon=32.0, steps_per_unit=512)
    add_experiment('drift_fixed_marginals', _drift_fixed_marginals,
                   "slope, atom and gap of the BES(3, mu) minorant at t",
                   n=20000, mu=2.0, t=1.0, direct_n=1000, horizon=32.0, steps_per_unit=512)
    add_experiment('tau_rho_stationarity', _tau_rho_stationarity,
                   "rho_n / sqrt(tau_n) is stationary and the chain follows the (tau, rho) recursion",
                   n=100000, depth=8, extracted_n=5000)
    add_experiment('kappa_stationarity', _kappa_stationarity, "kappa_n / sqrt(tau_n) is stationary",
                   n=100000, depth=5, extracted_n=5000)
    add_experiment('map_preservation', _map_preservation, "the vertex map preserves its law",
                   n=100000, pairs=10000)
    add_experiment('meander_rn_tilde', _meander_rn_tilde,
                   "the drift-corrected meander has density 2 M(x)/x against BES(3)",
                   n=200000, mu=1.0, points=1025)
    add_experiment('meander_rn_hat', _meander_rn_hat,
                   "the meander has density 2 minslope/endpoint against BES(3)",
                   n=200000, mu=1.0, points=1025)
    add_experiment('meander_marginals', _meander_marginals, "meander endpoints and minslope ratio",
                   n=20000, mu=1.0, points=1025)
    add_experiment('conjecture_marginals', _conjecture_marginals, "2K - B against BES(5) at several times",
                   n=20000, times=[0.5, 1.0, 2.0])
    add_experiment('conjecture_qv', _conjecture_qv, "quadratic variation of 2K - B on [0, 1]",
                   n=200, steps=16384)
    add_experiment('generator_check', _generator_check, "the generator of 2K - B is the BES(5) generator",
                   n=None, accepted=100000, z=2.0, h=1e-3, band=0.02, bumps=list(BUMPS))
    add_experiment('psi_scaling_consistency', _psi_scaling_consistency,
                   "psi steps from t = 1 match straddles at 1 + delta", n=20000, delta=1.0)
    add_experiment('bridge_line_mc', _bridge_line_mc, "crossing probability of a line by a Brownian bridge",
                   n=20000, s=0.5, t=1.5, a=0.3, b=0.5, x=0.2, y=0.4, steps=2000)
    add_experiment('time_inversion', _time_inversion,
                   "(I, K', K-B, 1/G1, D1) and (K', I, K-B, D1, 1/G1) agree in law at t = 1", n=4000)
    add_experiment('grid_poisson_crosscheck', _grid_poisson_crosscheck,
                   "grid majorants match the Poisson construction at t = 1",
                   n=1000, horizon=64.0, steps_per_unit=16384)
    add_experiment('williams_marginals', _williams_marginals, "sigma_mu follows the Williams marginals",
                   n=100000, mu=1.0, grid_n=1000, horizon=64.0, steps_per_unit=1024)
    add_experiment('conditional_moments', _conditional_moments,
                   "E[K'(1) | 2K-B = z] = z/4 and E[1/(K-B) | 2K-B = z] = 3/z",
                   n=None, accepted=100000, z=2.0, bands=[0.02, 0.04])
    add_experiment('size_biased_ig', _size_biased_ig, "the size-biased inverse Gaussian decomposition",
                   n=100000, mu=1.0, y=1.0)


_register_builtins()
