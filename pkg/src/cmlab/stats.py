# coding=utf-8
from __future__ import absolute_import, print_function

import os
import subprocess
from collections import namedtuple

import numpy as np
from scipy import stats as scipy_stats
from scipy.spatial.distance import cdist

from cmlab import __version__
from cmlab.serialize import Serializable, save_objects, load_objects
from cmlab.config import get_option
from cmlab.distributions import as_generator, tensor_quadrature
from cmlab.logger import logger
from cmlab.error import InputError, SetupError, ParameterError

Outcome = namedtuple('Outcome', ['statistic', 'value', 'threshold', 'passed', 'kind', 'details'])

KINDS = ('p_value', 'distance', 'z_score', 'report_only')
Z_THRESHOLD = 3.0
KS_MIN_SAMPLES = 20
MIN_PERMUTATIONS = 100
MIN_COUNTS = 1000

_BUILD = dict()


def _git_describe():
    try:
        result = subprocess.run(
            ['git', 'describe', '--tags', '--long', '--always', '--dirty'],
            cwd=os.path.dirname(os.path.abspath(__file__)), stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, universal_newlines=True, check=False,
        )
    except OSError:
        return None
    text = (result.stdout or '').strip()
    if result.returncode != 0 or not text:
        return None
    if '-g' in text:
        return text
    # no tag to describe from, only the commit
    return '{}-g{}'.format(__version__, text)


def build_version():
    """Version of the running code in git describe form, e.g. 0.3.0-4-g1a2b3c4-dirty.

    Falls back to the package version outside a git checkout. Read once per process.
    """
    if 'version' not in _BUILD:
        _BUILD['version'] = _git_describe() or __version__
    return _BUILD['version']


class TestReport(Serializable):
    """Verdict of one statistical check.

    Args:
        ``experiment`` (str): Experiment name.

        ``n`` (int): Sample size.

        ``seed`` (int): Seed of the run.

        ``statistic`` (str): Name of the test and what it looked at.

        ``p_value_or_distance`` (float): p-value, distance or |z| depending on kind.

        ``threshold`` (float): alpha, tolerance or z threshold.

        ``passed`` (bool): Verdict, True for report-only entries.

        ``kind`` (str, optional): One of p_value, distance, z_score, report_only.
        Defaults to 'p_value'.

        ``retries`` (int, optional): Construction retries behind the sample. Defaults to 0.

        ``details`` (dict, optional): Free-form extras. Defaults to None.

        ``params`` (dict, optional): Experiment parameters. Defaults to None.

        ``wall_time`` (float, optional): Seconds, serialized only when set. Defaults to None.

        ``version`` (str, optional): Build that produced the report. Defaults to
        build_version().
    """
    __test__ = False

    def __init__(self, experiment, n, seed, statistic, p_value_or_distance, threshold, passed,
                 kind='p_value', retries=0, details=None, params=None, wall_time=None, version=None):
        super(TestReport, self).__init__()
        if kind not in KINDS:
            raise ParameterError("Unknown report kind {}, use one of {}".format(kind, KINDS))
        self.experiment = experiment
        self.n = int(n)
        self.seed = seed
        self.statistic = statistic
        self.p_value_or_distance = float(p_value_or_distance)
        self.threshold = float(threshold)
        self.passed = bool(passed)
        self.kind = kind
        self.retries = int(retries)
        self.details = details or dict()
        self.params = params or dict()
        self.wall_time = wall_time
        self.version = version or build_version()

    @classmethod
    def from_outcome(cls, experiment, outcome, n, seed, retries=0, params=None):
        return cls(
            experiment, n, seed, outcome.statistic, outcome.value, outcome.threshold, outcome.passed,
            kind=outcome.kind, retries=retries, details=dict(outcome.details), params=params,
        )

    def data(self):
        retval = super(TestReport, self).data()
        if retval.get('wall_time') is None:
            retval.pop('wall_time', None)
        return retval

    def __repr__(self):
        return "TestReport({}: {} {}={:.4g} threshold={:.4g} passed={})".format(
            self.experiment, self.statistic, self.kind, self.p_value_or_distance, self.threshold, self.passed
        )


def save_reports(reports, filepath):
    """Saves given reports to disk as a JSON array.

    Args:
        reports (list): TestReport instances.
        filepath (str): Destination file.

    Returns:
        str: Written file path.
    """
    logger.debug("Saving {} reports to {}".format(len(reports), filepath))
    return save_objects(reports, filepath)


def load_reports(filepath):
    """Loads reports written by save_reports().

    Returns:
        list: TestReport instances.
    """
    return load_objects(TestReport, filepath)


def _alpha(alpha):
    return get_option('alpha') if alpha is None else float(alpha)


def _sample(values, minimum=2):
    values = np.asarray(values, dtype=float)
    if values.shape[0] < minimum:
        raise InputError("Need at least {} samples, got {}".format(minimum, values.shape[0]))
    if not np.all(np.isfinite(values)):
        raise InputError("Samples must be finite")
    return values


def p_value_outcome(statistic, p_value, alpha=None, **details):
    alpha = _alpha(alpha)
    return Outcome(statistic, float(p_value), alpha, bool(p_value >= alpha), 'p_value', details)


def distance_outcome(statistic, distance, tolerance, **details):
    passed = bool(distance <= tolerance)
    return Outcome(statistic, float(distance), float(tolerance), passed, 'distance', details)


def z_outcome(statistic, z, /, threshold=Z_THRESHOLD, **details):
    z = float(np.max(np.abs(z)))
    return Outcome(statistic, z, float(threshold), bool(z <= threshold), 'z_score', details)


def report_only(statistic, value, **details):
    return Outcome(statistic, float(value), float('nan'), True, 'report_only', details)


# ------------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ------------------------------------------------------------------------------
def ks_test(sample, cdf=None, other=None, alpha=None, n_eff=None, name='ks'):
    """One-sample test against a CDF or two-sample test against another sample.

    The p-value is read from the asymptotic Kolmogorov law at sqrt(n_eff) D, with
    n_eff = n for one sample and n m / (n + m) for two.

    Args:
        sample (array): Sample.
        cdf (callable, optional): Vectorized CDF for the one-sample test.
        other (array, optional): Second sample for the two-sample test.
        alpha (float, optional): Level. Defaults to the configured alpha.
        n_eff (float, optional): Effective size, e.g. for dependent samples.
        name (str, optional): Statistic name. Defaults to 'ks'.

    Raises:
        InputError: Neither or both of cdf and other, or fewer than 20 samples.

    Returns:
        Outcome
    """
    if (cdf is None) == (other is None):
        raise InputError("Give exactly one of cdf and other")
    sample = np.sort(_sample(sample, KS_MIN_SAMPLES))
    n = sample.size
    if cdf is not None:
        levels = np.asarray(cdf(sample), dtype=float)
        above = np.arange(1, n + 1) / float(n) - levels
        below = levels - np.arange(n) / float(n)
        statistic = float(max(above.max(), below.max()))
        n_eff = n if n_eff is None else n_eff
    else:
        other = _sample(other, KS_MIN_SAMPLES)
        statistic = float(scipy_stats.ks_2samp(sample, other).statistic)
        n_eff = n * other.size / float(n + other.size) if n_eff is None else n_eff
    p_value = float(scipy_stats.kstwobign.sf(np.sqrt(n_eff) * statistic))
    return p_value_outcome(name, p_value, alpha, D=statistic, n_eff=float(n_eff))


# ------------------------------------------------------------------------------
# Chi-square goodness of fit
# ------------------------------------------------------------------------------
def _quantile_edges(column, bins, lo, hi):
    inner = np.quantile(column, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    inner = np.clip(inner, lo, hi)
    return np.unique(np.concatenate([[lo], inner, [hi]]))


def _merge_cells(observed, expected, min_expected):
    order = np.argsort(expected, kind='stable')
    merged_o, merged_e = list(), list()
    acc_o, acc_e = 0.0, 0.0
    for i in order:
        acc_o += observed[i]
        acc_e += expected[i]
        if acc_e >= min_expected:
            merged_o.append(acc_o)
            merged_e.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0 or acc_o > 0:
        if merged_e:
            merged_o[-1] += acc_o
            merged_e[-1] += acc_e
        else:
            merged_o.append(acc_o)
            merged_e.append(acc_e)
    return np.array(merged_o), np.array(merged_e)


def chi_square_gof(samples, density, support, bins=4, nodes=8, min_expected=5.0, expected_mass=None,
                   mass_tol=1e-2, alpha=None, name='chi2'):
    """Chi-square goodness of fit of d-dimensional samples to a density.

    Bins are cut at the marginal sample quantiles inside the support box, the
    probability of every cell is computed by tensor Gauss-Legendre quadrature and
    renormalized over the box, and cells with low expected counts are merged.
    Samples outside the box are dropped.

    Args:
        samples (array): Shape (n, d).
        density (callable): Vectorized density taking d arrays.
        support (list): [(lo, hi), ...] finite box per dimension.
        bins (int, optional): Bins per dimension. Defaults to 4.
        nodes (int, optional): Quadrature nodes per dimension and cell. Defaults to 8.
        min_expected (float, optional): Smallest expected count of a merged cell.
        expected_mass (float, optional): Mass the density should put on the box.
        mass_tol (float, optional): Allowed deviation from expected_mass.
        alpha (float, optional): Level. Defaults to the configured alpha.

    Raises:
        SetupError: The density has no usable mass on the box, or not the expected one.

    Returns:
        Outcome
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 1 and samples.shape[1] > 1 and len(support) == 1:
        samples = samples.T
    dims = samples.shape[1]
    if len(support) != dims:
        raise InputError("Support has {} dimensions, samples have {}".format(len(support), dims))
    inside = np.ones(samples.shape[0], dtype=bool)
    for d, (lo, hi) in enumerate(support):
        inside &= (samples[:, d] >= lo) & (samples[:, d] <= hi)
    samples = _sample(samples[inside], minimum=bins ** dims)

    edges = [_quantile_edges(samples[:, d], bins, lo, hi) for d, (lo, hi) in enumerate(support)]
    shape = tuple(len(e) - 1 for e in edges)
    observed = np.zeros(shape)
    cells = tuple(
        np.clip(np.searchsorted(e, samples[:, d], side='right') - 1, 0, len(e) - 2)
        for d, e in enumerate(edges)
    )
    np.add.at(observed, cells, 1.0)

    probability = np.zeros(shape)
    for index in np.ndindex(*shape):
        bounds = [(edges[d][i], edges[d][i + 1]) for d, i in enumerate(index)]
        probability[index] = tensor_quadrature(density, bounds, nodes)
    mass = float(np.sum(probability))
    if not np.isfinite(mass) or mass <= 0:
        raise SetupError("Density has no mass on the binned region, got {}".format(mass))
    if expected_mass is not None and abs(mass - expected_mass) > mass_tol:
        raise SetupError(
            "Density mass on the binned region is {:.6g}, expected {:.6g}".format(mass, expected_mass)
        )
    n = samples.shape[0]
    merged_o, merged_e = _merge_cells(observed.ravel(), n * probability.ravel() / mass, min_expected)
    if merged_e.size < 2:
        raise SetupError("Fewer than 2 cells left after merging")
    statistic = float(np.sum((merged_o - merged_e) ** 2 / merged_e))
    dof = merged_e.size - 1
    p_value = float(scipy_stats.chi2.sf(statistic, dof))
    return p_value_outcome(name, p_value, alpha, chi2=statistic, dof=dof, cells=int(merged_e.size),
                           mass=mass, dropped=int(np.count_nonzero(~inside)))


# ------------------------------------------------------------------------------
# Energy distance
# ------------------------------------------------------------------------------
def _subsample(values, cap, g):
    if values.shape[0] <= cap:
        return values
    return values[g.choice(values.shape[0], cap, replace=False)]


def _distance_matrix(points, block=1024):
    size = points.shape[0]
    matrix = np.empty((size, size), dtype=np.float32)
    for start in range(0, size, block):
        matrix[start:start + block] = cdist(points[start:start + block], points).astype(np.float32)
    return matrix


def energy_distance_test(x, y, rng, permutations=None, subsample=None, standardize=True, alpha=None,
                         name='energy'):
    """Two-sample energy distance permutation test.

    With s the signed label vector (1/n on x, -1/m on y) and D the pooled distance
    matrix, the V-statistic is -s^T D s; permuted label vectors are evaluated
    together as one matrix product.

    Args:
        x (array): Shape (n, d) or (n,).
        y (array): Shape (m, d) or (m,).
        rng (RngStream): Stream for subsampling and permutations.
        permutations (int, optional): Defaults to the configured count.
        subsample (int, optional): Cap per sample. Defaults to the configured cap.
        standardize (bool, optional): Scale each coordinate by its pooled standard
            deviation. Defaults to True.
        alpha (float, optional): Level. Defaults to the configured alpha.

    Raises:
        InputError: Fewer than 100 permutations, or samples of different dimension.

    Returns:
        Outcome: p = (1 + #{permuted >= observed}) / (1 + permutations).
    """
    g = as_generator(rng)
    permutations = get_option('permutations') if permutations is None else int(permutations)
    if permutations < MIN_PERMUTATIONS:
        raise InputError("Need at least {} permutations, got {}".format(MIN_PERMUTATIONS, permutations))
    cap = get_option('energy_subsample') if subsample is None else int(subsample)
    x = _sample(x).reshape(len(x), -1)
    y = _sample(y).reshape(len(y), -1)
    if x.shape[1] != y.shape[1]:
        raise InputError("Samples differ in dimension: {} and {}".format(x.shape[1], y.shape[1]))
    x = _subsample(x, cap, g)
    y = _subsample(y, cap, g)
    pooled = np.concatenate([x, y])
    if standardize:
        scale = pooled.std(axis=0)
        pooled = pooled / np.where(scale > 0, scale, 1.0)
    n, m = x.shape[0], y.shape[0]
    matrix = _distance_matrix(pooled)
    labels = np.concatenate([np.full(n, 1.0 / n), np.full(m, -1.0 / m)]).astype(np.float32)
    observed = -float(labels @ (matrix @ labels))
    shuffled = np.stack([g.permutation(labels) for _ in range(permutations)], axis=1)
    permuted = -np.sum(shuffled * (matrix @ shuffled), axis=0)
    # float32 rounding can split exact ties
    exceed = int(np.count_nonzero(permuted >= observed - 1e-6 * abs(observed)))
    p_value = (1.0 + exceed) / (1.0 + permutations)
    scaled = observed * n * m / float(n + m)
    return p_value_outcome(name, p_value, alpha, energy=scaled, n=n, m=m, permutations=permutations)


# ------------------------------------------------------------------------------
# z tests
# ------------------------------------------------------------------------------
def poisson_count_test(counts, lam, threshold=Z_THRESHOLD, name='poisson_counts'):
    """Mean and dispersion of counts against Poisson(lam).

    The mean z uses sd sqrt(lam / n); the dispersion z compares var / lam with 1
    using sd sqrt((1/lam + 2) / n).

    Raises:
        InputError: Fewer than 1000 counts.
        ParameterError: lam <= 0.
    """
    counts = _sample(counts, MIN_COUNTS)
    if not lam > 0:
        raise ParameterError("Poisson mean must be positive, got {}".format(lam))
    n = counts.size
    mean = float(np.mean(counts))
    variance = float(np.var(counts, ddof=1))
    z_mean = (mean - lam) / np.sqrt(lam / n)
    z_disp = (variance / lam - 1.0) / np.sqrt((1.0 / lam + 2.0) / n)
    return z_outcome(name, [z_mean, z_disp], threshold, mean=mean, variance=variance, expected=lam,
                     z_mean=float(z_mean), z_dispersion=float(z_disp))


def mean_test(values, expected, threshold=Z_THRESHOLD, name='mean'):
    """z test of a sample mean against a known constant."""
    values = _sample(values)
    mean = float(np.mean(values))
    error = float(np.std(values, ddof=1) / np.sqrt(values.size))
    if not error > 0:
        raise InputError("Sample has no spread")
    z = (mean - expected) / error
    return z_outcome(name, z, threshold, mean=mean, expected=float(expected), stderr=error, z=float(z))


def binomial_test(successes, n, p, threshold=Z_THRESHOLD, name='binomial'):
    """z test of a proportion successes / n against p."""
    if not 0 < p < 1:
        raise ParameterError("Probability must lie in (0, 1), got {}".format(p))
    if n < 1:
        raise InputError("Need at least one trial")
    z = (successes - n * p) / np.sqrt(n * p * (1.0 - p))
    return z_outcome(name, z, threshold, proportion=successes / float(n), expected=float(p), z=float(z))


def weighted_mean_check(direct, weighted, weights, threshold=Z_THRESHOLD, name='weighted_mean'):
    """Compare mean(direct) with mean(weighted * weights), a change of measure check,
    using a pooled standard error.

    Args:
        direct (array): f evaluated on samples of the target law.
        weighted (array): f evaluated on samples of the reference law.
        weights (array): Density ratio of target to reference on those samples.

    Raises:
        InputError: Degenerate weights.
    """
    direct = _sample(direct)
    weighted = _sample(weighted)
    weights = _sample(weights)
    if weights.shape != weighted.shape:
        raise InputError("Weights and weighted values differ in shape")
    if np.any(weights < 0) or not np.any(weights > 0):
        raise InputError("Weights must be non negative and not all zero")
    product = weighted * weights
    left, right = float(np.mean(direct)), float(np.mean(product))
    error = np.sqrt(np.var(direct, ddof=1) / direct.size + np.var(product, ddof=1) / product.size)
    z = (left - right) / error
    return z_outcome(name, z, threshold, direct=left, weighted=right, stderr=float(error), z=float(z),
                     mean_weight=float(np.mean(weights)))


# ------------------------------------------------------------------------------
# Many tests
# ------------------------------------------------------------------------------
def uniformity_meta_test(p_values, alpha=None, name='p_uniformity'):
    """KS test of p-values against the uniform law."""
    return ks_test(p_values, cdf=lambda v: np.clip(v, 0.0, 1.0), alpha=alpha, name=name)


def bonferroni(reports, alpha=None):
    """Add Bonferroni adjusted verdicts of the p-value reports to their details.

    Returns:
        list: The same reports.
    """
    alpha = _alpha(alpha)
    tested = [each for each in reports if each.kind == 'p_value']
    if not tested:
        return reports
    level = alpha / len(tested)
    for each in tested:
        each.details['bonferroni_level'] = level
        each.details['bonferroni_passed'] = bool(each.p_value_or_distance > level)
    return reports
