# coding=utf-8
from __future__ import absolute_import, print_function

from collections import namedtuple

import numpy as np

from cmlab.config import get_option
from cmlab.distributions import as_generator
from cmlab.geometry import MajorantSkeleton, concave_majorant
from cmlab.logger import logger
from cmlab.error import ParameterError, CoverageError, InputError

ChainState = namedtuple('ChainState', ['tau', 'kappa', 'rho'])
ChainArrays = namedtuple('ChainArrays', ['tau', 'kappa', 'rho'])


def _check_positive(**values):
    for name, value in values.items():
        if not np.all(np.asarray(value) > 0):
            raise ParameterError("{} must be positive, got {}".format(name, value))


def tau_rho_step(tau, rho, rng, u=None, z=None):
    """One step of the (tau, rho) recursion.

    rho' = U rho and tau' = tau rho'^2 / (tau Z^2 + rho'^2) with U uniform and Z
    standard normal, both fresh unless given.

    Args:
        tau (float): Vertex time > 0.
        rho (float): Intercept > 0.
        rng (RngStream): Random stream.
        u (float, optional): Uniform to use. Defaults to None.
        z (float, optional): Normal to use. Defaults to None.

    Returns:
        tuple: (tau', rho')
    """
    _check_positive(tau=tau, rho=rho)
    if u is None or z is None:
        g = as_generator(rng)
        u = 1.0 - g.random() if u is None else u
        z = g.standard_normal() if z is None else z
    if not 0 < u <= 1:
        raise ParameterError("Uniform must lie in (0, 1], got {}".format(u))
    rho_next = u * rho
    tau_next = tau * rho_next * rho_next / (tau * z * z + rho_next * rho_next)
    return tau_next, rho_next


def step_vertex(state, rng, u=None, z=None):
    """Next vertex of the majorant below state.

    The face above the new vertex lies on the line through (tau, kappa) with
    intercept rho', so kappa' = rho' + s tau' with s = (kappa - rho') / tau.

    Returns:
        ChainState
    """
    tau_next, rho_next = tau_rho_step(state.tau, state.rho, rng, u, z)
    slope = (state.kappa - rho_next) / state.tau
    return ChainState(tau_next, rho_next + slope * tau_next, rho_next)


def theorem_map(t, r, q, u):
    """The law preserving map (t, r, q, u) -> (t', r', q', u') of the vertex chain:

        t' = u^2 (t + q)
        r' = u (1 - u) (t + q) + u r
        q' = r^2 q / (t (t + q))
        u' = r / (r + (1 - u)(t + q))

    Args:
        t, r, q (float or array): Positive.
        u (float or array): In (0, 1).

    Raises:
        ParameterError: Input outside the domain.

    Returns:
        tuple: Four floats or arrays.
    """
    t, r, q, u = (np.asarray(v, dtype=float) for v in (t, r, q, u))
    _check_positive(t=t, r=r, q=q)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ParameterError("u must lie in (0, 1)")
    total = t + q
    out = (
        u * u * total,
        u * (1.0 - u) * total + u * r,
        r * r * q / (t * total),
        r / (r + (1.0 - u) * total),
    )
    if all(v.ndim == 0 for v in (t, r, q, u)):
        return tuple(float(v) for v in out)
    return out


def sample_map_law(n, rng):
    """n draws of (chi3^2 beta^2, chi3^2 beta (1 - beta), chi1^2, U), beta ~ Beta(1, 2),
    the law of (tau_0, rho_0, Q, U) the map preserves.

    Returns:
        tuple: Four arrays.
    """
    g = as_generator(rng)
    radius = g.chisquare(3, n)
    beta = g.beta(1.0, 2.0, n)
    return radius * beta * beta, radius * beta * (1.0 - beta), g.chisquare(1, n), g.random(n)


def chain_from_recursion(depth, rng, size=None):
    """Vertices before sigma_1 built by the recursion from the exact first vertex
    (sigma_1, B(sigma_1)) with rho_0 = B(sigma_1) - sigma_1.

    Args:
        depth (int): Number of steps m.
        rng (RngStream): Random stream.
        size (int, optional): Number of independent chains. Defaults to None,
            a single chain as a list of ChainState.

    Returns:
        list or ChainArrays: Arrays of shape (size, depth + 1) when size is given.
    """
    if int(depth) != depth or depth < 0:
        raise ParameterError("Depth must be a non negative integer, got {}".format(depth))
    g = as_generator(rng)
    rows = 1 if size is None else int(size)
    radius = g.chisquare(3, rows)
    beta = g.beta(1.0, 2.0, rows)
    tau = np.empty((rows, depth + 1))
    kappa = np.empty((rows, depth + 1))
    rho = np.empty((rows, depth + 1))
    tau[:, 0] = radius * beta * beta
    kappa[:, 0] = radius * beta
    rho[:, 0] = kappa[:, 0] - tau[:, 0]
    for n in range(depth):
        u = 1.0 - g.random(rows)
        z = g.standard_normal(rows)
        rho[:, n + 1] = u * rho[:, n]
        tau[:, n + 1] = tau[:, n] * rho[:, n + 1] ** 2 / (tau[:, n] * z * z + rho[:, n + 1] ** 2)
        slope = (kappa[:, n] - rho[:, n + 1]) / tau[:, n]
        kappa[:, n + 1] = rho[:, n + 1] + slope * tau[:, n + 1]
    if size is None:
        return [ChainState(float(a), float(b), float(c)) for a, b, c in zip(tau[0], kappa[0], rho[0])]
    return ChainArrays(tau, kappa, rho)


def _as_arrays(chain):
    if isinstance(chain, ChainArrays):
        return chain
    if len(chain) < 2:
        raise InputError("A chain needs at least 2 states, got {}".format(len(chain)))
    values = np.array([list(state) for state in chain], dtype=float)
    return ChainArrays(values[None, :, 0], values[None, :, 1], values[None, :, 2])


def extract_chain(source, depth=None, mu=1.0):
    """Vertices of the concave majorant before sigma_mu, walking back from sigma_mu.

    Args:
        source (PoissonMajorant, MajorantSkeleton or GridPath): A lazily built
            majorant is grown as needed; a skeleton or a grid path must already
            hold the vertices, its first vertex not counting as one.
        depth (int, optional): Number of vertices m below sigma_mu. Defaults to
            the configured chain depth.
        mu (float, optional): Slope. Defaults to 1.

    Raises:
        CoverageError: The source does not reach depth vertices below sigma_mu.

    Returns:
        list: ChainState for n = 0..m, with rho_0 = kappa_0 - mu tau_0.
    """
    depth = get_option('chain_depth') if depth is None else int(depth)
    _check_positive(mu=mu)
    if hasattr(source, 'cover_chain'):
        source.cover_chain(mu, depth)
        skeleton, lowest = source.skeleton(), 0
    else:
        skeleton = source if isinstance(source, MajorantSkeleton) else concave_majorant(source)
        lowest = 1
    slopes = skeleton.slopes
    top = int(np.count_nonzero(slopes > mu))
    if top == len(slopes):
        raise CoverageError(
            "sigma_{} lies beyond the span {}; extend the window up".format(mu, skeleton.span)
        )
    missing = lowest + depth - top
    if missing > 0:
        raise CoverageError(
            "Chain of depth {} needs {} more vertices below sigma_{}; extend the window down "
            "by a factor of about e^{}".format(depth, missing, mu, missing)
        )
    times, values = skeleton.times, skeleton.values
    chain = list()
    for n in range(depth + 1):
        i = top - n
        slope = mu if n == 0 else slopes[i]
        chain.append(ChainState(float(times[i]), float(values[i]), float(values[i] - slope * times[i])))
    return chain


def recursion_innovations(chain):
    """(U_{n+1}, Q_{n+1}) with rho_{n+1} = U rho_n and
    rho_{n+1}^2 / tau_{n+1} = Q + U^2 rho_n^2 / tau_n.

    Args:
        chain (list or ChainArrays): Chain(s).

    Returns:
        tuple: (u, q) arrays of shape (chains, depth).
    """
    tau, _, rho = _as_arrays(chain)
    u = rho[:, 1:] / rho[:, :-1]
    q = rho[:, 1:] ** 2 / tau[:, 1:] - u * u * rho[:, :-1] ** 2 / tau[:, :-1]
    return u, q


def stick_breaking_slopes(depth, rng, size=None):
    """Slopes M_n = 1 / (U_1 ... U_n) > 1 of the faces before sigma_1, n = 1..depth.

    Returns:
        numpy.ndarray: Shape (depth,), or (size, depth) when size is given.
    """
    g = as_generator(rng)
    rows = 1 if size is None else int(size)
    slopes = 1.0 / np.cumprod(1.0 - g.random((rows, int(depth))), axis=1)
    return slopes[0] if size is None else slopes


def kappa_markov_diagnostic(chains, step=2, bins=4):
    """Conditional means of kappa_{n+1}/sqrt(tau_{n+1}) given binned kappa_n/sqrt(tau_n)
    and kappa_{n-1}/sqrt(tau_{n-1}). Report only; a Markov sequence would show the
    same mean across the older history bins.

    Args:
        chains (ChainArrays): At least step + 2 states per chain.
        step (int, optional): n. Defaults to 2.
        bins (int, optional): Quantile bins per coordinate. Defaults to 4.

    Returns:
        dict: means (bins x bins list, None for empty cells), counts and the
        largest spread of means along the older coordinate.
    """
    tau, kappa, _ = _as_arrays(chains)
    if tau.shape[1] < step + 2 or step < 1:
        raise InputError("Chains too short for step {}".format(step))
    ratio = kappa / np.sqrt(tau)
    older, current, following = ratio[:, step - 1], ratio[:, step], ratio[:, step + 1]
    edges = np.linspace(0.0, 1.0, bins + 1)[1:-1]
    older_bin = np.searchsorted(np.quantile(older, edges), older)
    current_bin = np.searchsorted(np.quantile(current, edges), current)
    means = [[None] * bins for _ in range(bins)]
    counts = [[0] * bins for _ in range(bins)]
    spread = 0.0
    for i in range(bins):
        row = list()
        for j in range(bins):
            chosen = (current_bin == i) & (older_bin == j)
            counts[i][j] = int(np.count_nonzero(chosen))
            if counts[i][j]:
                means[i][j] = float(np.mean(following[chosen]))
                row.append(means[i][j])
        if len(row) > 1:
            spread = max(spread, max(row) - min(row))
    logger.info("Kappa diagnostic at step {}: largest spread of conditional means {:.4g}".format(
        step, spread))
    return {'step': step, 'bins': bins, 'means': means, 'counts': counts, 'max_spread': spread}
