# coding=utf-8

__version__ = '0.3.0'

from cmlab.distributions import RngStream  # noqa: E402,F401
from cmlab.paths import GridPath  # noqa: E402,F401
from cmlab.geometry import (  # noqa: E402,F401
    concave_majorant, convex_minorant, straddle, sigma_mu, minslope, meanders
)
from cmlab.poisson import PoissonMajorant, BesselMinorantWindow, sample_straddles, psi_step  # noqa: E402,F401
from cmlab.chains import tau_rho_step, theorem_map, extract_chain  # noqa: E402,F401
from cmlab.stats import TestReport, save_reports, load_reports  # noqa: E402,F401
from cmlab.experiments import (  # noqa: E402,F401
    add_experiment, remove_experiment, has_experiment, reset_experiments,
    get_experiment, get_experiments, ExperimentSpec, run, generator_check, conjecture_suite
)
