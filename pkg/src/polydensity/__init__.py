"""Learning univariate densities with piecewise polynomials fitted by LP and DP."""

from .discrete import DiscretePmf, continuize, discretize, learn_discrete, make_discrete_target
from .empirical import (
    EmpiricalDistribution,
    IntervalPartition,
    approximately_equal_partition,
    conditional_sampler,
    empirical_from_samples,
    find_heavy,
    make_rng,
)
from .errors import *  # noqa: F401,F403
from .learner import (
    LpOptions,
    SinglePolyFit,
    dp_bruteforce_oracle,
    dp_segment,
    find_single_polynomial,
    learn_mixture,
    learn_piecewise_poly,
    learn_wb_piecewise_poly,
    learn_wb_single_poly,
)
from .lp import LinearProgram, LpSolution, LpStatus, solve
from .poly import (
    ChebPoly,
    PiecewisePolynomial,
    SignedMeasureDiff,
    ak_distance,
    cheb_antiderivative,
    cheb_eval,
    domain_map,
    inverse_domain_map,
    mixture_flatten,
    piece_integral,
    sample_pp,
    tv_distance_density,
    tv_distance_pp,
)
from .zoo import (
    TargetDistribution,
    approximate_gaussian,
    decompose_log_concave,
    make_hard_instance,
    make_target,
    target_from_spec,
)

__version__ = "0.1.0"
