"""Interference-channel estimation lab.

Exact and quadrature MMSE/mutual-information computation for scalar inputs
over AWGN, the capacity-achieving-code phase-transition profile, effective
SNR and corner points of the two-user Gaussian interference channel, and a
finite-blocklength Monte Carlo simulator with exact posterior decoding.
"""

from .dists import (
    Discrete,
    Gaussian,
    Mixture,
    RandomStream,
    ScalarDistribution,
    bpsk,
    entropy_discrete,
    from_dict,
    mean,
    named,
    pam,
    sample,
    sample_array,
    to_dict,
    variance,
)
from .errors import CapError, ConvergenceError, GiclabError, NumericOverflowError
from .immse import (
    CurveSample,
    GoodCodeProfile,
    good_code_consistency,
    good_code_mi,
    good_code_mmse,
    good_code_mmse_jump,
    max_trace_mmse_spectrum,
    mutual_information,
    verify_immse,
)
from .interference import (
    InterferenceParams,
    RatePair,
    chain_rule_check,
    corner_point_mixed,
    corner_point_z,
    corner_points_weak,
    corner_report,
    effective_snr,
    interference_mi,
    interference_mi_derivative,
    mmse_w,
    tin_optimal_b_interval,
    zero_mmse_threshold,
)
from .mmse import (
    MonteCarloEstimate,
    QuadratureSpec,
    conditional_mean,
    log_marginal_density,
    mmse,
    mmse_monte_carlo,
)
from .simulator import (
    Codebook,
    EstimatorReport,
    JointSample,
    empirical_covariance_trace,
    empirical_mmse_x,
    estimator_gap,
    orthogonality_residual,
    posterior,
    posterior_mean,
    random_gaussian_codebook,
    w_decomposition,
)

__version__ = "0.1.0"
