"""Randomization test for the high-dimensional two-sample Behrens-Fisher problem.

The test statistic is the Chen-Qin statistic ``T_CQ``; its null distribution
is approximated by Rademacher sign flips of pairwise-differenced observations.
Competing procedures, population-level oracles and a simulation harness are
included.
"""
from .competitors import (
    Chi2Params,
    chi2_critical_value,
    chi2_params,
    chi2_params_from_psi_hat,
    chi2_test,
    cq_test,
    empirical_bootstrap_test,
    wild_bootstrap_test,
)
from .core_stats import (
    DifferencedSample,
    GramCache,
    build_gram,
    difference_transform,
    gram_from_data,
    t_bs_statistic,
    t_cq_differenced,
    t_cq_statistic,
)
from .covariance import Covariance
from .io import CsvSpec, load_group, write_matrix
from .kernels import BACKEND
from .models import ModelSpec, calibrate_shift, gamma_kappas, generate, psi_spec
from .randomization import (
    SignVector,
    conditional_sd,
    randomization_quantile,
    randomization_test,
    randomized_draws,
    randomized_statistic,
)
from .results import DegenerateDataError, Method, TestResult
from .rng import RngSeed
from .simulation import (
    ExperimentReport,
    null_standardized_draws,
    qq_pairs,
    resampled_null_sizes,
    roc_curve,
    run_power_experiment,
    run_size_experiment,
)
from .theory import (
    PsiSpec,
    gn_cdf,
    local_power_predict,
    mixture_limit_sample,
    psi_eigenvalues,
    psi_matrix,
    reference_qf_sample,
    sigma_oracle,
)

__version__ = "0.1.0"
