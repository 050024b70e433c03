"""Stationary-process simulation and Riccati-based parameter estimation.

Simulate AR(1)/ARMA(1,q) and mean-reverting diffusion models, estimate
matrix autocovariances, build the coefficients of the associated symmetric
continuous-type algebraic Riccati equation, solve it for the unique PSD
parameter matrix, and validate consistency and the linear structure of the
limiting distribution by Monte Carlo.
"""

from .autocov import AutocovSeq, max_deviation, sample_autocov, sample_autocov_sampled
from .asymptotics import (
    L1Operator,
    MonteCarloLimit,
    StackedCovError,
    build_l1,
    build_l1_continuous,
    monte_carlo_limit,
    stack_autocov_errors,
    transpose_permutation,
    verify_l1_identity,
)
from .estimation import (
    DegeneracyReport,
    EstimateResult,
    default_horizon,
    degeneracy_check,
    estimate_continuous,
    estimate_continuous_from_autocov,
    estimate_discrete,
    estimate_discrete_from_autocov,
    implied_increment_autocov,
    implied_increment_autocov_continuous,
    recover_drift,
    univariate_drift,
    univariate_quadratic_roots,
)
from .estimators import DriftEstimator, LampertiTransform, MeanReversionEstimator
from .linalg import (
    DefinitenessReport,
    SymEig,
    definiteness,
    expm_sym,
    logm_spd,
    spectral_norm,
    sym_eig,
    vec,
    unvec,
)
from .processes import (
    ModelSpec,
    NoisePath,
    Path,
    fractional_gaussian_noise,
    lamperti_forward,
    lamperti_inverse,
    noise_variance,
    ou_autocov,
    ou_stationary_cov,
    ou_step_cov,
    recover_noise,
    reconstruct_from_noise,
    series_autocov,
    simulate,
    simulate_ou,
    simulate_var1,
    simulate_varma,
    var1_autocov,
)
from .riccati import (
    CareCoefficients,
    CareSolution,
    CareSolverError,
    build_coeffs_continuous,
    build_coeffs_discrete,
    care_residual,
    newton_refine,
    solve_care,
)
from .rng import stream

__version__ = "0.1.0"
