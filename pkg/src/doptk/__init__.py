"""D-optimal sensor placement for Gaussian process regression.

Selects k sensor locations out of n candidates by column subset selection
on the kernel covariance matrix, scores selections by expected information
gain, and evaluates the theoretical bounds that certify selection quality.
"""

from .bounds import (
    BoundReport,
    bound_report,
    greedy_ratio,
    nystrom_eigenvalue_lower_bounds,
    score_bounds_exact,
    score_lower_greedy_cholesky,
    score_lower_sketched,
    score_lower_worstcase,
    score_upper,
    sketch_deviation_gamma,
)
from .gp import (
    GPPosterior,
    d_optimality,
    hyperparameter_sweep,
    log_marginal_likelihood_dense,
    log_marginal_likelihood_lowrank,
    posterior,
    relative_error,
    relative_error_unnormalized,
    score_selection,
)
from .kernels import (
    EUCLIDEAN_SE,
    GREAT_CIRCLE_SE,
    CovarianceOperator,
    KernelSpec,
    assemble_covariance,
    covariance_column,
    covariance_diag,
    kernel_eval,
    matvec,
)
from .linalg import EigDecomposition, PivotedQR, chol_append, eigh, qr_column_pivoted, thin_svd
from .nystrom import LowRankFactor, RandomizedBasis, cholesky_greedy, cholesky_rp, nystrom_from_sketch, nystrom_randomized
from .points import (
    PointSet,
    grid1d,
    latin_hypercube,
    load_points_csv,
    load_values_csv,
    save_points_csv,
    save_values_csv,
    sum_of_gaussians_1d,
    zhou_function,
)
from .select import (
    BaselineHistogram,
    SelectionResult,
    gks_core,
    random_baseline,
    select_brute_force,
    select_cholesky_gks,
    select_conceptual_gks,
    select_greedy_efficient,
    select_greedy_naive,
    select_nysgks,
    select_random,
)

__version__ = "0.1.0"
