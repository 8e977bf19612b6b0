"""Gaussian-process scoring and prediction.

Everything here is written around Cholesky solves of shifted covariance
blocks; explicit inverses never appear, and log-determinants are sums of
log-diagonals of triangular factors so they cannot overflow for n in the
thousands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .kernels import CovarianceOperator, KernelSpec, assemble_covariance, as_operator
from .nystrom import LowRankFactor, cholesky_rp
from .points import PointSet

__all__ = [
    "GPPosterior",
    "d_optimality",
    "score_selection",
    "posterior",
    "relative_error",
    "relative_error_unnormalized",
    "log_marginal_likelihood_dense",
    "log_marginal_likelihood_lowrank",
    "hyperparameter_sweep",
]


def _chol_logdet(L: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def d_optimality(K11: np.ndarray, eta: float) -> float:
    """Expected-information-gain score logdet(I + eta^-2 K11) of a selected block.

    Computed from the Cholesky factor of the shifted matrix. Raises
    ``numpy.linalg.LinAlgError`` when I + eta^-2 K11 is not positive
    definite, which for a genuine covariance block signals corrupt input.
    """
    K11 = np.asarray(K11, dtype=float)
    if K11.ndim != 2 or K11.shape[0] != K11.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K11.shape}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    k = K11.shape[0]
    scale = max(1.0, float(np.max(np.abs(K11)))) if k else 1.0
    if k and not np.allclose(K11, K11.T, atol=1e-8 * scale, rtol=0.0):
        raise ValueError("K11 is not symmetric")
    L = np.linalg.cholesky(np.eye(k) + K11 / eta**2)
    return _chol_logdet(L)


def score_selection(K_or_op, indices, eta: float) -> float:
    """Score a set of candidate indices with the shared D-optimality path."""
    indices = np.asarray(indices, dtype=int)
    return d_optimality(as_operator(K_or_op).submatrix(indices), eta)


@dataclass(frozen=True)
class GPPosterior:
    """Posterior over the unselected candidates given noisy observations.

    ``mean`` and ``cov_diag`` always cover the targets in ``target_indices``
    order (ascending original index); ``cov`` is filled only when the full
    matrix was requested.
    """

    mean: np.ndarray
    cov_diag: np.ndarray
    target_indices: np.ndarray
    cov: np.ndarray | None = None


def posterior(K: np.ndarray, selected, y, eta: float, want_full_cov: bool = False) -> GPPosterior:
    """Condition the zero-mean GP prior on observations at the selected indices.

    mean = K21 (K11 + eta^2 I)^{-1} y and
    cov = K22 - K21 (K11 + eta^2 I)^{-1} K21^T, evaluated with Cholesky
    solves. With ``want_full_cov=False`` only the covariance diagonal is
    formed, which keeps the cost at O(k^2 (n-k)).
    """
    K = np.asarray(K, dtype=float)
    selected = np.asarray(selected, dtype=int)
    y = np.asarray(y, dtype=float)
    n = K.shape[0]
    k = selected.shape[0]
    if len(np.unique(selected)) != k:
        raise ValueError("selected indices must be distinct")
    if y.shape != (k,):
        raise ValueError(f"y must have length {k}, got shape {y.shape}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")

    mask = np.ones(n, dtype=bool)
    mask[selected] = False
    targets = np.flatnonzero(mask)

    K11 = K[np.ix_(selected, selected)]
    K12 = K[np.ix_(selected, targets)]
    L = np.linalg.cholesky(K11 + eta**2 * np.eye(k))
    W = solve_triangular(L, K12, lower=True)
    z = solve_triangular(L, y, lower=True)

    mean = W.T @ z
    cov_diag = K[targets, targets] - np.einsum("ij,ij->j", W, W)
    cov = None
    if want_full_cov:
        cov = K[np.ix_(targets, targets)] - W.T @ W
        cov = 0.5 * (cov + cov.T)
        cov_diag = np.diag(cov).copy()
    return GPPosterior(mean=mean, cov_diag=cov_diag, target_indices=targets, cov=cov)


def relative_error(predicted, truth) -> float:
    """Euclidean relative reconstruction error ||predicted - truth|| / ||truth||."""
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0.0:
        raise ValueError("relative error undefined: truth has zero norm")
    return float(np.linalg.norm(predicted - truth) / denom)


def relative_error_unnormalized(predicted, truth, mu) -> float:
    """Relative error against the mean-removed truth: ||predicted - truth|| / ||truth - mu||."""
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if not (predicted.shape == truth.shape == mu.shape):
        raise ValueError(f"shape mismatch: {predicted.shape}, {truth.shape}, {mu.shape}")
    denom = np.linalg.norm(truth - mu)
    if denom == 0.0:
        raise ValueError("unnormalized relative error undefined: truth equals the reference mean")
    return float(np.linalg.norm(predicted - truth) / denom)


def log_marginal_likelihood_dense(K: np.ndarray, y, eta: float) -> float:
    """Evidence of observations y under the GP prior plus iid noise.

    -1/2 y^T (K + eta^2 I)^{-1} y - 1/2 logdet(K + eta^2 I) - n/2 log(2 pi).
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = K.shape[0]
    if y.shape != (n,):
        raise ValueError(f"y must have length {n}, got shape {y.shape}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    L = np.linalg.cholesky(K + eta**2 * np.eye(n))
    alpha = solve_triangular(L, y, lower=True)
    return float(-0.5 * (alpha @ alpha) - 0.5 * _chol_logdet(L) - 0.5 * n * np.log(2.0 * np.pi))


def log_marginal_likelihood_lowrank(F, y, eta: float) -> float:
    """Evidence under the low-rank surrogate F F^T in place of K.

    Uses the matrix inversion and determinant updates for low-rank-plus-
    diagonal matrices, so the cost is O(n r^2) for an n-by-r factor:

    * logdet(F F^T + eta^2 I) = 2 n log(eta) + logdet(I_r + eta^-2 F^T F)
    * (F F^T + eta^2 I)^{-1} y = eta^-2 [y - F (eta^2 I_r + F^T F)^{-1} F^T y]
    """
    if isinstance(F, LowRankFactor):
        F = F.F
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    n, r = F.shape
    if y.shape != (n,):
        raise ValueError(f"y must have length {n}, got shape {y.shape}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")

    G = F.T @ F
    G = 0.5 * (G + G.T)
    L = np.linalg.cholesky(eta**2 * np.eye(r) + G)
    logdet = 2.0 * n * np.log(eta) + _chol_logdet(L) - 2.0 * r * np.log(eta)
    Fty = F.T @ y
    w = solve_triangular(L, Fty, lower=True)
    quad = (y @ y - w @ w) / eta**2
    return float(-0.5 * quad - 0.5 * logdet - 0.5 * n * np.log(2.0 * np.pi))


def hyperparameter_sweep(
    points: PointSet,
    y,
    family: str,
    sigma_grid,
    ell_grid,
    eta: float,
    approx_rank: int | None = None,
    seed=0,
    dense_cap: int = 4000,
):
    """Grid search of (sigma_f, ell) by log marginal likelihood.

    Evaluates every pair on the grid and returns the argmax spec together
    with the full table (rows follow ``sigma_grid``, columns ``ell_grid``).
    Ties keep the first cell in row-major order. For n up to ``dense_cap``
    with ``approx_rank`` unset the dense evidence is used; otherwise each
    cell builds a rank-``approx_rank`` random pivoted Cholesky factor (with
    a per-cell derived seed) and uses the low-rank evidence.
    """
    sigma_grid = list(sigma_grid)
    ell_grid = list(ell_grid)
    if not sigma_grid or not ell_grid:
        raise ValueError("hyperparameter grids must be non-empty")
    y = np.asarray(y, dtype=float)
    if y.shape != (points.n,):
        raise ValueError(f"y must have length {points.n}, got shape {y.shape}")

    use_dense = approx_rank is None
    if use_dense and points.n > dense_cap:
        raise ValueError(f"n = {points.n} exceeds the dense cap {dense_cap}; pass approx_rank to use the low-rank path")

    seed = int(seed)
    table = np.empty((len(sigma_grid), len(ell_grid)))
    best_val = -np.inf
    best_spec = None
    for i, sigma_f in enumerate(sigma_grid):
        for j, ell in enumerate(ell_grid):
            spec = KernelSpec(family=family, sigma_f=float(sigma_f), ell=float(ell), eta=float(eta))
            if use_dense:
                val = log_marginal_likelihood_dense(assemble_covariance(spec, points), y, eta)
            else:
                op = CovarianceOperator(spec, points)
                factor = cholesky_rp(op.column, op.diag(), approx_rank, seed=seed + i * len(ell_grid) + j)
                val = log_marginal_likelihood_lowrank(factor, y, eta)
            table[i, j] = val
            if val > best_val:
                best_val = val
                best_spec = spec
    return best_spec, table
