"""Low-rank SPSD approximations K ~= F F^T of a kernel covariance matrix.

Three routes produce the factor:

* randomized projection with a stability shift (sketch-based, needs only
  matrix products with K),
* greedy pivoted Cholesky (complete pivoting on the residual diagonal),
* random pivoted Cholesky (pivots sampled proportionally to the residual
  diagonal).

The Cholesky routes touch one column of K per step, so none of them ever
needs the full matrix. All randomized outputs are deterministic for a fixed
seed; Gaussian test matrices are filled in column-major draw order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "LowRankFactor",
    "RandomizedBasis",
    "nystrom_randomized",
    "cholesky_greedy",
    "cholesky_rp",
    "nystrom_from_sketch",
    "gaussian_test_matrix",
]

#: Residual-diagonal cutoff, relative to the largest initial diagonal entry.
#: A concrete stop keeps the recursion from dividing by a round-off-negative
#: pivot once the matrix is numerically exhausted.
EARLY_STOP_RTOL = 1e-12


@dataclass(frozen=True)
class LowRankFactor:
    """Tall factor F with K ~= F @ F.T.

    ``pivots`` records the selected column indices for the pivoted-Cholesky
    routes (None for the randomized route). ``method`` names the route. The
    factor may have fewer columns than requested when the residual diagonal
    is exhausted early; that is a success with a smaller rank, not an error.
    """

    F: np.ndarray
    method: str
    pivots: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return self.F.shape[1]


@dataclass(frozen=True)
class RandomizedBasis:
    """Orthonormal basis from the stabilized randomized factorization.

    ``basis`` is n-by-(k+p) with columns ordered by the non-increasing
    singular values of the shifted factor; ``rank`` counts the singular
    values above the numerical-rank cutoff.
    """

    basis: np.ndarray
    singular_values: np.ndarray
    rank: int


def gaussian_test_matrix(n: int, width: int, seed) -> np.ndarray:
    """Standard-normal n-by-width matrix, drawn in column-major fill order."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n * width).reshape((n, width), order="F")


def nystrom_randomized(matmat, n: int, k: int, p: int = 10, seed=0, shift_scale: float = 1e-6) -> RandomizedBasis:
    """Stabilized randomized low-rank factorization via Gaussian sketching.

    Draws an n-by-(k+p) Gaussian test matrix, orthonormalizes it, forms the
    sketch Y = K @ Omega, applies the stability shift nu = sqrt(n) * 1e-6,
    and extracts an orthonormal basis from the thin SVD of
    Y_nu @ chol(Omega^T Y_nu)^{-T}. The shift keeps the small eigenvalues of
    the core matrix away from zero; it is never subtracted back out because
    downstream consumers use only the basis.

    ``matmat`` must map an (n, m) array to K @ that array. Raises
    ``numpy.linalg.LinAlgError`` if the shifted core matrix fails Cholesky,
    which signals a severely indefinite K or a dimension mismatch.
    """
    if k < 1:
        raise ValueError(f"rank k must be positive, got {k}")
    if p < 0:
        raise ValueError(f"oversampling must be non-negative, got {p}")
    width = k + p
    if width > n:
        raise ValueError(f"k + p = {width} exceeds n = {n}")

    omega = gaussian_test_matrix(n, width, seed)
    omega, _ = np.linalg.qr(omega)
    Y = np.asarray(matmat(omega))
    if Y.shape != (n, width):
        raise ValueError(f"matmat returned shape {Y.shape}, expected {(n, width)}")

    nu = np.sqrt(n) * shift_scale
    Y_nu = Y + nu * omega
    core = omega.T @ Y_nu
    core = 0.5 * (core + core.T)
    C = np.linalg.cholesky(core)
    B = solve_triangular(C, Y_nu.T, lower=True).T  # B @ C.T = Y_nu
    U, s, _ = np.linalg.svd(B, full_matrices=False)

    # rank diagnostic only: squared singular values estimate the surrogate's
    # eigenvalues plus nu, so the shift is removed before thresholding
    shifted = s**2 - nu
    cutoff = shifted.max() * max(n, width) * np.finfo(float).eps if shifted.size else 0.0
    rank = int(np.count_nonzero(shifted > max(cutoff, 0.0)))
    return RandomizedBasis(basis=U, singular_values=s, rank=rank)


def _pivoted_cholesky(column, diag, k: int, picker, method: str) -> LowRankFactor:
    d = np.asarray(diag, dtype=float).copy()
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"rank must satisfy 1 <= k <= {n}, got {k}")
    tol = EARLY_STOP_RTOL * d.max()

    F = np.empty((n, k))
    pivots = np.empty(k, dtype=int)
    r = 0
    for j in range(k):
        if d.max() <= tol:
            break
        s = picker(d)
        w = np.asarray(column(s), dtype=float) - F[:, :j] @ F[s, :j]
        F[:, j] = w / np.sqrt(d[s])
        d -= F[:, j] ** 2
        pivots[j] = s
        r += 1
    return LowRankFactor(F=F[:, :r].copy(), method=method, pivots=pivots[:r].copy())


def cholesky_greedy(column, diag, k: int) -> LowRankFactor:
    """Pivoted Cholesky choosing the largest residual-diagonal entry each step.

    ``column(j)`` must return column j of K; ``diag`` is K's diagonal. Ties
    break to the smallest index. Stops early once the residual diagonal
    falls below the relative cutoff, returning fewer columns.
    """

    def pick(d):
        return int(np.argmax(d))  # first occurrence: smallest index on ties

    return _pivoted_cholesky(column, diag, k, pick, "greedy-cholesky")


def cholesky_rp(column, diag, k: int, seed=0) -> LowRankFactor:
    """Pivoted Cholesky sampling each pivot proportionally to the residual diagonal.

    Deterministic for a fixed seed. Round-off-negative residual entries are
    clamped to zero for the sampling distribution only; the maintained
    residual itself is left untouched.
    """
    rng = np.random.default_rng(seed)

    def pick(d):
        w = np.maximum(d, 0.0)
        return int(rng.choice(d.shape[0], p=w / w.sum()))

    return _pivoted_cholesky(column, diag, k, pick, "rp-cholesky")


def nystrom_from_sketch(K: np.ndarray, omega: np.ndarray, rcond: float = 1e-12) -> np.ndarray:
    """Exact sketch-based approximation (K Omega)(Omega^T K Omega)^+(K Omega)^T.

    Reference formula for bound evaluation and tests on small instances; the
    pseudo-inverse cutoff is relative to the core matrix's largest singular
    value. Not for production use at scale -- it forms the full n-by-n
    result.
    """
    K = np.asarray(K, dtype=float)
    omega = np.asarray(omega, dtype=float)
    Y = K @ omega
    core = omega.T @ Y
    core = 0.5 * (core + core.T)
    Khat = Y @ np.linalg.pinv(core, rcond=rcond, hermitian=True) @ Y.T
    return 0.5 * (Khat + Khat.T)
