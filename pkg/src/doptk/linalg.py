"""Dense factorization primitives used by the selection algorithms.

The column-pivoted QR here is deliberately hand-rolled rather than delegated
to LAPACK: the selection pipeline depends on its exact pivoting rule
(greedy on recomputed trailing-column norms, ties to the smallest original
column index), and pinning that rule keeps selections reproducible across
platforms. Eigendecomposition and SVD delegate to LAPACK, whose contracts
are checked by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "PivotedQR",
    "qr_column_pivoted",
    "EigDecomposition",
    "eigh",
    "thin_svd",
    "chol_append",
]


@dataclass(frozen=True)
class PivotedQR:
    """Result of a column-pivoted QR of an m-by-n matrix (m <= n).

    ``A[:, pivots] = Q @ R`` with Q m-by-m orthogonal and R m-by-n upper
    trapezoidal. ``pivots`` is a permutation of range(n); its first m entries
    are the selected columns in pivot order. The magnitudes of R's diagonal
    are non-increasing.
    """

    Q: np.ndarray
    R: np.ndarray
    pivots: np.ndarray


def qr_column_pivoted(A: np.ndarray) -> PivotedQR:
    """Householder QR with greedy column pivoting.

    At each step the trailing column with the largest residual 2-norm is
    moved to the front; ties break to the smallest original column index.
    Residual norms are recomputed from scratch each step, so the greedy rule
    holds exactly rather than up to norm-downdating drift. Cost is
    O(m^2 n) for an m-by-n input, the same order as the factorization
    itself.

    Rank deficiency is not an error: once the trailing block vanishes, the
    remaining diagonal entries are zero and the pivot order keeps the
    current permutation.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    m, n = A.shape
    if m > n:
        raise ValueError(f"expected a short-and-wide matrix (m <= n), got shape {A.shape}")

    R = A.copy()
    Q = np.eye(m)
    pivots = np.arange(n)

    for s in range(m):
        tail = R[s:, s:]
        norms2 = np.einsum("ij,ij->j", tail, tail)
        largest = norms2.max()
        if largest == 0.0:
            break
        ties = np.flatnonzero(norms2 == largest)
        j = s + ties[np.argmin(pivots[s + ties])]
        if j != s:
            R[:, [s, j]] = R[:, [j, s]]
            pivots[[s, j]] = pivots[[j, s]]

        x = R[s:, s]
        norm_x = np.sqrt(norms2[j - s])
        v = x.copy()
        v[0] += np.copysign(norm_x, x[0]) if x[0] != 0.0 else norm_x
        v /= np.linalg.norm(v)
        R[s:, s:] -= 2.0 * np.outer(v, v @ R[s:, s:])
        R[s + 1 :, s] = 0.0
        Q[:, s:] -= 2.0 * np.outer(Q[:, s:] @ v, v)

    return PivotedQR(Q=Q, R=R, pivots=pivots)


@dataclass(frozen=True)
class EigDecomposition:
    """Symmetric eigendecomposition with eigenvalues in non-increasing order.

    ``vectors`` has orthonormal columns; column i pairs with ``values[i]``.
    Negative round-off eigenvalues of nominally PSD input are reported
    as-is, never clamped.
    """

    values: np.ndarray
    vectors: np.ndarray


def eigh(K: np.ndarray) -> EigDecomposition:
    """Full symmetric eigendecomposition, ordered largest first."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square symmetric matrix, got shape {K.shape}")
    values, vectors = np.linalg.eigh(K)  # raises LinAlgError on non-convergence
    return EigDecomposition(values=values[::-1].copy(), vectors=vectors[:, ::-1].copy())


def thin_svd(F: np.ndarray):
    """Thin SVD of a tall matrix: (U, s, Vt) with singular values non-increasing."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {F.shape}")
    return np.linalg.svd(F, full_matrices=False)


def chol_append(L: np.ndarray, cross: np.ndarray, new_diag: float) -> np.ndarray:
    """Extend a Cholesky factor by one row/column of the underlying SPD matrix.

    Given the lower-triangular factor ``L`` of the current j-by-j block,
    the cross-covariances ``cross`` between the block and the new entry, and
    the new diagonal value, returns the (j+1)-by-(j+1) factor. Raises
    ``numpy.linalg.LinAlgError`` when the appended Schur complement is not
    positive, i.e. the grown matrix is not SPD.
    """
    L = np.asarray(L, dtype=float)
    cross = np.atleast_1d(np.asarray(cross, dtype=float))
    j = L.shape[0]
    if L.shape != (j, j):
        raise ValueError(f"L must be square, got shape {L.shape}")
    if cross.shape != (j,):
        raise ValueError(f"cross must have length {j}, got shape {cross.shape}")

    if j == 0:
        w = np.empty(0)
    else:
        w = solve_triangular(L, cross, lower=True)
    schur = float(new_diag) - float(w @ w)
    if schur <= 0.0:
        raise np.linalg.LinAlgError(f"appended Schur complement is not positive ({schur:.3e}); matrix is not SPD")

    out = np.zeros((j + 1, j + 1))
    out[:j, :j] = np.tril(L)
    out[j, :j] = w
    out[j, j] = np.sqrt(schur)
    return out
