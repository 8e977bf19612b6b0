"""Sensor-selection algorithms.

The production methods are the spectral-basis pipeline (eigendecomposition
or a low-rank surrogate, followed by column-pivoted QR on the transposed
basis) and the fast greedy maximizer of the D-optimality objective. The
naive greedy and exhaustive searches exist as oracles for testing on small
instances, and uniform random selection as the baseline the others must
beat.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import gp
from .kernels import as_operator
from .linalg import eigh, qr_column_pivoted, thin_svd
from .nystrom import cholesky_greedy, cholesky_rp, nystrom_randomized

__all__ = [
    "SelectionResult",
    "gks_core",
    "select_conceptual_gks",
    "select_nysgks",
    "select_cholesky_gks",
    "select_greedy_efficient",
    "select_greedy_naive",
    "select_brute_force",
    "select_random",
    "random_baseline",
    "BaselineHistogram",
]

BRUTE_FORCE_BUDGET = 10**6


@dataclass
class SelectionResult:
    """Outcome of one selection run.

    ``indices`` are distinct candidate indices in selection order (fewer
    than requested only when a pivoted-Cholesky route stopped early, which
    ``metadata['early_stopped']`` records). ``d_optimality`` is filled by
    the shared scoring path, not by the selection itself.
    """

    indices: np.ndarray
    method: str
    d_optimality: float | None = None
    seed: int | None = None
    wall_time: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        if len(np.unique(self.indices)) != self.indices.size:
            raise ValueError("selected indices must be distinct")

    def scored(self, K_or_op, eta: float) -> "SelectionResult":
        """Fill ``d_optimality`` via the shared scoring path and return self."""
        self.d_optimality = gp.score_selection(K_or_op, self.indices, eta)
        return self


def gks_core(basis: np.ndarray) -> np.ndarray:
    """Select rows of an orthonormal n-by-k basis by pivoted QR on its transpose.

    The first k pivots of the column-pivoted QR of basis^T are the selected
    candidate indices. The basis must have orthonormal columns (checked to
    1e-8).
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] < basis.shape[1]:
        raise ValueError(f"expected a tall basis matrix, got shape {basis.shape}")
    k = basis.shape[1]
    gram = basis.T @ basis
    if np.max(np.abs(gram - np.eye(k))) > 1e-8:
        raise ValueError("basis columns are not orthonormal to 1e-8")
    return qr_column_pivoted(basis.T).pivots[:k].copy()


def _timed(method: str, seed, fn, **metadata) -> SelectionResult:
    start = time.perf_counter()
    indices, extra = fn()
    elapsed = time.perf_counter() - start
    metadata.update(extra)
    return SelectionResult(indices=indices, method=method, seed=seed, wall_time=elapsed, metadata=metadata)


def select_conceptual_gks(K: np.ndarray, k: int) -> SelectionResult:
    """Eigendecompose the dense covariance and select from the dominant basis.

    Needs the full matrix and an O(n^3) eigendecomposition, so it only
    scales to moderate n; the surrogate-based variants exist for everything
    larger.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")

    def run():
        decomp = eigh(K)
        return gks_core(decomp.vectors[:, :k]), {}

    return _timed("conceptual-gks", None, run)


def select_nysgks(matmat_or_K, n: int, k: int, p: int = 10, seed=0) -> SelectionResult:
    """Selection from the randomized low-rank basis (oversampled rank k + p).

    The basis is truncated back to its leading k columns before the pivoted
    QR step. Only products with K are required.
    """
    op = None
    if not callable(matmat_or_K):
        op = as_operator(matmat_or_K)
        if op.n != n:
            raise ValueError(f"operator size {op.n} does not match n={n}")
    matmat = op.matmat if op is not None else matmat_or_K

    def run():
        approx = nystrom_randomized(matmat, n, k, p=p, seed=seed)
        return gks_core(approx.basis[:, :k]), {"oversampling": p, "basis_rank": approx.rank}

    return _timed("nysgks", seed, run)


def select_cholesky_gks(K_or_op, k: int, pivoting: str = "greedy", seed=None) -> SelectionResult:
    """Selection from a pivoted-Cholesky low-rank factor.

    ``pivoting`` is "greedy" (largest residual diagonal) or "random"
    (residual-diagonal sampling, seeded). The raw Cholesky pivots are kept
    in ``metadata['raw_pivots']`` so the factor's own pivot sequence is
    reportable as an alternative selection; the QR step on the factor's
    left singular vectors is what the method itself returns. If the factor
    stops early at rank r < k the selection has r indices and
    ``metadata['early_stopped']`` is True.
    """
    op = as_operator(K_or_op)
    n = op.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    if pivoting not in ("greedy", "random"):
        raise ValueError(f"pivoting must be 'greedy' or 'random', got {pivoting!r}")

    def run():
        if pivoting == "greedy":
            factor = cholesky_greedy(op.column, op.diag(), k)
        else:
            factor = cholesky_rp(op.column, op.diag(), k, seed=0 if seed is None else seed)
        U, _, _ = thin_svd(factor.F)
        r = factor.rank
        indices = gks_core(U[:, :r])
        return indices, {"raw_pivots": factor.pivots, "early_stopped": r < k, "factor_rank": r}

    return _timed(f"cholgks-{pivoting}", seed, run)


def select_greedy_efficient(column, diag, n: int, k: int, eta: float) -> SelectionResult:
    """Greedy D-optimality maximization in O(n k^2).

    Maintains, for the shifted matrix A = I + eta^-2 K, the squared Schur
    complement of every candidate against the selected set; the candidate
    with the largest value is exactly the one the naive greedy would pick,
    because the marginal gain of candidate i is log of that Schur
    complement. One incremental factor row per step replaces the naive
    re-factorization of every augmented set.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")

    def run():
        inv_eta2 = 1.0 / eta**2
        gain2 = 1.0 + inv_eta2 * np.asarray(diag, dtype=float).copy()
        rows = np.empty((k, n))
        chosen = np.empty(k, dtype=int)
        for j in range(k):
            s = int(np.argmax(gain2))  # first occurrence: smallest index on ties
            chosen[j] = s
            a_col = inv_eta2 * np.asarray(column(s), dtype=float)
            a_col[s] += 1.0
            rows[j] = (a_col - rows[:j].T @ rows[:j, s]) / np.sqrt(gain2[s])
            gain2 -= rows[j] ** 2
            gain2[s] = -np.inf  # never reselect
        return chosen, {}

    return _timed("greedy", None, run)


def select_greedy_naive(K: np.ndarray, k: int, eta: float) -> SelectionResult:
    """Reference greedy: re-evaluate the objective of every augmented set.

    O(n k^4) -- a small-instance oracle for the efficient implementation,
    kept deliberately close to the objective's definition.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")

    def run():
        chosen: list[int] = []
        for _ in range(k):
            scores = np.full(n, -np.inf)
            for i in range(n):
                if i in chosen:
                    continue
                trial = chosen + [i]
                scores[i] = gp.d_optimality(K[np.ix_(trial, trial)], eta)
            chosen.append(int(np.argmax(scores)))
        return np.asarray(chosen), {}

    return _timed("greedy-naive", None, run)


def select_brute_force(K: np.ndarray, k: int, eta: float) -> SelectionResult:
    """Exhaustive maximization over all k-subsets; ties break lexicographically.

    Only feasible within the combinatorial budget of 10^6 subsets; this is
    the optimality oracle for everything else.
    """
    from itertools import combinations
    from math import comb

    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    if comb(n, k) > BRUTE_FORCE_BUDGET:
        raise ValueError(f"C({n},{k}) = {comb(n, k)} exceeds the brute-force budget {BRUTE_FORCE_BUDGET}")

    def run():
        best_score = -np.inf
        best: tuple[int, ...] | None = None
        for subset in combinations(range(n), k):
            score = gp.d_optimality(K[np.ix_(subset, subset)], eta)
            if score > best_score:
                best_score = score
                best = subset
        return np.asarray(best), {"score": best_score}

    return _timed("brute-force", None, run)


def select_random(n: int, k: int, seed=0) -> SelectionResult:
    """Uniform k-subset without replacement."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")

    def run():
        rng = np.random.default_rng(seed)
        return rng.choice(n, size=k, replace=False), {}

    return _timed("random", seed, run)


@dataclass(frozen=True)
class BaselineHistogram:
    """D-optimality scores of repeated uniform random selections."""

    scores: np.ndarray

    @property
    def min(self) -> float:
        return float(self.scores.min())

    @property
    def max(self) -> float:
        return float(self.scores.max())

    @property
    def mean(self) -> float:
        return float(self.scores.mean())

    @property
    def std(self) -> float:
        return float(self.scores.std())

    def summary(self) -> dict:
        return {"trials": int(self.scores.size), "min": self.min, "max": self.max, "mean": self.mean, "std": self.std}


def random_baseline(K_or_op, k: int, eta: float, trials: int, seed=0) -> BaselineHistogram:
    """Score ``trials`` uniform selections, one derived seed (seed + t) per trial."""
    op = as_operator(K_or_op)
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    seed = int(seed)
    scores = np.empty(trials)
    for t in range(trials):
        result = select_random(op.n, k, seed=seed + t)
        scores[t] = gp.score_selection(op, result.indices, eta)
    return BaselineHistogram(scores=scores)
