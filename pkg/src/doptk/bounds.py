"""Executable bounds on selection quality and low-rank eigenvalue accuracy.

Every function here evaluates a closed-form certificate from the dominant
eigenvalues of the covariance matrix: a cap on what any selection can score,
per-instance and worst-case floors for the spectral-basis selections, floors
for sketch- and pivoted-Cholesky-based variants, and the classic guarantee
for greedy maximization of a monotone submodular objective. The test suite
and the ``bounds-check`` CLI command drive these against the actual
algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import gp, select
from .linalg import eigh

__all__ = [
    "srrqr_norm_bound",
    "qrcp_norm_bound",
    "score_upper",
    "score_bounds_exact",
    "score_lower_worstcase",
    "nystrom_eigenvalue_lower_bounds",
    "sketch_deviation_gamma",
    "score_lower_sketched",
    "greedy_cholesky_eig_factors",
    "score_lower_greedy_cholesky",
    "greedy_ratio",
    "BoundReport",
    "bound_report",
]


def srrqr_norm_bound(n: int, k: int, f: float) -> float:
    """Worst-case cap sqrt(1 + f^2 k (n - k)) on the selected-block inverse norm.

    Holds for the strong rank-revealing pivoting rule with parameter f > 1;
    the greedy pivoting actually implemented is not guaranteed to satisfy
    it, which is why bounds built on it are reported rather than hard
    requirements of the greedy pipeline.
    """
    if not f > 1:
        raise ValueError(f"f must exceed 1, got {f}")
    return float(np.sqrt(1.0 + f**2 * k * (n - k)))


def qrcp_norm_bound(n: int, k: int) -> float:
    """Guaranteed rank-revealing factor sqrt(n - k) * 2^k of greedy column pivoting."""
    return float(np.sqrt(max(n - k, 1)) * 2.0**k)


def _logdet_damped(lams: np.ndarray, eta: float, damping) -> float:
    """sum_i log(1 + eta^-2 lam_i / damping_i) with non-negative clamping."""
    lams = np.maximum(np.asarray(lams, dtype=float), 0.0)
    return float(np.sum(np.log1p(lams / (eta**2 * np.asarray(damping, dtype=float)))))


def score_upper(K_or_eigvals, k: int, eta: float) -> float:
    """Cap on the D-optimality of any k-subset: logdet(I + eta^-2 Lambda_k).

    No principal submatrix can beat the matrix's own dominant eigenvalues
    (eigenvalue interlacing), so this is an absolute ceiling.
    """
    lams = _eigvals_desc(K_or_eigvals)
    if not 1 <= k <= lams.size:
        raise ValueError(f"need 1 <= k <= {lams.size}, got k={k}")
    return _logdet_damped(lams[:k], eta, 1.0)


def _eigvals_desc(K_or_eigvals) -> np.ndarray:
    arr = np.asarray(K_or_eigvals, dtype=float)
    if arr.ndim == 1:
        return np.sort(arr)[::-1]
    return eigh(arr).values


def score_bounds_exact(K: np.ndarray, indices, eta: float) -> tuple[float, float]:
    """Per-instance (upper, lower) bracket on the score of a given selection.

    The lower bound damps each dominant eigenvalue by the squared inverse
    norm of the selected block of the dominant eigenvector basis; it
    requires that block to be invertible and raises
    ``numpy.linalg.LinAlgError`` otherwise.
    """
    K = np.asarray(K, dtype=float)
    indices = np.asarray(indices, dtype=int)
    k = indices.size
    decomp = eigh(K)
    upper = _logdet_damped(decomp.values[:k], eta, 1.0)

    block = decomp.vectors[indices, :k]  # (V_k^T S)^T
    sigma = np.linalg.svd(block, compute_uv=False)
    if sigma[-1] <= k * np.finfo(float).eps * sigma[0]:
        raise np.linalg.LinAlgError("selected block of the dominant basis is numerically rank-deficient")
    inv_norm_sq = 1.0 / sigma[-1] ** 2
    lower = _logdet_damped(decomp.values[:k], eta, inv_norm_sq)
    return upper, lower


def score_lower_worstcase(K_or_eigvals, k: int, eta: float, f: float = 2.0) -> float:
    """Floor logdet(I + eta^-2 Lambda_k / (1 + f^2 k (n - k))) for basis selection.

    Instance-independent: substitutes the worst-case inverse-norm cap of the
    strong rank-revealing pivoting rule into the exact per-instance floor.
    """
    lams = _eigvals_desc(K_or_eigvals)
    n = lams.size
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    return _logdet_damped(lams[:k], eta, srrqr_norm_bound(n, k, f) ** 2)


def nystrom_eigenvalue_lower_bounds(K: np.ndarray, omega: np.ndarray, k: int) -> np.ndarray:
    """Per-index floors on the leading eigenvalues of the sketch-based surrogate.

    For the approximation built from test matrix ``omega``, eigenvalue i of
    the surrogate is at least lam_i^2 / (lam_i + beta), where beta is the
    squared spectral norm of Lambda_perp^{1/2} Omega_perp Omega_k^+. The
    floors pair each eigenvalue with its own reciprocal in the damping term;
    together with the surrogate never exceeding the true eigenvalues this
    gives a two-sided sandwich. Requires the dominant-block sketch
    Omega_k to have full row rank.
    """
    K = np.asarray(K, dtype=float)
    omega = np.asarray(omega, dtype=float)
    n = K.shape[0]
    if omega.shape[0] != n:
        raise ValueError(f"test matrix has {omega.shape[0]} rows, expected {n}")
    if not 1 <= k <= min(n, omega.shape[1]):
        raise ValueError(f"need 1 <= k <= min(n, sketch width), got k={k}")

    decomp = eigh(K)
    lams = np.maximum(decomp.values, 0.0)
    omega_k = decomp.vectors[:, :k].T @ omega
    omega_perp = decomp.vectors[:, k:].T @ omega
    sigma_k = np.linalg.svd(omega_k, compute_uv=False)
    if sigma_k[-1] <= max(omega_k.shape) * np.finfo(float).eps * sigma_k[0]:
        raise np.linalg.LinAlgError("dominant-block sketch is numerically rank-deficient")
    scaled = np.sqrt(lams[k:])[:, None] * (omega_perp @ np.linalg.pinv(omega_k))
    beta = np.linalg.norm(scaled, 2) ** 2 if scaled.size else 0.0

    top = lams[:k]
    return top**2 / (top + beta)  # lam/(1 + beta/lam), safe at lam == 0


def sketch_deviation_gamma(K_or_eigvals, k: int, p: int) -> float:
    """Probabilistic cap gamma on the sketch misalignment term beta.

    gamma = [ ||Lambda_perp||^{1/2} * 16 sqrt(1 + k/(p+1))
              + sqrt(trace Lambda_perp) * 8 sqrt(k+p)/(p+1) ]^2,
    which bounds beta with probability at least 1 - 3 e^{-p} for a Gaussian
    test matrix with oversampling p >= 4.
    """
    if p < 4:
        raise ValueError(f"oversampling must be at least 4, got {p}")
    lams = np.maximum(_eigvals_desc(K_or_eigvals), 0.0)
    if not 1 <= k <= lams.size:
        raise ValueError(f"need 1 <= k <= {lams.size}, got k={k}")
    tail = lams[k:]
    if tail.size == 0 or tail[0] == 0.0:
        return 0.0
    term1 = np.sqrt(tail[0]) * 16.0 * np.sqrt(1.0 + k / (p + 1.0))
    term2 = np.sqrt(tail.sum()) * 8.0 * np.sqrt(k + p) / (p + 1.0)
    return float((term1 + term2) ** 2)


def score_lower_sketched(K_or_eigvals, k: int, eta: float, p: int, f: float = 2.0) -> float:
    """Probabilistic floor for the sketch-based selection's score.

    Damps eigenvalue i by (1 + gamma / lam_{k+1-i}) on top of the worst-case
    pivoting factor; holds with probability at least 1 - 3 e^{-p} under the
    same assumptions as :func:`sketch_deviation_gamma`.
    """
    lams = np.maximum(_eigvals_desc(K_or_eigvals), 0.0)
    n = lams.size
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    gamma = sketch_deviation_gamma(lams, k, p)
    top = lams[:k]
    reversed_top = top[::-1]  # pairs lam_i with lam_{k+1-i}
    with np.errstate(divide="ignore"):
        damping = np.where(reversed_top > 0, 1.0 + gamma / reversed_top, np.inf)
    damping *= srrqr_norm_bound(n, k, f) ** 2
    return _logdet_damped(top, eta, damping)


def greedy_cholesky_eig_factors(n: int, k: int) -> np.ndarray:
    """Diagonal damping factors c_i = 1 / (4^{i-1} (n - i + 1)), i = 1..k.

    Computed in log space so deep factors underflow to zero instead of
    overflowing the power.
    """
    i = np.arange(1, k + 1, dtype=float)
    return np.exp(-(i - 1.0) * np.log(4.0) - np.log(n - i + 1.0))


def score_lower_greedy_cholesky(K_or_eigvals, k: int, eta: float, f: float = 2.0) -> float:
    """Floor for the greedy-pivoted-Cholesky selection's score.

    Each dominant eigenvalue is additionally damped by the complete-pivoting
    factor c_i; extremely pessimistic for large i, but a true floor.
    """
    lams = np.maximum(_eigvals_desc(K_or_eigvals), 0.0)
    n = lams.size
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    c = greedy_cholesky_eig_factors(n, k)
    with np.errstate(divide="ignore"):
        damping = np.where(c > 0, srrqr_norm_bound(n, k, f) ** 2 / c, np.inf)
    return _logdet_damped(lams[:k], eta, damping)


def greedy_ratio(K: np.ndarray, k: int, eta: float) -> float:
    """Score ratio greedy / exhaustive-optimum; guaranteed at least 1 - 1/e."""
    K = np.asarray(K, dtype=float)
    op_greedy = select.select_greedy_efficient(lambda j: K[:, j], np.diag(K), K.shape[0], k, eta)
    phi_greedy = gp.score_selection(K, op_greedy.indices, eta)
    op_brute = select.select_brute_force(K, k, eta)
    phi_brute = gp.score_selection(K, op_brute.indices, eta)
    return phi_greedy / phi_brute


def _slack_entry(satisfied_side: float, bounding_side: float, rtol: float = 1e-8, asserted: bool = True) -> dict:
    slack = satisfied_side - bounding_side
    return {
        "ok": bool(slack >= -rtol * abs(bounding_side)),
        "slack": float(slack),
        "asserted": asserted,
    }


@dataclass
class BoundReport:
    """All bound quantities for one instance, with per-bound satisfaction slacks.

    ``satisfied`` entries record slack = (satisfied side) - (bounding side);
    a bound holds when its slack is no smaller than -1e-8 times the bounding
    side's magnitude. Entries with ``asserted`` False are informational:
    their hypotheses are not met by the implemented pivoting, so violations
    are reported rather than treated as failures.
    """

    instance: dict
    quantities: dict = field(default_factory=dict)
    satisfied: dict = field(default_factory=dict)

    def all_asserted_ok(self) -> bool:
        return all(entry["ok"] for entry in self.satisfied.values() if entry["asserted"])

    def to_dict(self) -> dict:
        return {"instance": self.instance, "quantities": self.quantities, "satisfied": self.satisfied}


def bound_report(K: np.ndarray, k: int, eta: float, f: float = 2.0, p: int = 10, brute: str = "auto") -> BoundReport:
    """Evaluate the full bound chain on a dense instance.

    Runs the spectral-basis selection and the greedy-pivoted-Cholesky
    selection, evaluates every bound, and cross-checks the ordering chain:
    upper >= exhaustive optimum (when within budget) >= basis selection
    >= exact floor. The worst-case floor is asserted against the exact floor
    only when the selected block's inverse norm actually satisfies the
    worst-case cap; greedy pivoting does not guarantee that.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    result_gks = select.select_conceptual_gks(K, k).scored(K, eta)
    upper, lower_exact = score_bounds_exact(K, result_gks.indices, eta)

    decomp = eigh(K)
    block = decomp.vectors[result_gks.indices, :k]
    inv_norm = 1.0 / np.linalg.svd(block, compute_uv=False)[-1]
    worstcase_norm = srrqr_norm_bound(n, k, f)

    lower_worst = score_lower_worstcase(decomp.values, k, eta, f)
    lower_greedy_chol = score_lower_greedy_cholesky(decomp.values, k, eta, f)
    gamma = sketch_deviation_gamma(decomp.values, k, p)
    lower_sketched = score_lower_sketched(decomp.values, k, eta, p, f)

    result_cholgks = select.select_cholesky_gks(K, k, pivoting="greedy").scored(K, eta)

    quantities = {
        "n": n,
        "k": k,
        "eta": eta,
        "f": f,
        "p": p,
        "phi_gks": result_gks.d_optimality,
        "phi_cholgks_greedy": result_cholgks.d_optimality,
        "upper_spectral": upper,
        "lower_exact_subspace": lower_exact,
        "lower_worstcase_qr": lower_worst,
        "lower_greedy_cholesky": lower_greedy_chol,
        "lower_sketched": lower_sketched,
        "sketch_gamma": gamma,
        "subspace_inverse_norm": float(inv_norm),
        "worstcase_inverse_norm": worstcase_norm,
    }
    satisfied = {
        "upper_vs_gks": _slack_entry(upper, result_gks.d_optimality),
        "gks_vs_lower_exact": _slack_entry(result_gks.d_optimality, lower_exact),
        "cholgks_vs_lower_greedy_cholesky": _slack_entry(result_cholgks.d_optimality, lower_greedy_chol),
        "lower_exact_vs_worstcase": _slack_entry(lower_exact, lower_worst, asserted=inv_norm <= worstcase_norm),
    }

    feasible = comb(n, k) <= select.BRUTE_FORCE_BUDGET
    if brute == "always" or (brute == "auto" and feasible):
        result_brute = select.select_brute_force(K, k, eta).scored(K, eta)
        quantities["phi_brute"] = result_brute.d_optimality
        quantities["greedy_ratio"] = greedy_ratio(K, k, eta)
        satisfied["upper_vs_brute"] = _slack_entry(upper, result_brute.d_optimality)
        satisfied["brute_vs_gks"] = _slack_entry(result_brute.d_optimality, result_gks.d_optimality)
        satisfied["greedy_ratio_vs_guarantee"] = _slack_entry(quantities["greedy_ratio"], 1.0 - 1.0 / np.e)

    return BoundReport(instance={"n": n, "k": k, "eta": eta, "f": f, "p": p}, quantities=quantities, satisfied=satisfied)
