from itertools import combinations

import numpy as np
import pytest

from conftest import phi_eig, random_instance
from doptk import (
    gks_core,
    random_baseline,
    score_selection,
    select_brute_force,
    select_cholesky_gks,
    select_conceptual_gks,
    select_greedy_efficient,
    select_greedy_naive,
    select_nysgks,
    select_random,
)
from doptk.bounds import score_upper


def col(K):
    return lambda j: K[:, j]


class TestGksCore:
    def test_identity_prefix(self):
        n, k = 9, 4
        basis = np.eye(n)[:, :k]
        assert set(gks_core(basis).tolist()) == {0, 1, 2, 3}

    def test_permutation_columns(self):
        n = 8
        rows = [6, 2, 5]
        basis = np.zeros((n, 3))
        for j, r in enumerate(rows):
            basis[r, j] = 1.0
        assert set(gks_core(basis).tolist()) == set(rows)

    def test_random_orthonormal_invertible_block(self):
        rng = np.random.default_rng(0)
        basis = np.linalg.qr(rng.standard_normal((30, 6)))[0]
        idx = gks_core(basis)
        block = basis[idx, :]
        inv_norm = 1.0 / np.linalg.svd(block, compute_uv=False)[-1]
        assert np.isfinite(inv_norm)
        assert inv_norm >= 1.0 - 1e-12  # orthonormal rows cannot beat 1

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError, match="orthonormal"):
            gks_core(np.ones((5, 2)))


class TestConceptualGks:
    def test_diagonal_selects_largest(self):
        K = np.diag([0.5, 3.0, 1.0, 2.5, 0.1])
        result = select_conceptual_gks(K, 2)
        assert set(result.indices.tolist()) == {1, 3}

    def test_score_within_theory_bracket(self):
        _, spec, K = random_instance(0, 10, eta=0.1)
        result = select_conceptual_gks(K, 3).scored(K, 0.1)
        brute = select_brute_force(K, 3, 0.1).scored(K, 0.1)
        upper = score_upper(K, 3, 0.1)
        assert result.d_optimality <= brute.d_optimality + 1e-10
        assert brute.d_optimality <= upper + 1e-10

    def test_k_validation(self):
        with pytest.raises(ValueError):
            select_conceptual_gks(np.eye(4), 5)


class TestNysGks:
    def test_exact_low_rank_matches_conceptual(self):
        rng = np.random.default_rng(7)
        n, k = 120, 6
        G = rng.standard_normal((n, k))
        K = G @ G.T
        eta = 0.1
        conceptual = select_conceptual_gks(K, k).scored(K, eta)
        sketched = select_nysgks(K, n, k, p=6, seed=5).scored(K, eta)
        assert sketched.d_optimality == pytest.approx(conceptual.d_optimality, abs=1e-6)

    def test_deterministic(self):
        _, spec, K = random_instance(1, 80)
        a = select_nysgks(K, 80, 6, p=4, seed=9)
        b = select_nysgks(K, 80, 6, p=4, seed=9)
        assert np.array_equal(a.indices, b.indices)

    def test_callable_access(self):
        _, spec, K = random_instance(2, 50)
        direct = select_nysgks(K, 50, 5, p=4, seed=3)
        via_fn = select_nysgks(lambda V: K @ V, 50, 5, p=4, seed=3)
        assert np.array_equal(direct.indices, via_fn.indices)


class TestCholeskyGks:
    def test_diagonal_gks_equals_raw_pivots(self):
        K = np.diag([4.0, 1.0, 3.0, 2.0])
        result = select_cholesky_gks(K, 3, pivoting="greedy")
        assert set(result.indices.tolist()) == set(result.metadata["raw_pivots"].tolist())

    def test_random_pivoting_deterministic(self):
        _, spec, K = random_instance(3, 60)
        a = select_cholesky_gks(K, 8, pivoting="random", seed=4)
        b = select_cholesky_gks(K, 8, pivoting="random", seed=4)
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.metadata["raw_pivots"], b.metadata["raw_pivots"])

    def test_early_stop_flagged(self):
        rng = np.random.default_rng(11)
        G = rng.standard_normal((30, 3))
        K = G @ G.T
        result = select_cholesky_gks(K, 10, pivoting="greedy")
        assert result.metadata["early_stopped"]
        assert result.indices.size == result.metadata["factor_rank"] < 10

    def test_invalid_pivoting(self):
        with pytest.raises(ValueError, match="pivoting"):
            select_cholesky_gks(np.eye(4), 2, pivoting="magic")


class TestGreedy:
    def test_first_pick_stationary_tiebreak(self):
        _, spec, K = random_instance(4, 30)
        result = select_greedy_efficient(col(K), np.diag(K), 30, 1, 0.05)
        assert result.indices.tolist() == [0]

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_naive_oracle(self, seed):
        _, spec, K = random_instance(100 + seed, 60, ell=0.3, eta=0.05)
        fast = select_greedy_efficient(col(K), np.diag(K), 60, 7, 0.05)
        naive = select_greedy_naive(K, 7, 0.05)
        assert fast.indices.tolist() == naive.indices.tolist()

    def test_two_point_instance(self):
        K = np.array([[1.0, 0.3], [0.3, 1.0]])
        result = select_greedy_naive(K, 2, 0.5)
        assert set(result.indices.tolist()) == {0, 1}

    def test_gain_sequence_non_increasing(self):
        _, spec, K = random_instance(5, 25, eta=0.1)
        result = select_greedy_naive(K, 6, 0.1)
        idx = result.indices.tolist()
        phis = [phi_eig(K, idx[: j + 1], 0.1) for j in range(len(idx))]
        gains = np.diff([0.0] + phis)
        assert np.all(np.diff(gains) <= 1e-10)

    def test_prefix_scores_non_decreasing(self):
        _, spec, K = random_instance(6, 25, eta=0.1)
        result = select_greedy_efficient(col(K), np.diag(K), 25, 8, 0.1)
        idx = result.indices.tolist()
        phis = [phi_eig(K, idx[: j + 1], 0.1) for j in range(len(idx))]
        assert np.all(np.diff(phis) >= -1e-12)

    def test_submodularity_guarantee_small(self):
        for seed in range(10):
            _, spec, K = random_instance(200 + seed, 8, eta=0.1)
            greedy = select_greedy_efficient(col(K), np.diag(K), 8, 3, 0.1).scored(K, 0.1)
            brute = select_brute_force(K, 3, 0.1).scored(K, 0.1)
            assert greedy.d_optimality >= (1.0 - 1.0 / np.e) * brute.d_optimality


class TestBruteForce:
    def test_k_equals_n(self):
        _, spec, K = random_instance(7, 5, eta=0.2)
        assert set(select_brute_force(K, 5, 0.2).indices.tolist()) == set(range(5))

    def test_k_one_stationary_lexicographic(self):
        _, spec, K = random_instance(8, 6)
        assert select_brute_force(K, 1, 0.1).indices.tolist() == [0]

    def test_matches_independent_exhaustive_search(self):
        _, spec, K = random_instance(9, 10, eta=0.1)
        result = select_brute_force(K, 3, 0.1)
        best_phi, best_set = -np.inf, None
        for subset in combinations(range(10), 3):
            phi = phi_eig(K, list(subset), 0.1)
            if phi > best_phi:
                best_phi, best_set = phi, subset
        assert tuple(result.indices.tolist()) == best_set

    def test_budget_guard(self):
        with pytest.raises(ValueError, match="budget"):
            select_brute_force(np.eye(100), 10, 0.1)


class TestRandomSelection:
    def test_full_set(self):
        result = select_random(6, 6, seed=0)
        assert set(result.indices.tolist()) == set(range(6))

    def test_histogram_deterministic(self):
        _, spec, K = random_instance(10, 30)
        a = random_baseline(K, 4, 0.05, trials=50, seed=2)
        b = random_baseline(K, 4, 0.05, trials=50, seed=2)
        assert np.array_equal(a.scores, b.scores)
        assert a.summary()["trials"] == 50
        assert a.min <= a.mean <= a.max

    def test_all_methods_bounded_by_brute(self):
        _, spec, K = random_instance(11, 10, eta=0.1)
        eta, k = 0.1, 3
        brute = select_brute_force(K, k, eta).scored(K, eta).d_optimality
        upper = score_upper(K, k, eta)
        methods = [
            select_conceptual_gks(K, k),
            select_nysgks(K, 10, k, p=4, seed=0),
            select_cholesky_gks(K, k, "greedy"),
            select_cholesky_gks(K, k, "random", seed=0),
            select_greedy_efficient(col(K), np.diag(K), 10, k, eta),
            select_random(10, k, seed=0),
        ]
        for m in methods:
            phi = score_selection(K, m.indices, eta)
            assert phi <= brute + 1e-9, m.method
            assert phi <= upper + 1e-9, m.method


class TestPermutationEquivariance:
    @pytest.mark.parametrize("method", ["conceptual", "cholgks", "greedy"])
    def test_relabeling_commutes(self, method):
        # distinct-gain instance: a stationary kernel's constant diagonal ties
        # every first pick, so scale rows/columns to make all gains distinct
        pts, spec, K = random_instance(12, 24, ell=0.35, eta=0.05)
        scale = np.diag(1.0 + 0.03 * np.arange(24))
        K = scale @ K @ scale
        rng = np.random.default_rng(99)
        perm = rng.permutation(24)
        Kp = K[np.ix_(perm, perm)]

        def run(M):
            if method == "conceptual":
                return select_conceptual_gks(M, 5).indices
            if method == "cholgks":
                return select_cholesky_gks(M, 5, "greedy").indices
            return select_greedy_efficient(lambda j: M[:, j], np.diag(M), 24, 5, 0.05).indices

        base = run(K)
        relabeled = run(Kp)
        assert set(perm[relabeled].tolist()) == set(base.tolist())
