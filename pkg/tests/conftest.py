import numpy as np
import pytest

from doptk import EUCLIDEAN_SE, KernelSpec, PointSet, assemble_covariance


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_instance(seed, n, dim=2, sigma_f=1.0, ell=0.25, eta=0.05):
    """Random candidate set in [0,1]^dim with its dense covariance matrix."""
    gen = np.random.default_rng(seed)
    pts = PointSet(gen.random((n, dim)))
    spec = KernelSpec(EUCLIDEAN_SE, sigma_f=sigma_f, ell=ell, eta=eta)
    return pts, spec, assemble_covariance(spec, pts)


def spd_matrix(seed, n, jitter=1e-3):
    """Random well-conditioned SPD test matrix (not kernel-structured)."""
    gen = np.random.default_rng(seed)
    A = gen.standard_normal((n, n))
    return A @ A.T / n + jitter * np.eye(n)


def logdet_eig(M):
    """Independent log-determinant via eigenvalues."""
    return float(np.sum(np.log(np.linalg.eigvalsh(M))))


def phi_eig(K, indices, eta):
    """Independent D-optimality evaluation: eigenvalue sum, no Cholesky."""
    sub = K[np.ix_(indices, indices)]
    lam = np.linalg.eigvalsh(np.eye(len(indices)) + sub / eta**2)
    return float(np.sum(np.log(lam)))
