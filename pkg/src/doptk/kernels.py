"""Squared-exponential kernels, covariance assembly, and matrix-free access.

Two kernel families are supported:

* ``squared-exponential-euclidean`` -- sigma_f^2 exp(-||x - y||^2 / (2 ell^2))
  in the coordinates' own units, any dimension.
* ``squared-exponential-great-circle`` -- same form with the haversine
  great-circle distance in kilometers on a sphere of radius 6371.0 km;
  points must be (longitude, latitude) pairs in degrees.

Dense assembly is meant for moderate n; the :class:`CovarianceOperator`
provides blockwise matrix products and single-column generation so the
selection algorithms never need the full matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .points import PointSet

__all__ = [
    "EUCLIDEAN_SE",
    "GREAT_CIRCLE_SE",
    "KERNEL_FAMILIES",
    "EARTH_RADIUS_KM",
    "KernelSpec",
    "kernel_eval",
    "assemble_covariance",
    "covariance_column",
    "covariance_diag",
    "matvec",
    "CovarianceOperator",
    "DenseOperator",
]

EUCLIDEAN_SE = "squared-exponential-euclidean"
GREAT_CIRCLE_SE = "squared-exponential-great-circle"
KERNEL_FAMILIES = (EUCLIDEAN_SE, GREAT_CIRCLE_SE)

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters; fully determines the covariance matrix.

    ``sigma_f`` is the signal standard deviation, ``ell`` the lengthscale
    (coordinate units, or km for the great-circle family), and ``eta`` the
    observation-noise standard deviation.
    """

    family: str
    sigma_f: float
    ell: float
    eta: float = 0.0

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}")
        for name in ("sigma_f", "ell", "eta"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.sigma_f <= 0 or self.ell <= 0:
            raise ValueError(f"sigma_f and ell must be positive, got sigma_f={self.sigma_f}, ell={self.ell}")
        if self.eta < 0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")


def _check_great_circle_dim(dim: int) -> None:
    if dim != 2:
        raise ValueError(f"great-circle kernel needs (longitude, latitude) pairs, got dimension {dim}")


def _haversine_sqdist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Squared great-circle distances in km^2 between degree-valued (lon, lat) rows.

    The haversine form is symmetric in floating point: swapping the inputs
    negates differences before squaring and commutes one product.
    """
    lon_a, lat_a = np.radians(A[:, 0])[:, None], np.radians(A[:, 1])[:, None]
    lon_b, lat_b = np.radians(B[:, 0])[None, :], np.radians(B[:, 1])[None, :]
    h = np.sin((lat_b - lat_a) / 2.0) ** 2 + np.cos(lat_a) * np.cos(lat_b) * np.sin((lon_b - lon_a) / 2.0) ** 2
    d = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    return d**2


def _sqdist(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if spec.family == GREAT_CIRCLE_SE:
        _check_great_circle_dim(A.shape[1])
        return _haversine_sqdist(A, B)
    return cdist(A, B, metric="sqeuclidean")


def _from_sqdist(spec: KernelSpec, d2: np.ndarray) -> np.ndarray:
    d2 *= -1.0 / (2.0 * spec.ell**2)
    np.exp(d2, out=d2)
    d2 *= spec.sigma_f**2
    return d2


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError(f"point dimensions differ: {x.shape} vs {y.shape}")
    return float(_from_sqdist(spec, _sqdist(spec, x[None, :], y[None, :]))[0, 0])


def assemble_covariance(spec: KernelSpec, points: PointSet) -> np.ndarray:
    """Dense n-by-n covariance matrix K[i, j] = kappa(x_i, x_j).

    Exactly symmetric, with the constant diagonal sigma_f^2 these stationary
    kernels imply. The n^2 memory footprint is the caller's responsibility;
    the CLI enforces a configurable cap.
    """
    K = _from_sqdist(spec, _sqdist(spec, points.coords, points.coords))
    K = 0.5 * (K + K.T)  # guarantee exact symmetry regardless of backend
    np.fill_diagonal(K, spec.sigma_f**2)
    return K


def covariance_column(spec: KernelSpec, points: PointSet, j: int) -> np.ndarray:
    """Column j of the covariance matrix, without assembling the matrix."""
    if not 0 <= j < points.n:
        raise IndexError(f"column index {j} out of range [0, {points.n})")
    col = _from_sqdist(spec, _sqdist(spec, points.coords, points.coords[j : j + 1]))[:, 0]
    col[j] = spec.sigma_f**2
    return col


def covariance_diag(spec: KernelSpec, points: PointSet) -> np.ndarray:
    """Diagonal of the covariance matrix: the constant vector sigma_f^2."""
    return np.full(points.n, spec.sigma_f**2)


class CovarianceOperator:
    """Matrix-free access to a kernel covariance matrix.

    Supplies the three access patterns the selection algorithms need --
    products ``K @ V`` (computed in row blocks of ``block_size`` without
    materializing K), single columns, and the diagonal. Results are
    deterministic for a fixed block size.
    """

    def __init__(self, spec: KernelSpec, points: PointSet, block_size: int = 512):
        if block_size < 1:
            raise ValueError(f"block_size must be positive, got {block_size}")
        self.spec = spec
        self.points = points
        self.block_size = block_size

    @property
    def n(self) -> int:
        return self.points.n

    def matmat(self, V: np.ndarray) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        vec_in = V.ndim == 1
        if vec_in:
            V = V[:, None]
        if V.shape[0] != self.n:
            raise ValueError(f"operand has {V.shape[0]} rows, expected {self.n}")
        out = np.empty((self.n, V.shape[1]))
        coords = self.points.coords
        for start in range(0, self.n, self.block_size):
            stop = min(start + self.block_size, self.n)
            block = _from_sqdist(self.spec, _sqdist(self.spec, coords[start:stop], coords))
            out[start:stop] = block @ V
        return out[:, 0] if vec_in else out

    def column(self, j: int) -> np.ndarray:
        return covariance_column(self.spec, self.points, j)

    def diag(self) -> np.ndarray:
        return covariance_diag(self.spec, self.points)

    def submatrix(self, indices) -> np.ndarray:
        """Dense principal submatrix K[indices, indices]."""
        indices = np.asarray(indices, dtype=int)
        sub = PointSet(self.points.coords[indices])
        return assemble_covariance(self.spec, sub)


class DenseOperator:
    """Adapter giving an explicit symmetric matrix the operator interface."""

    def __init__(self, K: np.ndarray):
        K = np.asarray(K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {K.shape}")
        self.K = K

    @property
    def n(self) -> int:
        return self.K.shape[0]

    def matmat(self, V: np.ndarray) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        if V.shape[0] != self.n:
            raise ValueError(f"operand has {V.shape[0]} rows, expected {self.n}")
        return self.K @ V

    def column(self, j: int) -> np.ndarray:
        if not 0 <= j < self.n:
            raise IndexError(f"column index {j} out of range [0, {self.n})")
        return self.K[:, j].copy()

    def diag(self) -> np.ndarray:
        return np.diag(self.K).copy()

    def submatrix(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=int)
        return self.K[np.ix_(indices, indices)]


def as_operator(K_or_op) -> "CovarianceOperator | DenseOperator":
    """Coerce a dense matrix to the operator interface; pass operators through."""
    if isinstance(K_or_op, np.ndarray):
        return DenseOperator(K_or_op)
    if hasattr(K_or_op, "matmat") and hasattr(K_or_op, "column"):
        return K_or_op
    raise TypeError(f"expected a square ndarray or covariance operator, got {type(K_or_op)!r}")


def matvec(K_or_op, v: np.ndarray) -> np.ndarray:
    """Product K @ v for a dense matrix, a covariance operator, or (spec, points)."""
    if isinstance(K_or_op, tuple):
        spec, points = K_or_op
        K_or_op = CovarianceOperator(spec, points)
    return as_operator(K_or_op).matmat(np.asarray(v, dtype=float))
