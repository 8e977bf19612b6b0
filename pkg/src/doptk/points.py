"""Candidate sensor locations: containers, synthetic generators, CSV ingestion.

Candidate indices are 0-based everywhere, including in files written or read
by this package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "PointSet",
    "grid1d",
    "latin_hypercube",
    "zhou_function",
    "sum_of_gaussians_1d",
    "load_points_csv",
    "load_values_csv",
    "save_points_csv",
    "save_values_csv",
]


@dataclass(frozen=True)
class PointSet:
    """n candidate locations in D-dimensional space.

    ``coords`` is an (n, D) float array. Coordinates must be finite and no
    two rows may be identical: duplicate candidates make the covariance
    matrix singular beyond what the noise term regularizes, so they are
    rejected here rather than downstream. Near-duplicates are the caller's
    responsibility.
    """

    coords: np.ndarray

    def __post_init__(self):
        coords = np.ascontiguousarray(np.atleast_2d(np.asarray(self.coords, dtype=float)))
        if coords.ndim != 2:
            raise ValueError(f"coords must be 2-dimensional, got shape {coords.shape}")
        n, dim = coords.shape
        if n < 1 or dim < 1:
            raise ValueError(f"need at least one point and one dimension, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if len(np.unique(coords, axis=0)) != n:
            raise ValueError("duplicate candidate points are not allowed")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n


def grid1d(a: float, b: float, n: int) -> PointSet:
    """n equally spaced 1-D candidates on [a, b], endpoints included."""
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("grid bounds must be finite")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if n < 2:
        raise ValueError(f"need n >= 2 grid points, got {n}")
    return PointSet(np.linspace(a, b, n)[:, None])


def latin_hypercube(n: int, dim: int, seed: int) -> PointSet:
    """Latin hypercube sample of n points in the unit cube [0, 1]^dim.

    Each axis is split into n equal bins and receives exactly one point per
    bin. Deterministic for a fixed seed.
    """
    if n < 1 or dim < 1:
        raise ValueError(f"need n >= 1 and dim >= 1, got n={n}, dim={dim}")
    rng = np.random.default_rng(seed)
    coords = np.empty((n, dim))
    for d in range(dim):
        coords[:, d] = (rng.permutation(n) + rng.random(n)) / n
    return PointSet(coords)


def zhou_function(points: PointSet, zeta1: float = 1.0 / 3.0, zeta2: float = 2.0 / 3.0) -> np.ndarray:
    """Two-bump Zhou test function on the unit cube.

    f(x) = (10^D / 2) [phi(10 (x - zeta1 e)) + phi(10 (x - zeta2 e))] with
    phi(u) = (2 pi)^{D/2} exp(-||u||^2 / 2) and e the all-ones direction.
    Resists low-order polynomial approximation, which makes it a useful
    surrogate-modeling target.
    """
    x = points.coords
    dim = points.dim
    scale = (10.0**dim / 2.0) * (2.0 * np.pi) ** (dim / 2.0)

    def bump(center):
        return np.exp(-0.5 * np.sum((10.0 * (x - center)) ** 2, axis=1))

    return scale * (bump(zeta1) + bump(zeta2))


def sum_of_gaussians_1d(points: PointSet, centers, widths, heights) -> np.ndarray:
    """Sum of 1-D Gaussian bumps: f(x) = sum_j h_j exp(-(x - c_j)^2 / (2 w_j^2)).

    Synthetic stand-in for a smooth droplet-like profile. Empty parameter
    lists give the zero function.
    """
    if points.dim != 1:
        raise ValueError(f"sum_of_gaussians_1d needs 1-D points, got dim={points.dim}")
    centers = np.asarray(centers, dtype=float)
    widths = np.asarray(widths, dtype=float)
    heights = np.asarray(heights, dtype=float)
    if not (centers.shape == widths.shape == heights.shape):
        raise ValueError("centers, widths, and heights must have equal lengths")
    if centers.size and np.any(widths <= 0):
        raise ValueError("widths must be positive")
    x = points.coords[:, 0]
    out = np.zeros_like(x)
    for c, w, h in zip(centers, widths, heights):
        out += h * np.exp(-((x - c) ** 2) / (2.0 * w**2))
    return out


def _parse_csv(path) -> tuple[list[list[float]], int]:
    """Parse a numeric CSV, skipping an auto-detected header row.

    Returns (rows, width). Raises ValueError naming the offending 1-based
    line for ragged rows or non-numeric cells.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        raw = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1) if row]
    if not raw:
        raise ValueError(f"{path}: file contains no data")

    def to_floats(row):
        return [float(cell) for cell in row]

    start = 0
    try:
        to_floats(raw[0][1])
    except ValueError:
        start = 1  # non-numeric first row: header
    if start == len(raw):
        raise ValueError(f"{path}: no data rows after header")

    width = len(raw[start][1])
    rows = []
    for lineno, row in raw[start:]:
        if len(row) != width:
            raise ValueError(f"{path}: ragged row at line {lineno} (expected {width} columns, got {len(row)})")
        try:
            rows.append(to_floats(row))
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric cell at line {lineno}: {exc}") from None
    return rows, width


def load_points_csv(path) -> PointSet:
    """Load candidate coordinates from CSV: one row per point, one column per axis.

    A non-numeric first row is treated as a header. The 0-based row position
    (after any header) is the candidate index.
    """
    rows, _ = _parse_csv(path)
    return PointSet(np.asarray(rows, dtype=float))


def load_values_csv(path) -> np.ndarray:
    """Load a single-column CSV of values, in row order."""
    rows, width = _parse_csv(path)
    if width != 1:
        raise ValueError(f"{path}: expected a single column of values, got {width} columns")
    return np.asarray(rows, dtype=float)[:, 0]


def save_points_csv(path, points: PointSet, header: list[str] | None = None) -> None:
    """Write coordinates with 17 significant digits (lossless double round-trip)."""
    _write_csv(path, points.coords, header)


def save_values_csv(path, values, header: str | None = None) -> None:
    """Write a single column of values with 17 significant digits."""
    values = np.asarray(values, dtype=float)
    _write_csv(path, values[:, None], [header] if header else None)


def _write_csv(path, array2d, header) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(header)
        for row in np.atleast_2d(array2d):
            writer.writerow([f"{v:.17g}" for v in row])
