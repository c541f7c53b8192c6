"""Density-peak ranking for picking representative background spectra.

Within a group of pixel spectra, each point gets a Gaussian-kernel local
density gamma and a separation delta, the distance to its nearest
strictly-denser neighbour.  Points scoring high on both (large gamma * delta)
are cluster centers in the density-peaks sense and serve as background
dictionary atoms.  Points live in matrix columns throughout: a group of n
spectra with L bands is an (L, n) array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import _freeze

__all__ = [
    "DensityProfile",
    "pairwise_distances",
    "local_density",
    "min_higher_density_distance",
    "cutoff_distance",
    "select_representatives",
]


@dataclass(frozen=True)
class DensityProfile:
    """Per-point density and separation scores for one group of spectra."""

    gamma: np.ndarray
    delta: np.ndarray
    d_c: float

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=np.float64)
        delta = np.asarray(self.delta, dtype=np.float64)
        if gamma.ndim != 1 or gamma.shape != delta.shape:
            raise ValueError("gamma and delta must be 1-D arrays of equal length")
        if not (np.isfinite(gamma).all() and np.isfinite(delta).all()):
            raise ValueError("density profile values must be finite")
        if (gamma < 0).any() or (delta < 0).any():
            raise ValueError("gamma and delta must be nonnegative")
        if not self.d_c > 0:
            raise ValueError(f"cutoff distance must be positive, got {self.d_c}")
        _freeze(self, "gamma", gamma)
        _freeze(self, "delta", delta)

    @property
    def score(self) -> np.ndarray:
        return self.gamma * self.delta


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between the columns of an (L, n) array."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise ValueError("points must be an (L, n) array with n >= 1")
    sq = np.sum(pts * pts, axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts.T @ pts)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)


def local_density(distances: np.ndarray, d_c: float) -> np.ndarray:
    """Gaussian local density gamma_i = sum_{j != i} exp(-d_ij^2 / d_c^2)."""
    if not d_c > 0:
        raise ValueError(f"cutoff distance must be positive, got {d_c}")
    d = np.asarray(distances, dtype=np.float64)
    kernel = np.exp(-((d / d_c) ** 2))
    np.fill_diagonal(kernel, 0.0)  # self term excluded: keeps singleton gamma at 0
    return kernel.sum(axis=1)


def min_higher_density_distance(distances: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Distance to the nearest point of strictly higher density.

    Ties in gamma are broken toward the lower index, which makes the density
    ordering strict; the unique top point takes its maximum distance to any
    other point instead.  A single point gets delta = 0.
    """
    d = np.asarray(distances, dtype=np.float64)
    g = np.asarray(gamma, dtype=np.float64)
    n = g.shape[0]
    if n == 1:
        return np.zeros(1)
    # Densest first; the index tiebreak realizes "gamma_j > gamma_i, or
    # gamma_j == gamma_i and j < i" as one strict order.
    order = np.lexsort((np.arange(n), -g))
    delta = np.empty(n)
    delta[order[0]] = d[order[0]].max()
    for rank in range(1, n):
        i = order[rank]
        delta[i] = d[i, order[:rank]].min()
    return delta


def cutoff_distance(distances: np.ndarray, quantile: float = 0.02) -> float:
    """Kernel scale: a low quantile of off-diagonal distances, floored at
    machine epsilon so coincident points keep the kernel well defined."""
    d = np.asarray(distances, dtype=np.float64)
    n = d.shape[0]
    if n < 2:
        return float(np.finfo(np.float64).eps)
    off = d[~np.eye(n, dtype=bool)]
    return max(float(np.quantile(off, quantile)), float(np.finfo(np.float64).eps))


def select_representatives(
    points: np.ndarray, m: int, d_c_quantile: float = 0.02
) -> np.ndarray:
    """Columns of the top-m gamma*delta scores, in decreasing-score order.

    Ties are broken toward the lower column index, so duplicated points
    cannot reorder the selection.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be an (L, n) array")
    n = pts.shape[1]
    if not 0 < m <= n:
        raise ValueError(f"m must be in 1..{n}, got {m}")
    d = pairwise_distances(pts)
    d_c = cutoff_distance(d, d_c_quantile)
    gamma = local_density(d, d_c)
    if n == 1:
        profile = DensityProfile(gamma, np.zeros(1), d_c)
    else:
        profile = DensityProfile(gamma, min_higher_density_distance(d, gamma), d_c)
    order = np.lexsort((np.arange(n), -profile.score))
    return order[:m]
