"""Global Mahalanobis-distance (RX) anomaly detector.

Scores each pixel by its squared Mahalanobis distance to the scene mean
under the empirical background covariance.  Used standalone as a baseline
detector and inside dictionary construction to pre-select likely-anomalous
pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import PixelMatrix, ScoreMap, _freeze
from .errors import NumericError

__all__ = ["BackgroundStats", "fit_stats", "rx_scores"]

_MAX_RIDGE_STEPS = 40


@dataclass(frozen=True)
class BackgroundStats:
    """Fitted scene statistics plus the cached covariance factorization."""

    mu: np.ndarray
    cov: np.ndarray
    cov_factor: tuple
    ridge: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mu.ndim != 1 or cov.shape != (mu.size, mu.size):
            raise ValueError("mu must be an L-vector and cov an LxL matrix")
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")
        _freeze(self, "mu", mu)
        _freeze(self, "cov", cov)

    @property
    def bands(self) -> int:
        return self.mu.size


def fit_stats(X: PixelMatrix, ridge_eps: float = 1e-6) -> BackgroundStats:
    """Mean, unbiased covariance, and a Cholesky factor of cov + ridge*I.

    The ridge starts at ``ridge_eps`` times the mean band variance and grows
    tenfold until the factorization succeeds, so rank-deficient scenes still
    fit; the value actually applied is recorded on the result.
    """
    n = X.cols
    if n < 2:
        raise ValueError(f"need at least 2 pixels to fit statistics, got {n}")
    if ridge_eps < 0:
        raise ValueError("ridge_eps must be nonnegative")
    mu = X.data.mean(axis=1)
    centered = X.data - mu[:, None]
    cov = (centered @ centered.T) / (n - 1)
    cov = 0.5 * (cov + cov.T)

    trace = float(np.trace(cov))
    # Mean band variance sets the ridge scale; constant scenes have zero
    # trace, so fall back to ridge_eps itself to keep escalation alive.
    base = ridge_eps * (trace / X.bands if trace > 0 else 1.0)
    ridge = 0.0
    eye = np.eye(X.bands)
    for step in range(_MAX_RIDGE_STEPS):
        try:
            factor = cho_factor(cov + ridge * eye, lower=True)
            return BackgroundStats(mu, cov, factor, ridge)
        except np.linalg.LinAlgError:
            if base == 0.0:
                break
            ridge = base * (10.0**step)
    raise NumericError(
        "covariance factorization failed; data is rank deficient and "
        f"ridge_eps={ridge_eps} leaves nothing to escalate"
    )


def rx_scores(X: PixelMatrix, stats: BackgroundStats) -> ScoreMap:
    """Squared Mahalanobis distance of every pixel to the fitted mean.

    Solves through the cached factorization rather than forming an inverse.
    """
    if X.bands != stats.bands:
        raise ValueError(
            f"pixel matrix has {X.bands} bands but stats were fit on {stats.bands}"
        )
    diffs = X.data - stats.mu[:, None]
    solved = cho_solve(stats.cov_factor, diffs)
    scores = np.einsum("ij,ij->j", diffs, solved)
    np.maximum(scores, 0.0, out=scores)
    return ScoreMap(X.width, X.height, scores.reshape(X.height, X.width))
