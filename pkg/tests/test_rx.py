"""Global Mahalanobis detector: hand cases, invariances, ridge behavior."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from hsiad.core import PixelMatrix
from hsiad.rx import BackgroundStats, fit_stats, rx_scores

from oracles import mahalanobis_brute


def test_fit_two_pixel_hand_case():
    X = PixelMatrix(2, 1, np.array([[0.0, 2.0], [0.0, 2.0]]))
    stats = fit_stats(X)
    assert_array_equal(stats.mu, [1.0, 1.0])
    assert_array_equal(stats.cov, [[2.0, 2.0], [2.0, 2.0]])


def test_fit_identity_covariance_monte_carlo():
    rng = np.random.default_rng(12)
    data = rng.standard_normal((4, 10000))
    stats = fit_stats(PixelMatrix(100, 100, data))
    assert np.all(np.abs(stats.cov - np.eye(4)) < 0.1)
    assert stats.ridge == 0.0


def test_fit_constant_image_records_ridge():
    X = PixelMatrix(5, 2, np.ones((3, 10)))
    stats = fit_stats(X)
    assert stats.ridge > 0.0
    # degenerate image still scores: all diffs vanish
    assert_array_equal(rx_scores(X, stats).scores, np.zeros((2, 5)))


def test_score_of_mean_is_zero():
    rng = np.random.default_rng(4)
    data = rng.normal(size=(6, 40))
    stats = fit_stats(PixelMatrix(8, 5, data))
    probe = PixelMatrix(1, 1, stats.mu[:, None].copy())
    assert_allclose(rx_scores(probe, stats).scores, [[0.0]], atol=1e-20)


def _matrix_with_exact_cov(diag):
    # columns +-a e_k chosen so the sample covariance is exactly diag(d):
    # each axis contributes 2 a_k^2 / (N - 1) with N = 2 L columns
    L = len(diag)
    n = 2 * L
    cols = []
    for k, d in enumerate(diag):
        a = np.sqrt(d * (n - 1) / 2.0)
        e = np.zeros(L)
        e[k] = a
        cols.extend([e, -e])
    return np.array(cols).T


def test_identity_covariance_is_squared_euclidean():
    data = _matrix_with_exact_cov([1.0, 1.0])
    stats = fit_stats(PixelMatrix(2, 2, data))
    assert_allclose(stats.cov, np.eye(2), atol=1e-12)
    x = np.array([[1.5], [-2.0]])
    score = rx_scores(PixelMatrix(1, 1, x), stats).scores[0, 0]
    assert_allclose(score, 1.5 ** 2 + 2.0 ** 2, rtol=1e-12)


def test_diagonal_covariance_hand_case():
    data = _matrix_with_exact_cov([2.0, 1.0])
    stats = fit_stats(PixelMatrix(2, 2, data))
    assert_allclose(stats.cov, np.diag([2.0, 1.0]), atol=1e-12)
    x = np.array([[2.0], [3.0]])  # mu is zero by construction
    score = rx_scores(PixelMatrix(1, 1, x), stats).scores[0, 0]
    assert_allclose(score, 2.0 ** 2 / 2.0 + 3.0 ** 2 / 1.0, atol=1e-12)


def test_matches_explicit_inverse_oracle():
    rng = np.random.default_rng(8)
    data = rng.normal(size=(7, 120)) + rng.normal(size=(7, 1))
    X = PixelMatrix(12, 10, data)
    scores = rx_scores(X, fit_stats(X)).flat
    assert_allclose(scores, mahalanobis_brute(data), rtol=1e-9)


def test_affine_invariance():
    rng = np.random.default_rng(15)
    data = rng.normal(size=(5, 200))
    T = rng.normal(size=(5, 5)) + 3.0 * np.eye(5)
    b = rng.normal(size=(5, 1))
    X = PixelMatrix(20, 10, data)
    Y = PixelMatrix(20, 10, T @ data + b)
    s_x = rx_scores(X, fit_stats(X)).flat
    s_y = rx_scores(Y, fit_stats(Y)).flat
    assert_allclose(s_y, s_x, rtol=1e-8)


def test_score_sum_identity():
    # summing the squared Mahalanobis distances over the fitting sample gives
    # exactly L (N - 1): trace of the centered Gram against its own inverse
    rng = np.random.default_rng(19)
    data = rng.normal(size=(6, 90))
    X = PixelMatrix(9, 10, data)
    total = rx_scores(X, fit_stats(X)).flat.sum()
    assert_allclose(total, 6 * 89, rtol=1e-10)


def test_scores_nonnegative_and_shape():
    rng = np.random.default_rng(33)
    data = rng.normal(size=(4, 30))
    X = PixelMatrix(6, 5, data)
    out = rx_scores(X, fit_stats(X))
    assert out.scores.shape == (5, 6)
    assert np.all(out.scores >= 0.0)


def test_singular_covariance_escalates_ridge():
    # a constant band zeroes the leading pivot exactly, so factorization at
    # ridge 0 must fail and the escalation path engage
    rng = np.random.default_rng(41)
    data = np.vstack([np.ones((1, 50)), rng.normal(size=(2, 50))])
    stats = fit_stats(PixelMatrix(10, 5, data))
    assert stats.ridge > 0.0
    scores = rx_scores(PixelMatrix(10, 5, data), stats)
    assert np.all(np.isfinite(scores.scores))


def test_band_mismatch_rejected():
    rng = np.random.default_rng(1)
    stats = fit_stats(PixelMatrix(4, 1, rng.normal(size=(3, 4))))
    with pytest.raises(ValueError):
        rx_scores(PixelMatrix(4, 1, rng.normal(size=(5, 4))), stats)


def test_stats_validation():
    with pytest.raises(ValueError):
        BackgroundStats(np.zeros(3), np.eye(2), None, 0.0)
