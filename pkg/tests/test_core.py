"""Container invariants, flatten/unflatten layout, and score normalization."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from hsiad.core import (
    GroundTruthMask,
    HsiCube,
    PixelMatrix,
    ScoreMap,
    flatten,
    normalize_scores,
    unflatten,
)


def _cube(width=4, height=3, bands=5, seed=0):
    rng = np.random.default_rng(seed)
    return HsiCube(width, height, bands, rng.random((bands, height, width)))


def test_cube_shape_and_counts():
    cube = _cube()
    assert cube.values.shape == (5, 3, 4)
    assert cube.pixel_count == 12


def test_cube_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        HsiCube(0, 3, 5, np.zeros((5, 3, 0)))
    with pytest.raises(ValueError):
        HsiCube(4, 3, 0, np.zeros((0, 3, 4)))
    with pytest.raises(ValueError):
        HsiCube(4, 3, 5, np.zeros((5, 3, 5)))  # payload size mismatch


def test_cube_rejects_nonfinite():
    vals = np.zeros((2, 2, 2))
    vals[1, 0, 1] = np.nan
    with pytest.raises(ValueError):
        HsiCube(2, 2, 2, vals)
    vals[1, 0, 1] = np.inf
    with pytest.raises(ValueError):
        HsiCube(2, 2, 2, vals)


def test_cube_values_immutable():
    cube = _cube()
    with pytest.raises(ValueError):
        cube.values[0, 0, 0] = 7.0


def test_spectrum_matches_values():
    cube = _cube()
    assert_array_equal(cube.spectrum(2, 1), cube.values[:, 2, 1])


def test_flatten_single_pixel_identity():
    spectrum = np.array([1.5, -0.5, 3.0])
    cube = HsiCube(1, 1, 3, spectrum.reshape(3, 1, 1))
    X = flatten(cube)
    assert X.data.shape == (3, 1)
    assert_array_equal(X.data[:, 0], spectrum)


def test_flatten_layout_two_pixels():
    # 2x1 image, pixels (1,2) and (3,4): columns in row-major pixel order.
    vals = np.array([[[1.0, 3.0]], [[2.0, 4.0]]])
    cube = HsiCube(2, 1, 2, vals)
    X = flatten(cube)
    assert_array_equal(X.data, np.array([[1.0, 3.0], [2.0, 4.0]]))


def test_flatten_column_order_row_major():
    cube = _cube(width=5, height=4, bands=3, seed=3)
    X = flatten(cube)
    for row in range(4):
        for col in range(5):
            assert_array_equal(X.data[:, row * 5 + col], cube.spectrum(row, col))


def test_flatten_unflatten_roundtrip():
    cube = _cube(width=7, height=6, bands=9, seed=1)
    back = unflatten(flatten(cube))
    assert back.width == cube.width and back.height == cube.height
    assert_array_equal(back.values, cube.values)


def test_pixel_matrix_validation():
    with pytest.raises(ValueError):
        PixelMatrix(3, 2, np.zeros((4, 5)))  # 3*2 != 5 columns
    with pytest.raises(ValueError):
        PixelMatrix(3, 2, np.full((4, 6), np.nan))


def test_mask_counts_and_validation():
    labels = np.zeros((3, 4), dtype=np.uint8)
    labels[1, 2] = 1
    labels[0, 0] = 1
    mask = GroundTruthMask(4, 3, labels)
    assert mask.anomaly_count == 2
    with pytest.raises(ValueError):
        GroundTruthMask(4, 3, labels + 1)  # values outside {0, 1}
    with pytest.raises(ValueError):
        GroundTruthMask(3, 4, labels)  # shape mismatch


def test_score_map_validation():
    with pytest.raises(ValueError):
        ScoreMap(2, 2, np.array([[0.0, 1.0], [-0.5, 2.0]]))
    with pytest.raises(ValueError):
        ScoreMap(2, 2, np.array([[0.0, 1.0], [np.inf, 2.0]]))
    flat = ScoreMap(2, 2, np.arange(4.0).reshape(2, 2)).flat
    assert_array_equal(flat, [0.0, 1.0, 2.0, 3.0])


def test_normalize_affine_map():
    scores = ScoreMap(3, 1, np.array([[2.0, 4.0, 6.0]]))
    out = normalize_scores(scores)
    assert_allclose(out.scores, [[0.0, 0.5, 1.0]], atol=0)


def test_normalize_constant_gives_zeros():
    scores = ScoreMap(2, 1, np.array([[5.0, 5.0]]))
    assert_array_equal(normalize_scores(scores).scores, [[0.0, 0.0]])


def test_normalize_preserves_order_and_range():
    rng = np.random.default_rng(11)
    raw = rng.random((6, 8)) * 40.0
    out = normalize_scores(ScoreMap(8, 6, raw)).scores
    assert out.min() == 0.0 and out.max() == 1.0
    assert_array_equal(np.argsort(raw.ravel()), np.argsort(out.ravel()))
    # ties preserved: duplicate inputs map to duplicate outputs
    raw2 = np.array([[1.0, 2.0, 2.0, 5.0]])
    out2 = normalize_scores(ScoreMap(4, 1, raw2)).scores
    assert out2[0, 1] == out2[0, 2]
