"""Core raster/matrix types and score normalization.

A scene is held either as an :class:`HsiCube` (band-sequential raster) or as
a :class:`PixelMatrix` (one spectral pixel per column, row-major pixel
order).  All in-memory arithmetic is float64; the 32-bit on-disk formats
live in :mod:`hsiad.raster`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HsiCube",
    "PixelMatrix",
    "GroundTruthMask",
    "ScoreMap",
    "flatten",
    "unflatten",
    "normalize_scores",
]


def _freeze(obj, field: str, arr: np.ndarray) -> None:
    arr.setflags(write=False)
    object.__setattr__(obj, field, arr)


@dataclass(frozen=True)
class HsiCube:
    """An L-band image; ``values`` has axis order (bands, height, width).

    A flat array in band-sequential order is accepted and reshaped.  Values
    are copied to float64 and frozen, so cubes are safe to share.
    """

    width: int
    height: int
    bands: int
    values: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.bands < 1:
            raise ValueError(
                f"cube dimensions must be positive, got "
                f"{self.width}x{self.height}x{self.bands}"
            )
        v = np.asarray(self.values, dtype=np.float64)
        expected = self.width * self.height * self.bands
        if v.size != expected:
            raise ValueError(
                f"value count {v.size} does not match "
                f"{self.bands} bands x {self.height}x{self.width} pixels"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("cube values must be finite")
        v = v.reshape(self.bands, self.height, self.width).copy()
        _freeze(self, "values", v)

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def spectrum(self, row: int, col: int) -> np.ndarray:
        """Spectrum of the pixel at (row, col)."""
        return self.values[:, row, col]


@dataclass(frozen=True)
class PixelMatrix:
    """Spectral pixels as columns: ``data`` is (bands, width*height).

    Column ``j`` holds the spectrum of pixel ``j`` in row-major order.  The
    spatial shape is carried along so the matrix can be folded back into a
    cube.
    """

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2:
            raise ValueError("pixel matrix must be 2-D")
        if d.shape[1] != self.width * self.height:
            raise ValueError(
                f"column count {d.shape[1]} does not match "
                f"{self.width}x{self.height} pixels"
            )
        if not np.all(np.isfinite(d)):
            raise ValueError("pixel matrix values must be finite")
        _freeze(self, "data", d.copy())

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class GroundTruthMask:
    """Binary per-pixel labels, 1 marking an anomalous pixel."""

    width: int
    height: int
    labels: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.labels)
        if m.shape != (self.height, self.width):
            raise ValueError(
                f"mask shape {m.shape} does not match "
                f"height x width ({self.height}, {self.width})"
            )
        if not np.isin(m, (0, 1)).all():
            raise ValueError("mask labels must be 0 or 1")
        _freeze(self, "labels", m.astype(np.uint8))

    @property
    def anomaly_count(self) -> int:
        return int(self.labels.sum())


@dataclass(frozen=True)
class ScoreMap:
    """Per-pixel nonnegative detection scores."""

    width: int
    height: int
    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.shape != (self.height, self.width):
            raise ValueError(
                f"score shape {s.shape} does not match "
                f"height x width ({self.height}, {self.width})"
            )
        if not np.all(np.isfinite(s)):
            raise ValueError("scores must be finite")
        if s.size and s.min() < 0:
            raise ValueError("scores must be nonnegative")
        _freeze(self, "scores", s.copy())

    @property
    def flat(self) -> np.ndarray:
        return self.scores.reshape(-1)


def flatten(cube: HsiCube) -> PixelMatrix:
    """Unfold a cube into a (bands, pixels) matrix, pixels in row-major order."""
    data = cube.values.reshape(cube.bands, cube.pixel_count)
    return PixelMatrix(cube.width, cube.height, data)


def unflatten(matrix: PixelMatrix) -> HsiCube:
    """Fold a pixel matrix back into a cube; inverse of :func:`flatten`."""
    return HsiCube(matrix.width, matrix.height, matrix.rows, matrix.data)


def normalize_scores(scores: ScoreMap) -> ScoreMap:
    """Min-max rescale scores to [0, 1].

    The map is order-preserving.  A constant input maps to all zeros so that
    degenerate detectors still evaluate downstream instead of erroring.
    """
    s = scores.scores
    if s.size == 0:
        raise ValueError("cannot normalize an empty score map")
    lo = float(s.min())
    hi = float(s.max())
    if hi == lo:
        out = np.zeros_like(s)
    else:
        out = (s - lo) / (hi - lo)
    return ScoreMap(scores.width, scores.height, out)
