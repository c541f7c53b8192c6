"""Union dictionary assembly: background and anomaly atoms from the image.

Background atoms are density-peak representatives picked inside each
superpixel; anomaly atoms are the strongest pixels under a prior detector
score.  Atoms are exact pixel copies, never rescaled, and every atom records
where it came from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PixelMatrix, ScoreMap, _freeze
from .density import select_representatives
from .segmentation import SuperpixelMap

__all__ = [
    "AtomSource",
    "AtomSet",
    "UnionDictionary",
    "build_background",
    "build_anomaly",
    "union",
    "build_union_dictionary",
]


@dataclass(frozen=True)
class AtomSource:
    """Origin of one dictionary atom.

    ``group`` is the superpixel id for background atoms and the detector
    rank (0 = highest score) for anomaly atoms.
    """

    kind: str
    pixel_index: int
    group: int

    def __post_init__(self):
        if self.kind not in ("background", "anomaly"):
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.pixel_index < 0 or self.group < 0:
            raise ValueError("pixel_index and group must be nonnegative")


@dataclass(frozen=True)
class AtomSet:
    """A bank of atom columns plus per-column provenance."""

    atoms: np.ndarray
    sources: tuple

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("atoms must be an (L, K) matrix")
        if a.shape[1] != len(self.sources):
            raise ValueError("one source record required per atom column")
        if not np.all(np.isfinite(a)):
            raise ValueError("atoms must be finite")
        _freeze(self, "atoms", a.copy())
        object.__setattr__(self, "sources", tuple(self.sources))

    @property
    def count(self) -> int:
        return self.atoms.shape[1]

    @property
    def pixel_indices(self) -> np.ndarray:
        return np.array([s.pixel_index for s in self.sources], dtype=np.int64)


@dataclass(frozen=True)
class UnionDictionary:
    """Background atoms followed by anomaly atoms, K = K_B + K_A columns."""

    atoms: np.ndarray
    k_background: int
    k_anomaly: int
    sources: tuple

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] < 1:
            raise ValueError("dictionary must have at least one atom column")
        if self.k_background < 0 or self.k_anomaly < 0:
            raise ValueError("sub-dictionary sizes must be nonnegative")
        if a.shape[1] != self.k_background + self.k_anomaly:
            raise ValueError(
                f"column count {a.shape[1]} != k_background + k_anomaly "
                f"({self.k_background} + {self.k_anomaly})"
            )
        if len(self.sources) != a.shape[1]:
            raise ValueError("one source record required per atom column")
        idx = [s.pixel_index for s in self.sources]
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate pixel indices across dictionary atoms")
        for s in self.sources[: self.k_background]:
            if s.kind != "background":
                raise ValueError("background columns must come first")
        for s in self.sources[self.k_background :]:
            if s.kind != "anomaly":
                raise ValueError("anomaly columns must come last")
        if not np.all(np.isfinite(a)):
            raise ValueError("atoms must be finite")
        _freeze(self, "atoms", a.copy())
        object.__setattr__(self, "sources", tuple(self.sources))

    @property
    def k_total(self) -> int:
        return self.atoms.shape[1]

    @property
    def background_atoms(self) -> np.ndarray:
        return self.atoms[:, : self.k_background]

    @property
    def anomaly_atoms(self) -> np.ndarray:
        return self.atoms[:, self.k_background :]


def build_background(
    X: PixelMatrix, superpixels: SuperpixelMap, m_per_superpixel: int
) -> AtomSet:
    """Density-peak representatives of every superpixel, in (superpixel id,
    rank) column order.

    A superpixel smaller than ``m_per_superpixel`` contributes all of its
    pixels.
    """
    if m_per_superpixel < 1:
        raise ValueError("m_per_superpixel must be at least 1")
    if (superpixels.width, superpixels.height) != (X.width, X.height):
        raise ValueError(
            f"superpixel map is {superpixels.width}x{superpixels.height} but "
            f"pixel matrix is {X.width}x{X.height}"
        )
    columns = []
    sources = []
    for sid in range(superpixels.superpixel_count):
        pix = superpixels.pixel_indices(sid)
        pts = X.data[:, pix]
        reps = select_representatives(pts, min(m_per_superpixel, pix.size))
        for local in reps:
            pixel = int(pix[local])
            columns.append(pixel)
            sources.append(AtomSource("background", pixel, sid))
    return AtomSet(X.data[:, columns], tuple(sources))


def build_anomaly(X: PixelMatrix, rx: ScoreMap, p: int) -> AtomSet:
    """The p strongest pixels under the detector score, descending, ties by
    pixel index."""
    n = X.cols
    if not 0 < p <= n:
        raise ValueError(f"p must be in 1..{n}, got {p}")
    if (rx.width, rx.height) != (X.width, X.height):
        raise ValueError(
            f"score map is {rx.width}x{rx.height} but "
            f"pixel matrix is {X.width}x{X.height}"
        )
    flat = rx.flat
    order = np.lexsort((np.arange(n), -flat))[:p]
    sources = tuple(
        AtomSource("anomaly", int(pixel), rank) for rank, pixel in enumerate(order)
    )
    return AtomSet(X.data[:, order], sources)


def union(bg: AtomSet, an: AtomSet) -> UnionDictionary:
    """Concatenate the two atom banks, background first.

    A pixel selected by both sources keeps only its anomaly column: letting
    it stay in the background bank would hide anomaly energy in the
    background residual.
    """
    if bg.count and an.count and bg.atoms.shape[0] != an.atoms.shape[0]:
        raise ValueError(
            f"band mismatch: background atoms have {bg.atoms.shape[0]} rows, "
            f"anomaly atoms {an.atoms.shape[0]}"
        )
    if bg.count + an.count == 0:
        raise ValueError("cannot build an empty dictionary")
    taken = set(int(i) for i in an.pixel_indices)
    keep = [k for k, s in enumerate(bg.sources) if s.pixel_index not in taken]
    atoms = np.concatenate([bg.atoms[:, keep], an.atoms], axis=1)
    sources = tuple(bg.sources[k] for k in keep) + an.sources
    return UnionDictionary(atoms, len(keep), an.count, sources)


def build_union_dictionary(
    X: PixelMatrix,
    superpixels: SuperpixelMap,
    rx: ScoreMap,
    m_per_superpixel: int = 5,
    p: int = 50,
) -> UnionDictionary:
    """End-to-end dictionary assembly from one scene."""
    return union(
        build_background(X, superpixels, m_per_superpixel),
        build_anomaly(X, rx, p),
    )
