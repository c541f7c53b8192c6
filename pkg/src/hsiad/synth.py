"""Synthetic test scenes: clustered backgrounds plus implanted target panels.

The background is a spatially clustered linear mixture of smooth endmember
spectra with optional Gaussian noise.  Targets are implanted on a 5x5 panel
grid (five row blocks, five abundance columns); sub-pixel panels blend the
target into the local background with the linear mixture
``x = f*t + (1-f)*b``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GroundTruthMask, HsiCube

__all__ = [
    "PanelSpec",
    "PanelLayout",
    "ALLOWED_ABUNDANCES",
    "default_panel_specs",
    "panel_placements",
    "generate_background",
    "background_cluster_labels",
    "held_out_target",
    "implant_panels",
]

ALLOWED_ABUNDANCES = (1.00, 0.25, 0.50, 0.75, 0.95)

_GAUSSIANS_PER_ENDMEMBER = 3


@dataclass(frozen=True)
class PanelSpec:
    """One row block of target panels: a size and its abundance sequence."""

    row_block: int
    panel_size: int
    abundances: tuple

    def __post_init__(self):
        if not 1 <= self.row_block <= 5:
            raise ValueError(f"row_block must be in 1..5, got {self.row_block}")
        if self.panel_size not in (1, 2):
            raise ValueError(f"panel_size must be 1 or 2, got {self.panel_size}")
        ab = tuple(float(a) for a in self.abundances)
        for a in ab:
            if a not in ALLOWED_ABUNDANCES:
                raise ValueError(
                    f"abundance {a} not in the allowed set {ALLOWED_ABUNDANCES}"
                )
        object.__setattr__(self, "abundances", ab)


@dataclass(frozen=True)
class PanelLayout:
    """Grid placement: top-left origin plus row/column spacing in pixels."""

    origin_row: int
    origin_col: int
    row_spacing: int
    col_spacing: int


def default_panel_specs() -> list[PanelSpec]:
    """Five row blocks: 2x2 panels in rows 1-2, 1x1 in rows 3-5."""
    return [
        PanelSpec(row_block=r, panel_size=(2 if r <= 2 else 1), abundances=ALLOWED_ABUNDANCES)
        for r in range(1, 6)
    ]


def default_layout(width: int = 100, height: int = 100) -> PanelLayout:
    """Evenly spread a 5x5 panel grid over the scene with a 12% border."""
    origin_row = max(1, round(0.12 * height))
    origin_col = max(1, round(0.12 * width))
    return PanelLayout(
        origin_row=origin_row,
        origin_col=origin_col,
        row_spacing=max(1, (height - 2 * origin_row) // 4),
        col_spacing=max(1, (width - 2 * origin_col) // 4),
    )


def panel_placements(specs, layout: PanelLayout):
    """Expand specs into (row, col, size, abundance) placements."""
    out = []
    for spec in specs:
        top = layout.origin_row + (spec.row_block - 1) * layout.row_spacing
        for j, abundance in enumerate(spec.abundances):
            left = layout.origin_col + j * layout.col_spacing
            out.append({"row": top, "col": left, "size": spec.panel_size, "abundance": abundance})
    return out


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def _endmember_bank(bands: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Smooth positive spectra of comparable magnitude, shape (count, bands)."""
    t = np.linspace(0.0, 1.0, bands)
    bank = np.empty((count, bands))
    for k in range(count):
        curve = np.zeros(bands)
        for _ in range(_GAUSSIANS_PER_ENDMEMBER):
            center = rng.uniform(0.0, 1.0)
            width = rng.uniform(0.08, 0.35)
            amp = rng.uniform(0.3, 1.0)
            curve += amp * np.exp(-(((t - center) / width) ** 2))
        curve += rng.uniform(-0.3, 0.3) * t
        lo, hi = curve.min(), curve.max()
        bank[k] = 0.15 + 0.7 * (curve - lo) / max(hi - lo, 1e-12)
    return bank


def _cluster_sites(width: int, height: int, materials: int, rng: np.random.Generator):
    rows = rng.uniform(0, height, size=materials)
    cols = rng.uniform(0, width, size=materials)
    return rows, cols


def background_cluster_labels(width: int, height: int, materials: int, seed: int) -> np.ndarray:
    """Per-pixel material assignment used by :func:`generate_background`.

    Nearest-site (Voronoi) labels, shape (height, width); deterministic for a
    fixed seed and identical to the assignment baked into the generated cube.
    """
    rows, cols = _cluster_sites(width, height, materials, _rng(seed, 1))
    rr, cc = np.mgrid[0:height, 0:width]
    d2 = (rr[..., None] - rows) ** 2 + (cc[..., None] - cols) ** 2
    return np.argmin(d2, axis=2)


def generate_background(
    width: int,
    height: int,
    bands: int,
    materials: int,
    seed: int,
    noise_std: float = 0.01,
    dominance: float = 0.85,
) -> HsiCube:
    """Deterministic clustered-mixture background cube.

    Each pixel is a convex combination of ``materials`` endmember spectra
    dominated by its spatial cluster's material, plus Gaussian noise of
    standard deviation ``noise_std``.
    """
    if materials < 1:
        raise ValueError("materials must be >= 1")
    if width < 1 or height < 1 or bands < 1:
        raise ValueError("scene dimensions must be positive")
    if width * height < materials:
        raise ValueError("scene must have at least as many pixels as materials")
    if not 0.0 < dominance <= 1.0:
        raise ValueError("dominance must be in (0, 1]")

    bank = _endmember_bank(bands, materials, _rng(seed, 0))
    labels = background_cluster_labels(width, height, materials, seed).reshape(-1)
    n = width * height

    if materials == 1:
        weights = np.ones((n, 1))
    else:
        weights = np.full((n, materials), (1.0 - dominance) / (materials - 1))
        weights[np.arange(n), labels] = dominance
        jitter = _rng(seed, 2).uniform(0.0, 0.05, size=(n, materials))
        weights = weights + jitter
        weights /= weights.sum(axis=1, keepdims=True)

    spectra = weights @ bank
    if noise_std > 0:
        spectra = spectra + _rng(seed, 3).normal(0.0, noise_std, size=spectra.shape)
    return HsiCube(width, height, bands, spectra.T.reshape(bands, height, width))


def held_out_target(bands: int, materials: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """An endmember not used by the background of the same (seed, materials).

    Drawn from the position after the background's endmembers in the same
    deterministic bank, so it is spectrally distinct from every mixture
    component; ``scale`` multiplies the spectrum.
    """
    bank = _endmember_bank(bands, materials + 1, _rng(seed, 0))
    return scale * bank[materials]


def implant_panels(
    base: HsiCube,
    target_spectrum: np.ndarray,
    specs,
    layout: PanelLayout,
) -> tuple[HsiCube, GroundTruthMask]:
    """Blend target panels into a background cube.

    Every implanted pixel becomes ``f*t + (1-f)*b`` for panel abundance
    ``f``; the returned mask marks exactly the modified pixels.  Panels must
    fit inside the image and must not overlap.
    """
    t = np.asarray(target_spectrum, dtype=np.float64)
    if t.shape != (base.bands,):
        raise ValueError(
            f"target spectrum has {t.shape} entries, cube has {base.bands} bands"
        )
    values = base.values.copy()
    mask = np.zeros((base.height, base.width), dtype=np.uint8)
    for place in panel_placements(specs, layout):
        f = place["abundance"]
        if not 0.0 < f <= 1.0:
            raise ValueError(f"abundance must be in (0, 1], got {f}")
        r0, c0, size = place["row"], place["col"], place["size"]
        if r0 < 0 or c0 < 0 or r0 + size > base.height or c0 + size > base.width:
            raise ValueError(
                f"panel at ({r0}, {c0}) size {size} exceeds "
                f"{base.height}x{base.width} image bounds"
            )
        if mask[r0 : r0 + size, c0 : c0 + size].any():
            raise ValueError(f"panel at ({r0}, {c0}) overlaps an earlier panel")
        block = values[:, r0 : r0 + size, c0 : c0 + size]
        values[:, r0 : r0 + size, c0 : c0 + size] = f * t[:, None, None] + (1.0 - f) * block
        mask[r0 : r0 + size, c0 : c0 + size] = 1
    cube = HsiCube(base.width, base.height, base.bands, values)
    return cube, GroundTruthMask(base.width, base.height, mask)
