"""Hyperspectral anomaly detection via a union background/anomaly dictionary.

The pipeline: segment the scene into superpixels (normalized-cut
bisection), pick density-peak representatives per superpixel as background
atoms, add the strongest pixels under a Mahalanobis pre-detector as anomaly
atoms, then represent every pixel over the union dictionary with
nonnegative sum-to-one coefficients (extended ADMM, linear or kernel form).
The background-only reconstruction residual is the anomaly score, evaluated
by ROC/AUC against ground truth.
"""

from .core import (
    GroundTruthMask,
    HsiCube,
    PixelMatrix,
    ScoreMap,
    flatten,
    normalize_scores,
    unflatten,
)
from .density import (
    DensityProfile,
    cutoff_distance,
    local_density,
    min_higher_density_distance,
    pairwise_distances,
    select_representatives,
)
from .dictionary import (
    AtomSet,
    AtomSource,
    UnionDictionary,
    build_anomaly,
    build_background,
    build_union_dictionary,
    union,
)
from .errors import ConfigError, HsiadError, NumericError, RasterFormatError
from .evaluation import (
    PERCENTILE_LEVELS,
    RocReport,
    SeparabilityStats,
    roc,
    separability,
)
from .rx import BackgroundStats, fit_stats, rx_scores
from .segmentation import (
    PixelGraph,
    SuperpixelMap,
    build_graph,
    cut_value,
    ncut_value,
    segment,
)
from .solver import (
    AdmmState,
    CoefficientMatrix,
    KernelCache,
    SolverConfig,
    SolveResult,
    cr_closed_form,
    kernel_cache,
    rbf_gram,
    score_knjcr,
    score_njcr,
    solve_knjcr,
    solve_njcr,
)
from .synth import (
    ALLOWED_ABUNDANCES,
    PanelLayout,
    PanelSpec,
    background_cluster_labels,
    default_layout,
    default_panel_specs,
    generate_background,
    held_out_target,
    implant_panels,
    panel_placements,
)

__version__ = "0.1.0"

__all__ = [
    "GroundTruthMask",
    "HsiCube",
    "PixelMatrix",
    "ScoreMap",
    "flatten",
    "unflatten",
    "normalize_scores",
    "DensityProfile",
    "pairwise_distances",
    "local_density",
    "min_higher_density_distance",
    "cutoff_distance",
    "select_representatives",
    "AtomSet",
    "AtomSource",
    "UnionDictionary",
    "build_background",
    "build_anomaly",
    "build_union_dictionary",
    "union",
    "HsiadError",
    "ConfigError",
    "NumericError",
    "RasterFormatError",
    "PERCENTILE_LEVELS",
    "RocReport",
    "SeparabilityStats",
    "roc",
    "separability",
    "BackgroundStats",
    "fit_stats",
    "rx_scores",
    "PixelGraph",
    "SuperpixelMap",
    "build_graph",
    "cut_value",
    "ncut_value",
    "segment",
    "AdmmState",
    "CoefficientMatrix",
    "KernelCache",
    "SolverConfig",
    "SolveResult",
    "cr_closed_form",
    "rbf_gram",
    "kernel_cache",
    "solve_njcr",
    "solve_knjcr",
    "score_njcr",
    "score_knjcr",
    "ALLOWED_ABUNDANCES",
    "PanelLayout",
    "PanelSpec",
    "background_cluster_labels",
    "default_layout",
    "default_panel_specs",
    "generate_background",
    "held_out_target",
    "implant_panels",
    "panel_placements",
    "__version__",
]
