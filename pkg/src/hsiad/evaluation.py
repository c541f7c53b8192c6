"""Detection evaluation: ROC staircases, AUC variants, class separability.

The detection convention is "score >= tau", evaluated at every unique score
value plus a +inf sentinel so the curve includes both the (0,0) and (1,1)
endpoints.  Two areas are reported: the usual detection-vs-false-alarm AUC
(higher is better) and the false-alarm-vs-threshold AUC over min-max
normalized thresholds (lower means stronger background suppression).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GroundTruthMask, ScoreMap, _freeze

__all__ = [
    "RocReport",
    "SeparabilityStats",
    "PERCENTILE_LEVELS",
    "roc",
    "separability",
]

PERCENTILE_LEVELS = (1, 10, 50, 90, 99)


@dataclass(frozen=True)
class RocReport:
    """ROC staircase sampled at descending thresholds, plus both areas."""

    thresholds: np.ndarray
    pd: np.ndarray
    pf: np.ndarray
    auc_pd_pf: float
    auc_pf_tau: float

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        pd = np.asarray(self.pd, dtype=np.float64)
        pf = np.asarray(self.pf, dtype=np.float64)
        if t.ndim != 1 or t.shape != pd.shape or t.shape != pf.shape:
            raise ValueError("thresholds, pd, pf must be 1-D and equally long")
        if t.size < 2:
            raise ValueError("a ROC needs at least two threshold points")
        if not np.all(np.diff(t) < 0):
            raise ValueError("thresholds must be strictly decreasing")
        for name, arr in (("pd", pd), ("pf", pf)):
            if arr.min() < 0 or arr.max() > 1:
                raise ValueError(f"{name} values must lie in [0, 1]")
            if not np.all(np.diff(arr) >= 0):
                raise ValueError(f"{name} must be nondecreasing as thresholds fall")
        if pd[0] != 0 or pf[0] != 0 or pd[-1] != 1 or pf[-1] != 1:
            raise ValueError("curve must run from (0,0) to (1,1)")
        if not -1e-12 <= self.auc_pd_pf <= 1 + 1e-12:
            raise ValueError("auc_pd_pf out of [0, 1]")
        _freeze(self, "thresholds", t)
        _freeze(self, "pd", pd)
        _freeze(self, "pf", pf)


@dataclass(frozen=True)
class SeparabilityStats:
    """Class-conditional score percentiles at levels 1/10/50/90/99."""

    background: np.ndarray
    anomaly: np.ndarray

    def __post_init__(self):
        for name in ("background", "anomaly"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (len(PERCENTILE_LEVELS),):
                raise ValueError(
                    f"{name} must hold {len(PERCENTILE_LEVELS)} percentile values"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} percentiles must be finite")
            if not np.all(np.diff(arr) >= 0):
                raise ValueError(f"{name} percentiles must be nondecreasing")
            _freeze(self, name, arr)

    @property
    def separation_gap(self) -> float:
        """Anomaly 10th percentile minus background 90th; positive means the
        score boxes are disjoint."""
        return float(self.anomaly[1] - self.background[3])


def _class_scores(scores: ScoreMap, truth: GroundTruthMask):
    if (scores.width, scores.height) != (truth.width, truth.height):
        raise ValueError(
            f"score map is {scores.width}x{scores.height} but "
            f"truth is {truth.width}x{truth.height}"
        )
    labels = truth.labels.reshape(-1).astype(bool)
    s = scores.flat
    anomaly = s[labels]
    background = s[~labels]
    if anomaly.size == 0 or background.size == 0:
        raise ValueError("need at least one anomaly and one background pixel")
    return background, anomaly


def roc(scores: ScoreMap, truth: GroundTruthMask) -> RocReport:
    """Exhaustive-threshold ROC under the "score >= tau detects" rule.

    Thresholds are the unique score values in descending order behind a +inf
    sentinel.  auc_pd_pf integrates pd over pf by the trapezoid rule;
    auc_pf_tau integrates pf over min-max normalized finite thresholds (for
    a single unique score value it degenerates to that threshold's pf).
    """
    background, anomaly = _class_scores(scores, truth)
    thresholds = np.concatenate(([np.inf], np.unique(scores.flat)[::-1]))
    a_sorted = np.sort(anomaly)
    b_sorted = np.sort(background)
    pd = (anomaly.size - np.searchsorted(a_sorted, thresholds, side="left")) / anomaly.size
    pf = (background.size - np.searchsorted(b_sorted, thresholds, side="left")) / background.size
    auc_pd_pf = float(np.trapezoid(pd, pf))

    finite = thresholds[1:]
    if finite[0] == finite[-1]:
        auc_pf_tau = float(pf[1])
    else:
        tau_norm = (finite - finite[-1]) / (finite[0] - finite[-1])
        auc_pf_tau = float(np.trapezoid(pf[1:][::-1], tau_norm[::-1]))
    return RocReport(thresholds, pd, pf, auc_pd_pf, auc_pf_tau)


def separability(scores: ScoreMap, truth: GroundTruthMask) -> SeparabilityStats:
    """Percentile summary of normalized scores per class.

    Expects scores already min-max normalized (see
    :func:`hsiad.core.normalize_scores`); raises if values leave [0, 1].
    """
    background, anomaly = _class_scores(scores, truth)
    s = scores.flat
    if s.min() < 0 or s.max() > 1:
        raise ValueError("scores must be normalized to [0, 1] before separability")
    return SeparabilityStats(
        np.percentile(background, PERCENTILE_LEVELS),
        np.percentile(anomaly, PERCENTILE_LEVELS),
    )
