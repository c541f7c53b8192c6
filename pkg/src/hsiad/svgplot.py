"""Minimal SVG emitters for inspection artifacts.

Plain string assembly, no drawing dependencies; output is deterministic for
identical inputs so artifacts diff cleanly across runs.
"""

from __future__ import annotations

import numpy as np

from .evaluation import PERCENTILE_LEVELS, RocReport, SeparabilityStats

__all__ = ["roc_svg", "separability_svg", "superpixel_overlay_svg"]

_MARGIN = 50.0
_PLOT = 400.0


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _axes(title: str, x_label: str, y_label: str) -> list[str]:
    size = _PLOT + 2 * _MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" '
        f'height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>',
        f'<text x="{size / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_PLOT}" height="{_PLOT}" '
        f'fill="none" stroke="black"/>',
        f'<text x="{_MARGIN + _PLOT / 2:.0f}" y="{2 * _MARGIN + _PLOT - 10:.0f}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="14" y="{_MARGIN + _PLOT / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {_MARGIN + _PLOT / 2:.0f})">{y_label}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = _MARGIN + frac * _PLOT
        y = _MARGIN + (1.0 - frac) * _PLOT
        parts.append(
            f'<line x1="{x:.1f}" y1="{_MARGIN + _PLOT:.1f}" x2="{x:.1f}" '
            f'y2="{_MARGIN + _PLOT + 5:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{_MARGIN + _PLOT + 18:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_fmt(frac)}</text>'
        )
        parts.append(
            f'<line x1="{_MARGIN - 5:.1f}" y1="{y:.1f}" x2="{_MARGIN:.1f}" '
            f'y2="{y:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_MARGIN - 8:.1f}" y="{y + 3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(frac)}</text>'
        )
    return parts


def roc_svg(report: RocReport) -> str:
    """Detection-vs-false-alarm curve with the AUC values printed inline."""
    parts = _axes("ROC", "false alarm rate", "detection probability")
    pts = " ".join(
        f"{_MARGIN + x * _PLOT:.2f},{_MARGIN + (1.0 - y) * _PLOT:.2f}"
        for x, y in zip(report.pf, report.pd)
    )
    parts.append(
        f'<polyline points="{pts}" fill="none" stroke="#1459c7" stroke-width="1.5"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN}" y1="{_MARGIN + _PLOT}" x2="{_MARGIN + _PLOT}" '
        f'y2="{_MARGIN}" stroke="#999999" stroke-dasharray="6 4"/>'
    )
    parts.append(
        f'<text x="{_MARGIN + 0.55 * _PLOT:.0f}" y="{_MARGIN + 0.80 * _PLOT:.0f}" '
        f'font-family="sans-serif" font-size="12">'
        f"AUC(Pd,Pf) = {report.auc_pd_pf:.4f}</text>"
    )
    parts.append(
        f'<text x="{_MARGIN + 0.55 * _PLOT:.0f}" y="{_MARGIN + 0.85 * _PLOT:.0f}" '
        f'font-family="sans-serif" font-size="12">'
        f"AUC(Pf,tau) = {report.auc_pf_tau:.4f}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)


def _box(parts: list[str], cx: float, stats: np.ndarray, color: str, label: str):
    """One percentile box: whiskers p1-p99, box p10-p90, line at the median."""
    p1, p10, p50, p90, p99 = (float(v) for v in stats)

    def y(v: float) -> float:
        return _MARGIN + (1.0 - v) * _PLOT

    half = 36.0
    parts.append(
        f'<line x1="{cx:.1f}" y1="{y(p1):.2f}" x2="{cx:.1f}" y2="{y(p99):.2f}" '
        f'stroke="{color}"/>'
    )
    parts.append(
        f'<rect x="{cx - half:.1f}" y="{y(p90):.2f}" width="{2 * half:.1f}" '
        f'height="{max(y(p10) - y(p90), 0.0):.2f}" fill="{color}" fill-opacity="0.25" '
        f'stroke="{color}"/>'
    )
    parts.append(
        f'<line x1="{cx - half:.1f}" y1="{y(p50):.2f}" x2="{cx + half:.1f}" '
        f'y2="{y(p50):.2f}" stroke="{color}" stroke-width="2"/>'
    )
    parts.append(
        f'<text x="{cx:.1f}" y="{_MARGIN + _PLOT + 32:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11">{label}</text>'
    )


def separability_svg(stats: SeparabilityStats) -> str:
    """Background and anomaly percentile boxes on a shared [0, 1] axis."""
    parts = _axes(
        f"Score separability (percentiles {'/'.join(str(p) for p in PERCENTILE_LEVELS)})",
        "",
        "normalized score",
    )
    _box(parts, _MARGIN + 0.33 * _PLOT, stats.background, "#2a7f3f", "background")
    _box(parts, _MARGIN + 0.67 * _PLOT, stats.anomaly, "#c02424", "anomaly")
    parts.append("</svg>")
    return "\n".join(parts)


def superpixel_overlay_svg(labels: np.ndarray, scale: float = 6.0) -> str:
    """Boundary drawing of a label map: one line per adjacent label change."""
    lab = np.asarray(labels)
    if lab.ndim != 2:
        raise ValueError("labels must be a 2-D map")
    h, w = lab.shape
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * scale:.0f}" '
        f'height="{h * scale:.0f}" viewBox="0 0 {w * scale:.0f} {h * scale:.0f}">',
        f'<rect width="{w * scale:.0f}" height="{h * scale:.0f}" fill="white"/>',
        '<g stroke="black" stroke-width="1">',
    ]
    rr, cc = np.nonzero(lab[:, :-1] != lab[:, 1:])
    for r, c in zip(rr, cc):
        x = (c + 1) * scale
        parts.append(
            f'<line x1="{x:.1f}" y1="{r * scale:.1f}" x2="{x:.1f}" y2="{(r + 1) * scale:.1f}"/>'
        )
    rr, cc = np.nonzero(lab[:-1, :] != lab[1:, :])
    for r, c in zip(rr, cc):
        y = (r + 1) * scale
        parts.append(
            f'<line x1="{c * scale:.1f}" y1="{y:.1f}" x2="{(c + 1) * scale:.1f}" y2="{y:.1f}"/>'
        )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts)
