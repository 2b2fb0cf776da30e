"""Minimal SVG line plots and heatmaps (no plotting-stack dependency).

CSV files are the authoritative outputs; these renderings exist so a run can
be eyeballed without extra tooling.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 34, 46


def _axis_ticks(lo: float, hi: float, n: int = 5):
    if hi == lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


def _si(x: float) -> str:
    return f"{x:.4g}"


def line_plot(
    path,
    x: np.ndarray,
    ys: Sequence[np.ndarray],
    labels: Optional[Sequence[str]] = None,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    emphasize: Sequence[int] = (),
) -> None:
    """Polyline plot of one or more series against a common x axis."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for y in ys]
    x0, x1 = float(x.min()), float(x.max())
    allv = np.concatenate(ys)
    y0, y1 = float(allv.min()), float(allv.max())
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    iw, ih = _W - _ML - _MR, _H - _MT - _MB

    def px(v):
        return _ML + (v - x0) / (x1 - x0 or 1.0) * iw

    def py(v):
        return _MT + (y1 - v) / (y1 - y0) * ih

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{iw}" height="{ih}" fill="none" stroke="#333"/>',
        f'<text x="{_W/2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{_ML + iw/2:.0f}" y="{_H-10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{_MT + ih/2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MT + ih/2:.0f})">{ylabel}</text>',
    ]
    for tx in _axis_ticks(x0, x1):
        parts.append(f'<line x1="{px(tx):.1f}" y1="{_MT+ih}" x2="{px(tx):.1f}" y2="{_MT+ih+4}" stroke="#333"/>')
        parts.append(f'<text x="{px(tx):.1f}" y="{_MT+ih+18}" text-anchor="middle">{_si(tx)}</text>')
    for ty in _axis_ticks(y0, y1):
        parts.append(f'<line x1="{_ML-4}" y1="{py(ty):.1f}" x2="{_ML}" y2="{py(ty):.1f}" stroke="#333"/>')
        parts.append(f'<text x="{_ML-8}" y="{py(ty)+4:.1f}" text-anchor="end">{_si(ty)}</text>')
    for i, y in enumerate(ys):
        color = _PALETTE[i % len(_PALETTE)]
        width = 2.2 if i in emphasize else 1.1
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x, y))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>')
    if labels:
        for i, lab in enumerate(labels):
            color = _PALETTE[i % len(_PALETTE)]
            yy = _MT + 14 + 14 * i
            parts.append(f'<line x1="{_ML+8}" y1="{yy-4}" x2="{_ML+28}" y2="{yy-4}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_ML+32}" y="{yy}">{lab}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _heat_color(v: float) -> str:
    # white -> amber -> dark red
    v = min(max(v, 0.0), 1.0)
    if v < 0.5:
        t = v / 0.5
        r, g, b = 255, int(255 - 80 * t), int(255 - 200 * t)
    else:
        t = (v - 0.5) / 0.5
        r, g, b = int(255 - 120 * t), int(175 - 150 * t), int(55 - 25 * t)
    return f"rgb({r},{g},{b})"


def heatmap(path, matrix: np.ndarray, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Cell grid of a nonnegative matrix, scaled to its maximum."""
    m = np.asarray(matrix, dtype=float)
    vmax = float(m.max()) or 1.0
    rows, cols = m.shape
    side = max(6, min(28, 420 // max(rows, cols)))
    w, h = _ML + cols * side + _MR, _MT + rows * side + _MB
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w/2:.0f}" y="20" text-anchor="middle" font-size="14">{title} (max {vmax:.3g})</text>',
        f'<text x="{_ML + cols*side/2:.0f}" y="{h-10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{_MT + rows*side/2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MT + rows*side/2:.0f})">{ylabel}</text>',
    ]
    for i in range(rows):
        for j in range(cols):
            color = _heat_color(m[i, j] / vmax)
            parts.append(
                f'<rect x="{_ML + j*side}" y="{_MT + i*side}" width="{side}" height="{side}" '
                f'fill="{color}" stroke="#ddd" stroke-width="0.5"/>'
            )
    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{cols*side}" height="{rows*side}" fill="none" stroke="#333"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
