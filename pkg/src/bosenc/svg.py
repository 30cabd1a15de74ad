"""Minimal deterministic SVG line plots and heatmaps."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
WIDTH, HEIGHT = 640, 420
MARGIN = 60


def _f(v: float) -> str:
    return f"{v:.2f}"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_plot(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    vline: float | None = None,
) -> str:
    """Overlay of polylines with point markers; missing y values (None/nan) are skipped."""
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys if y is not None and math.isfinite(y)]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{_esc(xlabel)}</text>',
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 15 {HEIGHT / 2})">{_esc(ylabel)}</text>',
    ]
    for tick in np.linspace(x0, x1, 5):
        out.append(f'<text x="{_f(sx(tick))}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{tick:.3g}</text>')
    for tick in np.linspace(y0, y1, 5):
        out.append(f'<text x="{MARGIN - 6}" y="{_f(sy(tick) + 4)}" text-anchor="end">{tick:.3g}</text>')
    if vline is not None and x0 <= vline <= x1:
        out.append(
            f'<line x1="{_f(sx(vline))}" y1="{MARGIN}" x2="{_f(sx(vline))}" y2="{HEIGHT - MARGIN}" '
            'stroke="red" stroke-dasharray="6,4"/>'
        )
    for i, (name, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = [(sx(x), sy(y)) for x, y in zip(xs, ys) if y is not None and math.isfinite(y)]
        if len(pts) > 1:
            path = " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in pts:
            out.append(f'<circle cx="{_f(a)}" cy="{_f(b)}" r="2.5" fill="{color}"/>')
        ly = MARGIN + 16 + 16 * i
        out.append(f'<rect x="{WIDTH - MARGIN - 150}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 135}" y="{ly}">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _diverging(v: float) -> str:
    """Blue for negative, white at zero, red for positive; v in [-1, 1]."""
    v = max(-1.0, min(1.0, v))
    if v >= 0:
        r, g, b = 255, int(255 * (1 - v)), int(255 * (1 - v))
    else:
        r, g, b = int(255 * (1 + v)), int(255 * (1 + v)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(x: Sequence[float], p: Sequence[float], w: np.ndarray, title: str = "") -> str:
    """Cell heatmap of ``w[p_index, x_index]`` with a symmetric diverging color scale."""
    w = np.asarray(w)
    scale = float(np.max(np.abs(w))) or 1.0
    size = 420
    cw = size / w.shape[1]
    ch = size / w.shape[0]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * MARGIN}" height="{size + 2 * MARGIN}" '
        'font-family="sans-serif" font-size="12" shape-rendering="crispEdges">',
        f'<rect width="{size + 2 * MARGIN}" height="{size + 2 * MARGIN}" fill="white"/>',
        f'<text x="{MARGIN + size / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]
    for i in range(w.shape[0]):
        # p increases upward
        y = MARGIN + size - (i + 1) * ch
        for j in range(w.shape[1]):
            out.append(
                f'<rect x="{_f(MARGIN + j * cw)}" y="{_f(y)}" width="{_f(cw + 0.05)}" height="{_f(ch + 0.05)}" '
                f'fill="{_diverging(w[i, j] / scale)}"/>'
            )
    out.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{size}" height="{size}" fill="none" stroke="black"/>')
    out.append(f'<text x="{MARGIN + size / 2}" y="{size + MARGIN + 30}" text-anchor="middle">x  [{x[0]:.3g}, {x[-1]:.3g}]</text>')
    out.append(
        f'<text x="20" y="{MARGIN + size / 2}" text-anchor="middle" transform="rotate(-90 20 {MARGIN + size / 2})">'
        f"p  [{p[0]:.3g}, {p[-1]:.3g}]</text>"
    )
    out.append(f'<text x="{MARGIN + size}" y="{size + MARGIN + 30}" text-anchor="end">max |W| = {scale:.4g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
