"""Minimal SVG line charts for flow traces; no plotting library needed."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, PANEL_H, MARGIN = 640, 220, 56
PANELS = (("Q", "Q(t)"), ("roundness", "roundness about P"), ("minH", "min H"))


def _polyline(x, y, x0, y0, w, h) -> tuple[str, tuple[float, float]]:
    lo, hi = float(np.min(y)), float(np.max(y))
    if hi - lo < 1e-300:
        lo, hi = lo - 0.5, hi + 0.5
    xs = x0 + (x - x[0]) / max(x[-1] - x[0], 1e-300) * w
    ys = y0 + h - (y - lo) / (hi - lo) * h
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))
    return pts, (lo, hi)


def write_trace_svg(trace, path: Path, title: str = "") -> None:
    t = trace.column("t")
    height = MARGIN + len(PANELS) * (PANEL_H + MARGIN)
    w = WIDTH - 2 * MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{MARGIN}" y="24" font-size="13">{escape(title)}</text>',
    ]
    for k, (col, label) in enumerate(PANELS):
        y0 = MARGIN + k * (PANEL_H + MARGIN)
        y = trace.column(col)
        parts.append(
            f'<rect x="{MARGIN}" y="{y0}" width="{w}" height="{PANEL_H}" fill="none" stroke="#999"/>'
        )
        if len(t) >= 2:
            pts, (lo, hi) = _polyline(t, y, MARGIN, y0, w, PANEL_H)
            parts.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{pts}"/>')
        else:
            lo = hi = float(y[0])
        parts.append(f'<text x="{MARGIN}" y="{y0 - 6}">{escape(label)}</text>')
        parts.append(f'<text x="4" y="{y0 + 10}">{hi:.4g}</text>')
        parts.append(f'<text x="4" y="{y0 + PANEL_H}">{lo:.4g}</text>')
        parts.append(
            f'<text x="{MARGIN + w - 40}" y="{y0 + PANEL_H + 14}">t={t[-1]:.4g}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
