"""Minimal static SVG line chart for Murphy curves."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#000000", "#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#ff7f0e")


def line_chart(x, series: dict[str, np.ndarray], title: str = "", xlabel: str = "z",
               ylabel: str = "expected score", width: int = 640, height: int = 420) -> str:
    x = np.asarray(x, dtype=float)
    ml, mr, mt, mb = 70, 150, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    ymax = max(float(np.max(v)) for v in series.values()) or 1.0
    x0, x1 = float(x.min()), float(x.max())
    span = (x1 - x0) or 1.0

    def px(v):
        return ml + (v - x0) / span * pw

    def py(v):
        return mt + ph - v / ymax * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
           f'<text x="{ml + pw / 2:.1f}" y="{mt - 14}" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text transform="translate(18,{mt + ph / 2:.1f}) rotate(-90)" text-anchor="middle">'
           f'{escape(ylabel)}</text>']
    for t in np.linspace(x0, x1, 5):
        out.append(f'<text x="{px(t):.1f}" y="{mt + ph + 16}" text-anchor="middle">{t:.3g}</text>')
    for t in np.linspace(0.0, ymax, 5):
        out.append(f'<text x="{ml - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    for i, (name, v) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, np.asarray(v, dtype=float)))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = mt + 16 + 18 * i
        out.append(f'<line x1="{ml + pw + 12}" y1="{ly}" x2="{ml + pw + 32}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 38}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
