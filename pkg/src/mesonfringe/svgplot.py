"""Minimal self-contained SVG line plots for fringe data."""
from __future__ import annotations

from html import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def fringe_svg(panels, width: int = 640, height: int = 400, title: str = "") -> str:
    """``panels``: list of (label, times, p_r, fit_times or None, fit_values or None)."""
    left, right, top, bottom = 60, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom
    t_all = np.concatenate([np.asarray(p[1], dtype=float) for p in panels]) if panels else np.zeros(1)
    t0, t1 = float(t_all.min()), float(t_all.max())
    if t1 <= t0:
        t1 = t0 + 1.0

    def sx(t):
        return left + (t - t0) / (t1 - t0) * pw

    def sy(p):
        return top + (1.0 - p) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for k in range(5):
        p = k / 4
        out.append(f'<text x="{left - 6}" y="{sy(p) + 4:.2f}" text-anchor="end">{p:.2f}</text>')
        t = t0 + k / 4 * (t1 - t0)
        out.append(f'<text x="{sx(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{t:.3g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">T</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">P_R</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="18" text-anchor="middle">{escape(title)}</text>')

    for i, (label, t, p, ft, fp) in enumerate(panels):
        color = COLORS[i % len(COLORS)]
        for x, y in zip(t, p):
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}"/>')
        if ft is not None:
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(ft, fp))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        out.append(f'<text x="{left + 8}" y="{top + 16 + 14 * i}" fill="{color}">'
                   f'{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
