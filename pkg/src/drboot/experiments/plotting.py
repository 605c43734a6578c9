"""Static SVG boxplots, written by hand so no plotting backend is needed."""

from __future__ import annotations

from html import escape
from typing import Sequence

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 60


def box_stats(values) -> dict:
    """min, quartiles (linear interpolation) and max."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {k: float("nan") for k in ("min", "q1", "median", "q3", "max")}
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"min": float(v.min()), "q1": float(q1), "median": float(med), "q3": float(q3), "max": float(v.max())}


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, count)


def boxplot_svg(labels: Sequence[str], groups: Sequence[Sequence[float]], title: str, xlabel: str, ylabel: str) -> str:
    stats = [box_stats(g) for g in groups]
    finite = [s for s in stats if np.isfinite(s["min"])]
    lo = min((s["min"] for s in finite), default=0.0)
    hi = max((s["max"] for s in finite), default=1.0)
    pad = 0.05 * (hi - lo if hi > lo else 1.0)
    lo, hi = lo - pad, hi + pad
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def ypix(v: float) -> float:
        return MARGIN_T + plot_h * (1.0 - (v - lo) / (hi - lo))

    slot = plot_w / max(len(groups), 1)
    half = 0.3 * slot
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + plot_h}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + plot_h}" x2="{MARGIN_L + plot_w}" y2="{MARGIN_T + plot_h}" stroke="black"/>',
    ]
    for t in _ticks(lo, hi):
        y = ypix(t)
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{y:.1f}" x2="{MARGIN_L}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{y + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    for i, (label, s) in enumerate(zip(labels, stats)):
        cx = MARGIN_L + slot * (i + 0.5)
        out.append(f'<text x="{cx:.1f}" y="{MARGIN_T + plot_h + 16}" text-anchor="middle">{escape(label)}</text>')
        if not np.isfinite(s["min"]):
            continue
        out.append(f'<line x1="{cx:.1f}" y1="{ypix(s["min"]):.1f}" x2="{cx:.1f}" y2="{ypix(s["q1"]):.1f}" stroke="black"/>')
        out.append(f'<line x1="{cx:.1f}" y1="{ypix(s["q3"]):.1f}" x2="{cx:.1f}" y2="{ypix(s["max"]):.1f}" stroke="black"/>')
        for key in ("min", "max"):
            y = ypix(s[key])
            out.append(f'<line x1="{cx - half / 2:.1f}" y1="{y:.1f}" x2="{cx + half / 2:.1f}" y2="{y:.1f}" stroke="black"/>')
        top, bottom = ypix(s["q3"]), ypix(s["q1"])
        out.append(
            f'<rect x="{cx - half:.1f}" y="{top:.1f}" width="{2 * half:.1f}" height="{max(bottom - top, 0.5):.1f}" '
            'fill="#9ecae1" stroke="black"/>'
        )
        y = ypix(s["median"])
        out.append(f'<line x1="{cx - half:.1f}" y1="{y:.1f}" x2="{cx + half:.1f}" y2="{y:.1f}" stroke="#d62728" stroke-width="2"/>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    yc = MARGIN_T + plot_h / 2
    out.append(f'<text x="18" y="{yc:.1f}" text-anchor="middle" transform="rotate(-90 18 {yc:.1f})">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
