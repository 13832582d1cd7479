"""Minimal SVG line plots for report files.

Only what the reports need: a few labelled polylines, optional shaded band,
linear or log axes, tick labels. Output is plain text and deterministic.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = (70, 20, 40, 50)  # left, right, top, bottom
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0**k for k in range(math.floor(lo), math.ceil(hi) + 1)]
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** math.floor(math.log10(span / 5.0))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def line_plot(series, title: str = "", xlabel: str = "", ylabel: str = "", logx: bool = False,
              logy: bool = False, band=None) -> str:
    """Render ``series = [(label, xs, ys), ...]`` as an SVG document.

    ``band = (xs, lower, upper)`` is drawn as a shaded polygon behind the lines.
    Non-finite points and nonpositive values on log axes are skipped.
    """
    tx = (lambda v: math.log10(v)) if logx else float
    ty = (lambda v: math.log10(v)) if logy else float

    def usable(x, y):
        return math.isfinite(x) and math.isfinite(y) and (not logx or x > 0) and (not logy or y > 0)

    pts = []
    for _, xs, ys in series:
        pts.extend((tx(x), ty(y)) for x, y in zip(xs, ys) if usable(x, y))
    if band is not None:
        for x, lo, hi in zip(*band):
            for y in (lo, hi):
                if usable(x, y):
                    pts.append((tx(x), ty(y)))
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    arr = np.array(pts)
    x0, x1 = float(arr[:, 0].min()), float(arr[:, 0].max())
    y0, y1 = float(arr[:, 1].min()), float(arr[:, 1].max())
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1, logx):
        v = math.log10(t) if logx else t
        if x0 - 1e-12 <= v <= x1 + 1e-12:
            out.append(f'<line x1="{_fmt(sx(v))}" y1="{top + ph}" x2="{_fmt(sx(v))}" y2="{top + ph + 4}" stroke="black"/>')
            out.append(f'<text x="{_fmt(sx(v))}" y="{top + ph + 16}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1, logy):
        v = math.log10(t) if logy else t
        if y0 - 1e-12 <= v <= y1 + 1e-12:
            out.append(f'<line x1="{left - 4}" y1="{_fmt(sy(v))}" x2="{left}" y2="{_fmt(sy(v))}" stroke="black"/>')
            out.append(f'<text x="{left - 6}" y="{_fmt(sy(v) + 4)}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">{escape(ylabel)}</text>')
    if band is not None:
        xs, lo, hi = band
        upper = [(tx(x), ty(y)) for x, y in zip(xs, hi) if usable(x, y)]
        lower = [(tx(x), ty(y)) for x, y in zip(xs, lo) if usable(x, y)]
        poly = upper + lower[::-1]
        if poly:
            coords = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in poly)
            out.append(f'<polygon points="{coords}" fill="#cccccc" fill-opacity="0.6" stroke="none"/>')
    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{_fmt(sx(tx(x)))},{_fmt(sy(ty(y)))}" for x, y in zip(xs, ys) if usable(x, y))
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = top + 14 + 14 * i
        out.append(f'<line x1="{left + pw - 150}" y1="{ly - 4}" x2="{left + pw - 130}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 125}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
