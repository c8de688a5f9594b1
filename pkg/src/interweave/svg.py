"""Bare-bones SVG line plots and heatmaps, enough to eyeball a sweep."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
MARGIN = 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _range(values):
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _frame(title: str, xlabel: str, ylabel: str, xr, yr) -> list[str]:
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN // 2, MARGIN // 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="18" text-anchor="middle">{escape(title)}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="15" y="{(y0 + y1) // 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {(y0 + y1) // 2})">{escape(ylabel)}</text>',
        f'<text x="{x0}" y="{y0 + 15}" text-anchor="middle">{xr[0]:.3g}</text>',
        f'<text x="{x1}" y="{y0 + 15}" text-anchor="middle">{xr[1]:.3g}</text>',
        f'<text x="{x0 - 5}" y="{y0}" text-anchor="end">{yr[0]:.3g}</text>',
        f'<text x="{x0 - 5}" y="{y1 + 4}" text-anchor="end">{yr[1]:.3g}</text>',
    ]
    return out


def _scaler(xr, yr):
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN // 2, MARGIN // 2

    def sx(x):
        return x0 + (x - xr[0]) / (xr[1] - xr[0]) * (x1 - x0)

    def sy(y):
        return y0 + (y - yr[0]) / (yr[1] - yr[0]) * (y1 - y0)
    return sx, sy


def line_plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
              title: str = "", xlabel: str = "", ylabel: str = "",
              closed: bool = False) -> str:
    """One polyline per ``(label, xs, ys)``; non-finite points break the line.

    ``closed`` draws polygons instead of open curves.
    """
    xr = _range([x for _, xs, _ in series for x in xs])
    yr = _range([y for _, _, ys in series for y in ys])
    sx, sy = _scaler(xr, yr)
    out = _frame(title, xlabel, ylabel, xr, yr)
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        runs, cur = [], []
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                cur.append(f"{_fmt(sx(x))},{_fmt(sy(y))}")
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        tag = "polygon" if closed else "polyline"
        for run in runs:
            out.append(f'<{tag} points="{" ".join(run)}" fill="none" stroke="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN // 2 - 5}" y="{MARGIN // 2 + 14 * (k + 1)}" '
                   f'text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap(values: Sequence[Sequence[float]], xs: Sequence[float], ys: Sequence[float],
            title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Grey-scale cells, ``values[i][j]`` at ``(xs[j], ys[i])``; larger is darker."""
    xr = (min(xs), max(xs)) if len(xs) > 1 else _range(xs)
    yr = (min(ys), max(ys)) if len(ys) > 1 else _range(ys)
    sx, sy = _scaler(xr, yr)
    vr = _range([v for row in values for v in row])
    out = _frame(title, xlabel, ylabel, xr, yr)
    cw = (WIDTH - MARGIN // 2 - MARGIN) / max(len(xs), 1)
    ch = (HEIGHT - MARGIN - MARGIN // 2) / max(len(ys), 1)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            v = values[i][j]
            if not math.isfinite(v):
                v = vr[1] if v > 0 else vr[0]
            level = int(round(255 * (1.0 - (v - vr[0]) / (vr[1] - vr[0]))))
            out.append(f'<rect x="{_fmt(sx(x) - cw / 2)}" y="{_fmt(sy(y) - ch / 2)}" '
                       f'width="{_fmt(cw)}" height="{_fmt(ch)}" '
                       f'fill="rgb({level},{level},{level})"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
