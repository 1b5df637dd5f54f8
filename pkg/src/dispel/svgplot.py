"""Minimal self-contained SVG line plots (no plotting dependency)."""

from __future__ import annotations

import math

from .errors import ParameterError

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")
_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 30, 55


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(round(t, 12))
        t += step
    return out


def render_xy(series: dict, x_label: str, y_label: str, title: str = "") -> str:
    """series: {name: [(x, y), ...]} -> SVG text. Points are drawn in order."""
    if not series or all(not pts for pts in series.values()):
        raise ParameterError("nothing to plot")
    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    padx = 0.04 * (x1 - x0)
    pady = 0.06 * (y1 - y0)
    x0, x1 = x0 - padx, x1 + padx
    y0, y1 = y0 - pady, y1 + pady
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(x):
        return _ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return _MT + ph - (y - y0) / (y1 - y0) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
             f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
             f'<rect width="{_W}" height="{_H}" fill="white"/>',
             f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
             f'stroke="black"/>']
    for t in _ticks(x0 + padx, x1 - padx):
        if x0 <= t <= x1:
            parts.append(f'<line x1="{sx(t):.1f}" y1="{_MT + ph}" x2="{sx(t):.1f}" '
                         f'y2="{_MT + ph + 5}" stroke="black"/>')
            parts.append(f'<text x="{sx(t):.1f}" y="{_MT + ph + 18}" '
                         f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0 + pady, y1 - pady):
        if y0 <= t <= y1:
            parts.append(f'<line x1="{_ML - 5}" y1="{sy(t):.1f}" x2="{_ML}" '
                         f'y2="{sy(t):.1f}" stroke="black"/>')
            parts.append(f'<text x="{_ML - 8}" y="{sy(t):.1f}" text-anchor="end" '
                         f'dominant-baseline="middle">{t:g}</text>')
    parts.append(f'<text x="{_ML + pw / 2:.0f}" y="{_H - 12}" text-anchor="middle">'
                 f'{x_label}</text>')
    parts.append(f'<text x="18" y="{_MT + ph / 2:.0f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_MT + ph / 2:.0f})">{y_label}</text>')
    if title:
        parts.append(f'<text x="{_W / 2:.0f}" y="18" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    for i, (name, pts) in enumerate(series.items()):
        if not pts:
            continue
        color = _COLORS[i % len(_COLORS)]
        path = " ".join(f"{'M' if k == 0 else 'L'}{sx(x):.2f},{sy(y):.2f}"
                        for k, (x, y) in enumerate(pts))
        parts.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" '
                         f'fill="{color}"/>')
        parts.append(f'<text x="{_ML + pw - 6}" y="{_MT + 16 + 16 * i}" '
                     f'text-anchor="end" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
