"""Minimal deterministic SVG line charts.

Hand-rolled so the output is byte-identical across runs: fixed canvas, no
timestamps, fixed-precision coordinates.  Axes are log-log; nonpositive
values are dropped from their series.
"""

from __future__ import annotations

import math

WIDTH = 840
HEIGHT = 520
MARGIN_L = 70
MARGIN_R = 160
MARGIN_T = 30
MARGIN_B = 50

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_loglog_chart(series, title: str) -> str:
    """series: list of (name, xs, ys); returns SVG text."""
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y):
                pts.append((x, y))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_L}" y="20" font-family="monospace" font-size="14">{title}</text>',
    ]
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    out.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        f'fill="none" stroke="#999999"/>'
    )
    if pts:
        lx = [math.log10(p[0]) for p in pts]
        ly = [math.log10(p[1]) for p in pts]
        lx_min, lx_max = min(lx), max(lx)
        ly_min, ly_max = min(ly), max(ly)
        if lx_max - lx_min < 1e-9:
            lx_min -= 0.5
            lx_max += 0.5
        if ly_max - ly_min < 1e-9:
            ly_min -= 0.5
            ly_max += 0.5

        def sx(v):
            return x0 + (math.log10(v) - lx_min) / (lx_max - lx_min) * (x1 - x0)

        def sy(v):
            return y0 - (math.log10(v) - ly_min) / (ly_max - ly_min) * (y0 - y1)

        for dec in range(math.floor(lx_min), math.ceil(lx_max) + 1):
            if lx_min <= dec <= lx_max:
                px = x0 + (dec - lx_min) / (lx_max - lx_min) * (x1 - x0)
                out.append(
                    f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y1}" '
                    f'stroke="#dddddd"/>'
                )
                out.append(
                    f'<text x="{_fmt(px)}" y="{y0 + 18}" font-family="monospace" '
                    f'font-size="11" text-anchor="middle">1e{dec}</text>'
                )
        for dec in range(math.floor(ly_min), math.ceil(ly_max) + 1):
            if ly_min <= dec <= ly_max:
                py = y0 - (dec - ly_min) / (ly_max - ly_min) * (y0 - y1)
                out.append(
                    f'<line x1="{x0}" y1="{_fmt(py)}" x2="{x1}" y2="{_fmt(py)}" '
                    f'stroke="#dddddd"/>'
                )
                out.append(
                    f'<text x="{x0 - 6}" y="{_fmt(py + 4)}" font-family="monospace" '
                    f'font-size="11" text-anchor="end">1e{dec}</text>'
                )
        for k, (name, xs, ys) in enumerate(series):
            color = PALETTE[k % len(PALETTE)]
            coords = [
                f"{_fmt(sx(x))},{_fmt(sy(y))}"
                for x, y in zip(xs, ys)
                if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)
            ]
            if coords:
                out.append(
                    f'<polyline points="{" ".join(coords)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>'
                )
                for c in coords:
                    cx, cy = c.split(",")
                    out.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>')
    for k, (name, _, _) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        ly_pos = MARGIN_T + 16 + 18 * k
        out.append(
            f'<line x1="{x1 + 12}" y1="{ly_pos - 4}" x2="{x1 + 34}" y2="{ly_pos - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{x1 + 40}" y="{ly_pos}" font-family="monospace" '
            f'font-size="12">{name}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
