"""Minimal self-contained SVG line plots (polyline + axes + ticks, no dependencies)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 44
COLORS = ("#1f6fb2", "#c2452d", "#3a8f4d", "#8054a0")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / max(count - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * span:
        out.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return out


def line_plot(series: list[tuple[str, list[float], list[float]]], title: str,
              x_label: str = "t", y_label: str = "") -> str:
    """SVG text for one or more (label, xs, ys) polylines with shared axes."""
    if not series or not any(len(xs) for _, xs, _ in series):
        raise ValueError("nothing to plot")
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_y), max(all_y)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    inner_w = WIDTH - MARGIN_L - MARGIN_R
    inner_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x0) / (x1 - x0) * inner_w

    def py(y: float) -> float:
        return MARGIN_T + (y1 - y) / (y1 - y0) * inner_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{escape(title)}</text>',
    ]
    axis_y = MARGIN_T + inner_h
    parts.append(f'<line x1="{MARGIN_L}" y1="{axis_y}" x2="{MARGIN_L + inner_w}" '
                 f'y2="{axis_y}" stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
                 f'y2="{axis_y}" stroke="black" stroke-width="1"/>')
    for tx in _ticks(x0, x1):
        X = px(tx)
        parts.append(f'<line x1="{X:.2f}" y1="{axis_y}" x2="{X:.2f}" y2="{axis_y + 5}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{X:.2f}" y="{axis_y + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{tx:.4g}</text>')
    for ty in _ticks(y0, y1):
        Y = py(ty)
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{Y:.2f}" x2="{MARGIN_L}" y2="{Y:.2f}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{Y + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{ty:.4g}</text>')
    parts.append(f'<text x="{MARGIN_L + inner_w / 2:.1f}" y="{HEIGHT - 8}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="12">'
                 f'{escape(x_label)}</text>')
    if y_label:
        parts.append(f'<text x="14" y="{MARGIN_T + inner_h / 2:.1f}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12" '
                     f'transform="rotate(-90 14 {MARGIN_T + inner_h / 2:.1f})">'
                     f'{escape(y_label)}</text>')

    for idx, (label, xs, ys) in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{points}"/>')
        if len(series) > 1:
            ly = MARGIN_T + 14 + 16 * idx
            lx = MARGIN_L + inner_w - 150
            parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
                         f'stroke="{color}" stroke-width="1.5"/>')
            parts.append(f'<text x="{lx + 30}" y="{ly}" font-family="sans-serif" '
                         f'font-size="11">{escape(label)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(text: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
