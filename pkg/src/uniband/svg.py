"""Minimal self-contained SVG line chart for regret curves."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .montecarlo import RegretCurve

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
W, H = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 30, 55


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while start + k * step <= hi + 1e-9 * step:
        ticks.append(start + k * step)
        k += 1
    return ticks


def _label(x: float) -> str:
    if x == 0:
        return "0"
    if abs(x) >= 1e4 or abs(x) < 1e-2:
        return f"{x:.0e}"
    return f"{x:g}"


def render_svg(curves: Sequence[RegretCurve], log_x: bool = False, title: str = "Mean pseudo-regret") -> str:
    xs = [float(n) for c in curves for n in c.n]
    ys = [float(m) for c in curves for m in c.mean]
    x_lo, x_hi = min(xs), max(xs)
    y_hi = max(ys) if ys and max(ys) > 0 else 1.0
    fx = math.log10 if log_x else (lambda v: v)
    gx_lo, gx_hi = fx(x_lo), fx(x_hi)
    if gx_hi == gx_lo:
        gx_hi = gx_lo + 1.0
    y_ticks = _nice_ticks(0.0, y_hi)
    y_top = max(y_ticks[-1], y_hi)
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(v: float) -> float:
        return LEFT + (fx(v) - gx_lo) / (gx_hi - gx_lo) * pw

    def py(v: float) -> float:
        return TOP + ph - v / y_top * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    if log_x:
        x_ticks = [10.0**k for k in range(math.ceil(gx_lo), math.floor(gx_hi) + 1)]
    else:
        x_ticks = [t for t in _nice_ticks(x_lo, x_hi) if x_lo <= t <= x_hi]
    for t in x_ticks:
        x = px(t)
        out.append(f'<line x1="{x:.1f}" y1="{TOP + ph}" x2="{x:.1f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{TOP + ph + 18}" text-anchor="middle">{_label(t)}</text>')
    for t in y_ticks:
        y = py(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.1f}" x2="{LEFT}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.1f}" text-anchor="end">{_label(t)}</text>')
    xlabel = "n (log scale)" if log_x else "n"
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {TOP + ph / 2:.1f})">regret</text>')
    for k, curve in enumerate(curves):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{px(float(n)):.2f},{py(float(m)):.2f}" for n, m in zip(curve.n, curve.mean))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = TOP + 10 + 20 * k
        out.append(f'<line x1="{W - RIGHT + 15}" y1="{ly}" x2="{W - RIGHT + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - RIGHT + 46}" y="{ly + 4}">{escape(curve.policy)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
