"""Single-panel SVG line charts, deterministic byte-for-byte."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["render_svg", "polyline_chart"]

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)

WIDTH, HEIGHT = 640, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 56, 150, 24, 40


def _nice_step(span: float, target: int = 5) -> float:
    raw = span / max(target - 1, 1)
    power = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0):
        if mult * power >= raw:
            return mult * power
    return 10.0 * power


def _ticks(low: float, high: float) -> list[float]:
    if high <= low:
        high = low + 1.0
    step = _nice_step(high - low)
    first = math.ceil(low / step - 1e-9) * step
    values = []
    v = first
    while v <= high + 1e-9 * step:
        values.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return values


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def polyline_chart(
    names: tuple[str, ...],
    xs: np.ndarray,
    ys: np.ndarray,
    title: str | None = None,
    x_label: str = "time",
) -> str:
    """Draw one polyline per column of ys against xs.

    Output is valid SVG 1.1 and a pure function of the inputs.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if ys.ndim == 1:
        ys = ys.reshape(-1, 1)
    if xs.shape[0] < 2:
        raise ValueError("need at least two samples to draw a chart")
    if ys.shape != (xs.shape[0], len(names)):
        raise ValueError("ys shape must be (len(xs), len(names))")

    x_low, x_high = float(xs.min()), float(xs.max())
    y_low, y_high = float(ys.min()), float(ys.max())
    if y_high == y_low:
        y_low -= 1.0
        y_high += 1.0
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_low) / (x_high - x_low) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_high - y) / (y_high - y_low) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{MARGIN_LEFT}" y="16" font-family="sans-serif" font-size="13" '
            f'font-weight="bold">{escape(title)}</text>'
        )
    axis_y = MARGIN_TOP + plot_h
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{axis_y}" x2="{MARGIN_LEFT + plot_w}" y2="{axis_y}" '
        'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{axis_y}" '
        'stroke="black" stroke-width="1"/>'
    )
    for tick in _ticks(x_low, x_high):
        x = px(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{axis_y}" x2="{x:.2f}" y2="{axis_y + 5}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{axis_y + 18}" font-family="sans-serif" font-size="11" '
            f'text-anchor="middle">{escape(_fmt(tick))}</text>'
        )
    for tick in _ticks(y_low, y_high):
        y = py(tick)
        parts.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{y:.2f}" x2="{MARGIN_LEFT}" y2="{y:.2f}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{escape(_fmt(tick))}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 6}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle">{escape(x_label)}</text>'
    )
    for col, name in enumerate(names):
        color = PALETTE[col % len(PALETTE)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys[:, col]))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        legend_y = MARGIN_TOP + 14 + 18 * col
        legend_x = MARGIN_LEFT + plot_w + 12
        parts.append(
            f'<line x1="{legend_x}" y1="{legend_y - 4}" x2="{legend_x + 22}" y2="{legend_y - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{legend_x + 28}" y="{legend_y}" font-family="sans-serif" '
            f'font-size="11">{escape(name)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_svg(trajectory, title: str | None = None, x_label: str = "time") -> str:
    """Render any trajectory-shaped object (names, times, values) as SVG."""
    return polyline_chart(
        tuple(trajectory.variable_names),
        trajectory.times,
        trajectory.values,
        title=title,
        x_label=x_label,
    )
