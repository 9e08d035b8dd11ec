"""Deterministic SVG chart primitives.

Fixed 640x480 viewport, fixed margins, no randomness, no timestamps:
identical inputs yield byte-identical documents.  One primitive layer
(frame, axes, markers, bars, outlines) serves scatter plots, histograms,
and the violin-style distribution panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import EmptyData, NonFiniteCoordinate

WIDTH = 640
HEIGHT = 480
MARGIN_LEFT = 62
MARGIN_RIGHT = 18
MARGIN_TOP = 34
MARGIN_BOTTOM = 48

PLOT_LEFT = MARGIN_LEFT
PLOT_RIGHT = WIDTH - MARGIN_RIGHT
PLOT_TOP = MARGIN_TOP
PLOT_BOTTOM = HEIGHT - MARGIN_BOTTOM

N_TICKS = 5
PAD_FRACTION = 0.05

AXIS_STYLE = "stroke:#333;stroke-width:1;fill:none"
GRID_STYLE = "stroke:#ddd;stroke-width:0.5"
TEXT_STYLE = "font-family:sans-serif;font-size:11px;fill:#333"
TITLE_STYLE = "font-family:sans-serif;font-size:14px;fill:#111"
MARKER_STYLE = "fill:#4878a8;fill-opacity:0.75;stroke:none"
HIGHLIGHT_STYLE = "fill:#c0392b;stroke:#7b241c;stroke-width:1"
BAR_STYLE = "fill:#4878a8;stroke:#2c4a68;stroke-width:1"
OUTLINE_STYLE = "stroke:#4878a8;stroke-width:1.5;fill:#4878a8;fill-opacity:0.25"
BOX_STYLE = "stroke:#333;stroke-width:1;fill:#fff;fill-opacity:0.8"


def _num(value: float) -> str:
    """Fixed two-decimal coordinate text keeps output byte-stable."""
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def _tick_text(value: float) -> str:
    text = f"{value:.4g}"
    return "0" if text == "-0" else text


def esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


@dataclass(frozen=True, slots=True)
class Scale:
    lo: float
    hi: float
    pixel_lo: float
    pixel_hi: float

    def __call__(self, value: float) -> float:
        span = self.hi - self.lo
        frac = 0.5 if span == 0 else (value - self.lo) / span
        return self.pixel_lo + frac * (self.pixel_hi - self.pixel_lo)


def make_scale(values: Sequence[float], pixel_lo: float, pixel_hi: float) -> Scale:
    """Data range padded 5% each side; a degenerate range centers its value."""
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    else:
        pad = (hi - lo) * PAD_FRACTION
        lo, hi = lo - pad, hi + pad
    return Scale(lo=lo, hi=hi, pixel_lo=pixel_lo, pixel_hi=pixel_hi)


@dataclass
class Canvas:
    """Accumulates SVG elements in emission order."""

    parts: list[str] = field(default_factory=list)

    def add(self, element: str) -> None:
        self.parts.append(element)

    def line(self, x1: float, y1: float, x2: float, y2: float, style: str) -> None:
        self.add(
            f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" style="{style}"/>'
        )

    def rect(self, x: float, y: float, w: float, h: float, style: str) -> None:
        self.add(
            f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" height="{_num(h)}" style="{style}"/>'
        )

    def circle(self, cx: float, cy: float, r: float, style: str, title: str = "") -> None:
        core = f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(r)}" style="{style}"'
        if title:
            self.add(core + f"><title>{esc(title)}</title></circle>")
        else:
            self.add(core + "/>")

    def polyline(self, points: Sequence[tuple[float, float]], style: str) -> None:
        text = " ".join(f"{_num(x)},{_num(y)}" for x, y in points)
        self.add(f'<polyline points="{text}" style="{style}"/>')

    def polygon(self, points: Sequence[tuple[float, float]], style: str) -> None:
        text = " ".join(f"{_num(x)},{_num(y)}" for x, y in points)
        self.add(f'<polygon points="{text}" style="{style}"/>')

    def text(
        self, x: float, y: float, content: str, style: str = TEXT_STYLE, anchor: str = "middle"
    ) -> None:
        self.add(
            f'<text x="{_num(x)}" y="{_num(y)}" text-anchor="{anchor}" style="{style}">{esc(content)}</text>'
        )

    def document(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">'
        )
        body = "\n".join(f"  {part}" for part in self.parts)
        return f"{head}\n{body}\n</svg>\n"


def draw_frame(canvas: Canvas, title: str, x_label: str, y_label: str) -> None:
    canvas.rect(0, 0, WIDTH, HEIGHT, "fill:#ffffff;stroke:none")
    canvas.text(WIDTH / 2, MARGIN_TOP - 14, title, TITLE_STYLE)
    canvas.rect(
        PLOT_LEFT, PLOT_TOP, PLOT_RIGHT - PLOT_LEFT, PLOT_BOTTOM - PLOT_TOP, AXIS_STYLE
    )
    canvas.text(
        (PLOT_LEFT + PLOT_RIGHT) / 2, HEIGHT - 12, x_label, TEXT_STYLE
    )
    canvas.add(
        f'<text x="{_num(16)}" y="{_num((PLOT_TOP + PLOT_BOTTOM) / 2)}" text-anchor="middle" '
        f'style="{TEXT_STYLE}" transform="rotate(-90 {_num(16)} '
        f'{_num((PLOT_TOP + PLOT_BOTTOM) / 2)})">{esc(y_label)}</text>'
    )


def draw_x_ticks(canvas: Canvas, scale: Scale) -> None:
    for i in range(N_TICKS):
        value = scale.lo + (scale.hi - scale.lo) * i / (N_TICKS - 1)
        px = scale(value)
        canvas.line(px, PLOT_TOP, px, PLOT_BOTTOM, GRID_STYLE)
        canvas.line(px, PLOT_BOTTOM, px, PLOT_BOTTOM + 4, AXIS_STYLE)
        canvas.text(px, PLOT_BOTTOM + 16, _tick_text(value), TEXT_STYLE)


def draw_y_ticks(canvas: Canvas, scale: Scale) -> None:
    for i in range(N_TICKS):
        value = scale.lo + (scale.hi - scale.lo) * i / (N_TICKS - 1)
        py = scale(value)
        canvas.line(PLOT_LEFT, py, PLOT_RIGHT, py, GRID_STYLE)
        canvas.line(PLOT_LEFT - 4, py, PLOT_LEFT, py, AXIS_STYLE)
        canvas.text(PLOT_LEFT - 8, py + 4, _tick_text(value), TEXT_STYLE, anchor="end")


@dataclass(frozen=True, slots=True)
class AxesSpec:
    title: str
    x_label: str
    y_label: str


def render_scatter(
    points: Sequence[tuple], axes: AxesSpec
) -> str:
    """Scatter plot of (x, y, label[, highlight]) tuples.

    Highlighted points draw on top in a distinct warm style; every marker
    carries its label as a tooltip title.
    """
    if not points:
        raise EmptyData("no points to plot")
    for p in points:
        if not (math.isfinite(p[0]) and math.isfinite(p[1])):
            raise NonFiniteCoordinate(f"point {p[2] if len(p) > 2 else ''!r}")

    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_scale = make_scale(xs, PLOT_LEFT, PLOT_RIGHT)
    y_scale = make_scale(ys, PLOT_BOTTOM, PLOT_TOP)

    canvas = Canvas()
    draw_frame(canvas, axes.title, axes.x_label, axes.y_label)
    draw_x_ticks(canvas, x_scale)
    draw_y_ticks(canvas, y_scale)

    plain = [p for p in points if not (len(p) > 3 and p[3])]
    marked = [p for p in points if len(p) > 3 and p[3]]
    for p in plain:
        canvas.circle(x_scale(p[0]), y_scale(p[1]), 3, MARKER_STYLE, str(p[2]) if len(p) > 2 else "")
    for p in marked:
        canvas.circle(x_scale(p[0]), y_scale(p[1]), 4.5, HIGHLIGHT_STYLE, str(p[2]) if len(p) > 2 else "")
    return canvas.document()


def render_bars(
    bars: Sequence[tuple[str, float]], axes: AxesSpec
) -> str:
    """Vertical bar chart of (category, value) pairs in given order."""
    if not bars:
        raise EmptyData("no bars to plot")
    values = [v for _, v in bars]
    for (name, v) in bars:
        if not math.isfinite(v):
            raise NonFiniteCoordinate(f"bar {name!r}")
    y_scale = make_scale([0.0, *values], PLOT_BOTTOM, PLOT_TOP)

    canvas = Canvas()
    draw_frame(canvas, axes.title, axes.x_label, axes.y_label)
    draw_y_ticks(canvas, y_scale)

    n = len(bars)
    span = PLOT_RIGHT - PLOT_LEFT
    slot = span / n
    bar_width = slot * 0.6
    baseline = y_scale(0.0)
    for i, (name, value) in enumerate(bars):
        cx = PLOT_LEFT + slot * (i + 0.5)
        top = y_scale(value)
        canvas.rect(cx - bar_width / 2, min(top, baseline), bar_width, abs(baseline - top), BAR_STYLE)
        canvas.text(cx, top - 5, _tick_text(value), TEXT_STYLE)
        canvas.text(cx, PLOT_BOTTOM + 16, name, TEXT_STYLE)
    return canvas.document()


def _silverman_bandwidth(values: Sequence[float]) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    mean = math.fsum(values) / n
    sigma = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)
    ordered = sorted(values)

    def quantile(q: float) -> float:
        pos = q * (n - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, n - 1)
        return ordered[lo] + (ordered[hi] - ordered[lo]) * (pos - lo)

    iqr = quantile(0.75) - quantile(0.25)
    candidates = [c for c in (sigma, iqr / 1.34) if c > 0]
    if not candidates:
        return 0.0
    return 0.9 * min(candidates) * n ** (-0.2)


def _kde(values: Sequence[float], grid: Sequence[float], bandwidth: float) -> list[float]:
    out = []
    norm = 1.0 / (len(values) * bandwidth * math.sqrt(2 * math.pi))
    for g in grid:
        total = math.fsum(
            math.exp(-0.5 * ((g - v) / bandwidth) ** 2) for v in values
        )
        out.append(total * norm)
    return out


def render_violins(
    groups: Sequence[tuple[str, Sequence[float]]], axes: AxesSpec
) -> str:
    """Distribution panel: kernel-density outline plus quartile box per group.

    Single-valued or zero-spread groups degrade to their box alone.
    """
    if not groups:
        raise EmptyData("no groups to plot")
    all_values = [v for _, values in groups for v in values]
    if not all_values:
        raise EmptyData("no values to plot")
    for _, values in groups:
        for v in values:
            if not math.isfinite(v):
                raise NonFiniteCoordinate("group value")
    y_scale = make_scale(all_values, PLOT_BOTTOM, PLOT_TOP)

    canvas = Canvas()
    draw_frame(canvas, axes.title, axes.x_label, axes.y_label)
    draw_y_ticks(canvas, y_scale)

    n = len(groups)
    slot = (PLOT_RIGHT - PLOT_LEFT) / n
    half_max = slot * 0.4
    for i, (name, values) in enumerate(groups):
        cx = PLOT_LEFT + slot * (i + 0.5)
        ordered = sorted(values)
        bandwidth = _silverman_bandwidth(ordered)
        if bandwidth > 0:
            lo = ordered[0] - 3 * bandwidth
            hi = ordered[-1] + 3 * bandwidth
            grid = [lo + (hi - lo) * j / 40 for j in range(41)]
            density = _kde(ordered, grid, bandwidth)
            peak = max(density)
            if peak > 0:
                right = [
                    (cx + half_max * d / peak, y_scale(g))
                    for g, d in zip(grid, density)
                ]
                left = [
                    (cx - half_max * d / peak, y_scale(g))
                    for g, d in reversed(list(zip(grid, density)))
                ]
                canvas.polygon(right + left, OUTLINE_STYLE)
        _draw_box(canvas, cx, ordered, y_scale, slot * 0.12)
        canvas.text(cx, PLOT_BOTTOM + 16, name, TEXT_STYLE)
    return canvas.document()


def _draw_box(
    canvas: Canvas, cx: float, ordered: Sequence[float], y_scale: Scale, half: float
) -> None:
    n = len(ordered)

    def quantile(q: float) -> float:
        pos = q * (n - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, n - 1)
        return ordered[lo] + (ordered[hi] - ordered[lo]) * (pos - lo)

    q1, q2, q3 = quantile(0.25), quantile(0.5), quantile(0.75)
    canvas.line(cx, y_scale(ordered[0]), cx, y_scale(q1), AXIS_STYLE)
    canvas.line(cx, y_scale(q3), cx, y_scale(ordered[-1]), AXIS_STYLE)
    canvas.rect(
        cx - half, y_scale(q3), 2 * half, abs(y_scale(q1) - y_scale(q3)), BOX_STYLE
    )
    canvas.line(cx - half, y_scale(q2), cx + half, y_scale(q2), AXIS_STYLE)


def render_placeholder(title: str, message: str) -> str:
    """Empty panel for sections that were not computed."""
    canvas = Canvas()
    canvas.rect(0, 0, WIDTH, HEIGHT, "fill:#ffffff;stroke:none")
    canvas.text(WIDTH / 2, MARGIN_TOP - 14, title, TITLE_STYLE)
    canvas.text(WIDTH / 2, HEIGHT / 2, message, TEXT_STYLE)
    return canvas.document()
