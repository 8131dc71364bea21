"""
SVG figures: Moran scatter plot, correlogram, node-index histogram.

Output is plain SVG text built from the inputs alone (no timestamps, no
random ids), so identical inputs give byte-identical files. All colours and
sizes live in :data:`STYLE`.
"""

from __future__ import annotations

import math
from html import escape
from pathlib import Path

import numpy as np

from .errors import InputError
from .stats import QUADRANTS, CorrelogramPoint, MoranScatter

STYLE = {
    "width": 640,
    "height": 480,
    "margin": (40, 30, 60, 70),  # top, right, bottom, left
    "font": "Helvetica, Arial, sans-serif",
    "font_size": 12,
    "axis": "#333333",
    "grid": "#dddddd",
    "zero_line": "#888888",
    "marker_radius": 4.0,
    "stroke_width": 1.5,
    "quadrant_colors": {"HH": "#d62728", "HL": "#ff9896", "LH": "#9ecae1", "LL": "#1f77b4"},
    "regression": "#000000",
    "outlier_text": "#444444",
    "correlogram": "#1f77b4",
    "bar": "#9e9e9e",
    "bar_highlight": "#ff7f0e",
}


def _num(v: float) -> str:
    """Fixed, locale-free number formatting for coordinates."""
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _label(v: float, digits: int = 3) -> str:
    s = f"{v:.{digits}g}"
    return s.replace("-", "−")


def nice_ticks(lo: float, hi: float, target: int = 6) -> np.ndarray:
    """Round tick positions covering [lo, hi] with a 1-2-5 step."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InputError("non-finite axis range")
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step + 1e-9) * step
    stop = math.ceil(hi / step - 1e-9) * step
    n = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(n), 12)


class _Canvas:
    def __init__(self, xlim, ylim, style=None):
        self.s = dict(STYLE, **(style or {}))
        self.xt = nice_ticks(*xlim)
        self.yt = nice_ticks(*ylim)
        self.x0, self.x1 = self.xt[0], self.xt[-1]
        self.y0, self.y1 = self.yt[0], self.yt[-1]
        top, right, bottom, left = self.s["margin"]
        self.left, self.top = left, top
        self.pw = self.s["width"] - left - right
        self.ph = self.s["height"] - top - bottom
        self.parts: list[str] = []

    def px(self, x: float) -> float:
        return self.left + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y: float) -> float:
        return self.top + (self.y1 - y) / (self.y1 - self.y0) * self.ph

    def add(self, s: str):
        self.parts.append(s)

    def text(self, x, y, s, anchor="middle", cls="", extra=""):
        c = f' class="{cls}"' if cls else ""
        self.add(f'<text x="{_num(x)}" y="{_num(y)}" text-anchor="{anchor}"{c}{extra}>'
                 f"{escape(s)}</text>")

    def axes(self, xlabel: str, ylabel: str, title: str = ""):
        s = self.s
        for t in self.xt:
            x = self.px(t)
            self.add(f'<line x1="{_num(x)}" y1="{_num(self.top)}" x2="{_num(x)}" '
                     f'y2="{_num(self.top + self.ph)}" stroke="{s["grid"]}" stroke-width="0.5"/>')
            self.text(x, self.top + self.ph + 16, _label(t, 4), cls="tick")
        for t in self.yt:
            y = self.py(t)
            self.add(f'<line x1="{_num(self.left)}" y1="{_num(y)}" x2="{_num(self.left + self.pw)}" '
                     f'y2="{_num(y)}" stroke="{s["grid"]}" stroke-width="0.5"/>')
            self.text(self.left - 6, y + 4, _label(t, 4), anchor="end", cls="tick")
        self.add(f'<rect x="{_num(self.left)}" y="{_num(self.top)}" width="{_num(self.pw)}" '
                 f'height="{_num(self.ph)}" fill="none" stroke="{s["axis"]}"/>')
        self.text(self.left + self.pw / 2, s["height"] - 18, xlabel, cls="xlabel")
        yx, yy = 18, self.top + self.ph / 2
        self.text(yx, yy, ylabel, cls="ylabel", extra=f' transform="rotate(-90 {_num(yx)} {_num(yy)})"')
        if title:
            self.text(self.left + self.pw / 2, self.top - 14, title, cls="title")

    def svg(self) -> str:
        s = self.s
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{s["width"]}" height="{s["height"]}" '
                f'viewBox="0 0 {s["width"]} {s["height"]}" font-family="{s["font"]}" '
                f'font-size="{s["font_size"]}">')
        bg = f'<rect width="{s["width"]}" height="{s["height"]}" fill="#ffffff"/>'
        return "\n".join([head, bg, *self.parts, "</svg>"]) + "\n"


def _pad(lo, hi, frac=0.05):
    span = hi - lo
    if span <= 0:
        span = max(abs(lo), 1.0)
    return lo - frac * span, hi + frac * span


def _write(svg: str, out_path) -> str:
    if out_path is not None:
        try:
            Path(out_path).write_text(svg, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {out_path}: {exc}") from exc
    return svg


def render_scatter(scatter: MoranScatter, out_path=None, p_values=None, alpha: float = 0.01,
                   outliers_k: float | None = None, title: str = "", style=None) -> str:
    """Moran scatter plot: z against its lag, quadrant colours, dotted slope line.

    With ``p_values`` (one per point) markers with ``p < alpha`` are filled
    and the rest drawn hollow. With ``outliers_k`` points whose regression
    residual exceeds that many residual SDs are labelled.
    """
    n = len(scatter)
    if n == 0:
        raise InputError("empty scatter")
    if p_values is not None and len(p_values) != n:
        raise InputError("p_values must have one entry per point")
    z, zl = scatter.z, scatter.lagged
    lo = min(z.min(), zl.min(), 0.0)
    hi = max(z.max(), zl.max(), 0.0)
    cv = _Canvas(_pad(lo, hi), _pad(lo, hi), style)
    s = cv.s
    cv.axes("z (centered value)", "lagged z", title)
    # quadrant split lines
    cv.add(f'<line class="zero" x1="{_num(cv.px(0))}" y1="{_num(cv.top)}" x2="{_num(cv.px(0))}" '
           f'y2="{_num(cv.top + cv.ph)}" stroke="{s["zero_line"]}"/>')
    cv.add(f'<line class="zero" x1="{_num(cv.left)}" y1="{_num(cv.py(0))}" x2="{_num(cv.left + cv.pw)}" '
           f'y2="{_num(cv.py(0))}" stroke="{s["zero_line"]}"/>')
    # regression line through the origin, clipped to the plot box
    xa, xb = cv.x0, cv.x1
    ya, yb = scatter.slope * xa, scatter.slope * xb
    cv.add(f'<clipPath id="plotbox"><rect x="{_num(cv.left)}" y="{_num(cv.top)}" '
           f'width="{_num(cv.pw)}" height="{_num(cv.ph)}"/></clipPath>')
    cv.add(f'<line class="regression" x1="{_num(cv.px(xa))}" y1="{_num(cv.py(ya))}" '
           f'x2="{_num(cv.px(xb))}" y2="{_num(cv.py(yb))}" stroke="{s["regression"]}" '
           f'stroke-dasharray="2,3" stroke-width="{s["stroke_width"]}" clip-path="url(#plotbox)"/>')
    quads = scatter.quadrant
    flags = scatter.outliers(outliers_k) if outliers_k is not None else np.zeros(n, dtype=bool)
    r = s["marker_radius"]
    for i in range(n):
        col = s["quadrant_colors"][quads[i]]
        solid = p_values is None or (p_values[i] is not None and p_values[i] < alpha)
        fill = col if solid else "none"
        label = escape(str(scatter.labels[i]), quote=True)
        cv.add(f'<circle class="point {quads[i]} {"solid" if solid else "hollow"}" data-label="{label}" '
               f'cx="{_num(cv.px(z[i]))}" cy="{_num(cv.py(zl[i]))}" r="{_num(r)}" fill="{fill}" '
               f'stroke="{col}" stroke-width="{s["stroke_width"]}"/>')
        if flags[i]:
            cv.text(cv.px(z[i]) + r + 2, cv.py(zl[i]) - r, str(scatter.labels[i]), anchor="start",
                    cls="outlier", extra=f' fill="{s["outlier_text"]}"')
    cv.text(cv.left + 8, cv.top + 16, f"slope = {_label(scatter.slope)}", anchor="start", cls="slope")
    present = [q for q in QUADRANTS if q in quads]
    for k, q in enumerate(present):
        y = cv.top + 16 + 16 * k
        x = cv.left + cv.pw - 50
        cv.add(f'<circle class="legend {q}" cx="{_num(x)}" cy="{_num(y - 4)}" r="{_num(r)}" '
               f'fill="{s["quadrant_colors"][q]}"/>')
        cv.text(x + 8, y, q, anchor="start", cls="legend-text")
    return _write(cv.svg(), out_path)


def render_correlogram(points: list[CorrelogramPoint], out_path=None, alpha: float = 0.01,
                       title: str = "", style=None) -> str:
    """Correlogram: I(d) against d; filled markers where ``p < alpha``, gaps at undefined d."""
    defined = [p for p in points if p.value is not None]
    if not defined:
        raise InputError("correlogram has no defined points")
    ds = [p.d for p in points]
    vals = [p.value for p in defined]
    cv = _Canvas(_pad(min(ds) - 0.5, max(ds) + 0.5, 0.0), _pad(min(min(vals), 0.0), max(max(vals), 0.0)),
                 style)
    s = cv.s
    col = s["correlogram"]
    cv.axes("distance class d", "I(d)", title)
    cv.add(f'<line class="zero" x1="{_num(cv.left)}" y1="{_num(cv.py(0))}" x2="{_num(cv.left + cv.pw)}" '
           f'y2="{_num(cv.py(0))}" stroke="{s["zero_line"]}"/>')
    segment: list[str] = []
    segments = []
    for p in points:
        if p.value is None:
            if segment:
                segments.append(segment)
            segment = []
            continue
        segment.append(f"{_num(cv.px(p.d))},{_num(cv.py(p.value))}")
    if segment:
        segments.append(segment)
    for seg in segments:
        cv.add(f'<polyline class="trace" points="{" ".join(seg)}" fill="none" stroke="{col}" '
               f'stroke-width="{s["stroke_width"]}"/>')
    r = s["marker_radius"]
    for p in defined:
        solid = p.p_value is not None and p.p_value < alpha
        cv.add(f'<circle class="point {"solid" if solid else "hollow"}" data-d="{p.d}" '
               f'cx="{_num(cv.px(p.d))}" cy="{_num(cv.py(p.value))}" r="{_num(r)}" '
               f'fill="{col if solid else "#ffffff"}" stroke="{col}" stroke-width="{s["stroke_width"]}"/>')
    return _write(cv.svg(), out_path)


def histogram_bins(values: np.ndarray, bins: int = 20) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts, edges and per-value bin index (last bin closed on the right)."""
    counts, edges = np.histogram(values, bins=bins)
    idx = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, len(counts) - 1)
    return counts, edges, idx


def render_local_histogram(values, p_values, out_path=None, alpha: float = 0.01, bins: int = 20,
                           title: str = "", style=None) -> str:
    """Histogram of node indices; a bin is highlighted if any of its nodes has ``p < alpha``."""
    v = np.asarray(values, dtype=float)
    p = np.asarray([np.nan if q is None else q for q in p_values], dtype=float)
    if len(v) != len(p):
        raise InputError("values and p_values differ in length")
    keep = np.isfinite(v)
    v, p = v[keep], p[keep]
    if len(v) == 0:
        raise InputError("no values to plot")
    counts, edges, idx = histogram_bins(v, bins)
    hot = np.zeros(len(counts), dtype=bool)
    hot[idx[np.nan_to_num(p, nan=np.inf) < alpha]] = True
    cv = _Canvas((edges[0], edges[-1]), (0, max(counts.max(), 1)), style)
    s = cv.s
    cv.axes("node Moran index", "count", title)
    for b, c in enumerate(counts):
        if c == 0:
            continue
        x0, x1 = cv.px(edges[b]), cv.px(edges[b + 1])
        y = cv.py(c)
        color = s["bar_highlight"] if hot[b] else s["bar"]
        cv.add(f'<rect class="bar{" significant" if hot[b] else ""}" data-bin="{b}" data-count="{c}" '
               f'x="{_num(x0)}" y="{_num(y)}" width="{_num(max(x1 - x0 - 1, 0.5))}" '
               f'height="{_num(cv.py(0) - y)}" fill="{color}"/>')
    return _write(cv.svg(), out_path)
