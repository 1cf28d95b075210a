"""Static SVG output: spectrogram heatmaps and filter-vs-truth line plots.

Written by hand to keep plotting out of the dependency list; the files
are small and need nothing beyond a browser to view.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

# viridis anchors
_RAMP = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=float)
_LINE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _color(v: float) -> str:
    v = min(max(v, 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(v), len(_RAMP) - 2)
    c = _RAMP[i] + (v - i) * (_RAMP[i + 1] - _RAMP[i])
    return "#%02x%02x%02x" % tuple(int(round(x)) for x in c)


def _frame(width, height, body, title) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">')
    ttl = f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-size="13">{escape(title)}</text>'
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', ttl, *body, "</svg>\n"])


def heatmap(values, x_ticks, y_ticks, path=None, title="", log_scale=True,
            x_label="block centre t", y_label="frequency w") -> str:
    """Cells coloured by (log) value; rows of ``values`` run along x, columns along y."""
    v = np.asarray(values, dtype=float)
    if log_scale:
        v = np.log10(np.maximum(v, np.finfo(float).tiny))
    lo, hi = float(np.min(v)), float(np.max(v))
    scaled = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
    n_x, n_y = v.shape
    left, top, plot_w, plot_h = 60, 28, 480, 300
    cw, ch = plot_w / n_x, plot_h / n_y
    body = []
    for i in range(n_x):
        for j in range(n_y):
            # low frequencies at the bottom
            body.append(f'<rect x="{left + i * cw:.2f}" y="{top + plot_h - (j + 1) * ch:.2f}" '
                        f'width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" fill="{_color(scaled[i, j])}"/>')
    for i in np.unique(np.linspace(0, n_x - 1, min(n_x, 6)).astype(int)):
        body.append(f'<text x="{left + (i + 0.5) * cw:.1f}" y="{top + plot_h + 14}" '
                    f'text-anchor="middle">{x_ticks[i]:g}</text>')
    for j in np.unique(np.linspace(0, n_y - 1, min(n_y, 6)).astype(int)):
        body.append(f'<text x="{left - 4}" y="{top + plot_h - (j + 0.5) * ch + 4:.1f}" '
                    f'text-anchor="end">{y_ticks[j]:.2f}</text>')
    body.append(f'<text x="{left + plot_w / 2}" y="{top + plot_h + 30}" text-anchor="middle">{escape(x_label)}</text>')
    body.append(f'<text x="14" y="{top + plot_h / 2}" transform="rotate(-90 14 {top + plot_h / 2})" '
                f'text-anchor="middle">{escape(y_label)}</text>')
    # colour bar
    bx = left + plot_w + 16
    for k in range(50):
        body.append(f'<rect x="{bx}" y="{top + plot_h - (k + 1) * plot_h / 50:.2f}" width="12" '
                    f'height="{plot_h / 50 + 0.05:.2f}" fill="{_color(k / 49)}"/>')
    unit = "log10 " if log_scale else ""
    body.append(f'<text x="{bx + 16}" y="{top + plot_h}">{unit}{lo:.3g}</text>')
    body.append(f'<text x="{bx + 16}" y="{top + 10}">{unit}{hi:.3g}</text>')
    svg = _frame(left + plot_w + 100, top + plot_h + 44, body, title)
    if path is not None:
        Path(path).write_text(svg)
    return svg


def line_plot(t, curves: dict, path=None, title="", x_label="t", y_label="coefficient",
              dashed=()) -> str:
    """Overlay of named curves sharing one time axis; names in ``dashed`` get dashed strokes."""
    t = np.asarray(t, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in curves.items()}
    allv = np.concatenate([v[np.isfinite(v)] for v in ys.values()]) if ys else np.zeros(1)
    lo, hi = float(allv.min()), float(allv.max())
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    left, top, plot_w, plot_h = 60, 28, 520, 280
    t0, t1 = float(t.min()), float(t.max()) if t.size > 1 else float(t.min()) + 1

    def sx(v):
        return left + (v - t0) / (t1 - t0) * plot_w

    def sy(v):
        return top + plot_h - (v - lo) / (hi - lo) * plot_h

    step = max(1, t.size // 800)
    body = [f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#888"/>']
    for k, (name, y) in enumerate(ys.items()):
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(t[::step], y[::step]))
        dash = ' stroke-dasharray="6,3"' if name in dashed else ""
        color = _LINE_COLORS[k % len(_LINE_COLORS)]
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"{dash}/>')
        body.append(f'<text x="{left + plot_w + 8}" y="{top + 14 + 14 * k}" fill="{color}">{escape(str(name))}</text>')
    for v in np.linspace(lo, hi, 5):
        body.append(f'<text x="{left - 4}" y="{sy(v) + 4:.1f}" text-anchor="end">{v:.2f}</text>')
    for v in np.linspace(t0, t1, 5):
        body.append(f'<text x="{sx(v):.1f}" y="{top + plot_h + 14}" text-anchor="middle">{v:g}</text>')
    body.append(f'<text x="{left + plot_w / 2}" y="{top + plot_h + 30}" text-anchor="middle">{escape(x_label)}</text>')
    body.append(f'<text x="14" y="{top + plot_h / 2}" transform="rotate(-90 14 {top + plot_h / 2})" '
                f'text-anchor="middle">{escape(y_label)}</text>')
    svg = _frame(left + plot_w + 140, top + plot_h + 44, body, title)
    if path is not None:
        Path(path).write_text(svg)
    return svg


def filter_overlay(filt, truth=None, lags=None, path=None, title="estimated filter") -> str:
    """Estimated ``d_t(u)`` per lag, with the true coefficients dashed when given."""
    values = np.asarray(filt.values)
    if lags is None:
        lags = range(values.shape[1])
    curves, dashed = {}, []
    for u in lags:
        curves[f"d(t,{u}) est"] = values[:, u]
        if truth is not None and u < truth.shape[1]:
            name = f"d(t,{u}) true"
            curves[name] = truth[:, u]
            dashed.append(name)
    return line_plot(np.arange(values.shape[0]), curves, path, title, dashed=tuple(dashed))
