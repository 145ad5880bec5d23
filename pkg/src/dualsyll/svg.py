"""Deterministic SVG heatmaps and bar charts (plain text, no plotting backend)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

CELL = 28
LABEL_W = 48
HEADER_H = 40

_WHITE = (255, 255, 255)
_SEQ_HIGH = (8, 48, 107)
_DIV_LOW = (33, 102, 172)
_DIV_HIGH = (178, 24, 43)


def _lerp(c0, c1, t):
    return tuple(int(round(a + (b - a) * t)) for a, b in zip(c0, c1))


def _hex(rgb) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def sequential_color(v: float) -> str:
    """[0, 1] -> white..dark blue; values outside are clipped."""
    return _hex(_lerp(_WHITE, _SEQ_HIGH, min(1.0, max(0.0, float(v)))))


def diverging_color(v: float, vmax: float) -> str:
    """[-vmax, +vmax] -> blue..white..red, white at zero."""
    if vmax <= 0:
        return _hex(_WHITE)
    t = min(1.0, max(-1.0, float(v) / vmax))
    return _hex(_lerp(_WHITE, _DIV_HIGH, t) if t >= 0 else _lerp(_WHITE, _DIV_LOW, -t))


def _panel(matrix, row_labels, col_labels, mode, x0, title):
    n_rows, n_cols = matrix.shape
    vmax = float(np.max(np.abs(matrix))) if mode == "diverging" else 1.0
    parts = []
    if title:
        parts.append(f'<text x="{x0 + LABEL_W}" y="14" font-size="12">{escape(title)}</text>')
    for j, lab in enumerate(col_labels):
        x = x0 + LABEL_W + j * CELL + CELL // 2
        parts.append(f'<text x="{x}" y="{HEADER_H - 6}" font-size="9" '
                     f'text-anchor="middle">{escape(str(lab))}</text>')
    for i, lab in enumerate(row_labels):
        y = HEADER_H + i * CELL
        parts.append(f'<text x="{x0 + LABEL_W - 4}" y="{y + CELL // 2 + 3}" font-size="9" '
                     f'text-anchor="end">{escape(str(lab))}</text>')
        for j in range(n_cols):
            v = float(matrix[i, j])
            fill = sequential_color(v) if mode == "absolute" else diverging_color(v, vmax)
            x = x0 + LABEL_W + j * CELL
            parts.append(f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                         f'fill="{fill}" stroke="#cccccc"><title>{lab} {col_labels[j]}: '
                         f'{v:.4f}</title></rect>')
    return parts, LABEL_W + n_cols * CELL, HEADER_H + n_rows * CELL


def _check(matrix, row_labels, col_labels, mode):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        raise ValueError("cannot render an empty matrix")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix contains non-finite values")
    if mode not in ("absolute", "diverging"):
        raise ValueError(f"unknown mode {mode!r}")
    if len(row_labels) != matrix.shape[0] or len(col_labels) != matrix.shape[1]:
        raise ValueError("label counts do not match matrix shape")
    return matrix


def _document(width, height, body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_heatmap(matrix, row_labels, col_labels, mode="absolute", title="") -> str:
    matrix = _check(matrix, row_labels, col_labels, mode)
    parts, w, h = _panel(matrix, row_labels, col_labels, mode, 0, title)
    return _document(w + 8, h + 8, parts)


def render_triptych(human, pred, row_labels, col_labels, titles=("human", "prediction",
                                                                  "prediction - human")) -> str:
    """Human, prediction and signed-difference panels side by side."""
    human = _check(human, row_labels, col_labels, "absolute")
    pred = _check(pred, row_labels, col_labels, "absolute")
    panels = [(human, "absolute"), (pred, "absolute"), (pred - human, "diverging")]
    body, x0, height = [], 0, 0
    for (m, mode), title in zip(panels, titles):
        parts, w, h = _panel(m, row_labels, col_labels, mode, x0, title)
        body.extend(parts)
        x0 += w + 16
        height = max(height, h)
    return _document(x0, height + 8, body)


def render_bars(groups: dict[str, dict[str, float]], title="") -> str:
    """Grouped bars, one group per metric, one bar per series; values in [0, 1]."""
    if not groups:
        raise ValueError("nothing to plot")
    series = sorted({s for g in groups.values() for s in g})
    palette = ["#4c72b0", "#dd8452", "#55a868", "#c44e52"]
    bar_w, gap, plot_h = 24, 20, 160
    body = [f'<text x="8" y="16" font-size="12">{escape(title)}</text>']
    x = 40
    for gname, values in groups.items():
        for si, s in enumerate(series):
            v = float(values.get(s, 0.0))
            h = max(0.0, min(1.0, v)) * plot_h
            body.append(f'<rect x="{x + si * bar_w}" y="{30 + plot_h - h:.2f}" width="{bar_w - 2}" '
                        f'height="{h:.2f}" fill="{palette[si % len(palette)]}">'
                        f'<title>{escape(gname)} {escape(s)}: {v:.4f}</title></rect>')
            body.append(f'<text x="{x + si * bar_w + bar_w // 2}" y="{26 + plot_h - h:.2f}" '
                        f'font-size="8" text-anchor="middle">{v:.3f}</text>')
        body.append(f'<text x="{x + len(series) * bar_w // 2}" y="{plot_h + 46}" font-size="10" '
                    f'text-anchor="middle">{escape(gname)}</text>')
        x += len(series) * bar_w + gap
    for si, s in enumerate(series):
        body.append(f'<rect x="{x}" y="{30 + si * 14}" width="10" height="10" '
                    f'fill="{palette[si % len(palette)]}"/>')
        body.append(f'<text x="{x + 14}" y="{39 + si * 14}" font-size="10">{escape(s)}</text>')
    return _document(x + 110, plot_h + 56, body)
