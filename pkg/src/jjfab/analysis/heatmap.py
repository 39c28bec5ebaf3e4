"""Hand-written SVG wafer heatmaps.

Output depends only on the input values, so identical inputs give
byte-identical documents.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from ..geometry import ScalarField

CELL_PX = 24
MARGIN_PX = 40
LEGEND_PX = 70
# two-stop linear ramp, low -> high
LOW_RGB = (49, 54, 149)
HIGH_RGB = (215, 48, 39)
FLAT_RGB = (128, 128, 128)


def _colour(t):
    rgb = tuple(int(round(lo + (hi - lo) * t)) for lo, hi in zip(LOW_RGB, HIGH_RGB))
    return "#%02x%02x%02x" % rgb


def _num(v):
    return f"{v:.6g}"


def _points(source, value_column):
    if isinstance(source, ScalarField):
        return (np.asarray(source.x_mm, float), np.asarray(source.y_mm, float),
                np.asarray(source.values, float), source.step_mm)
    # several records on one die (e.g. several designs) share one cell: mean value
    cells = {}
    for r in source:
        cells.setdefault((float(r.x_mm), float(r.y_mm)), []).append(float(getattr(r, value_column)))
    keys = sorted(cells)
    x = np.array([k[0] for k in keys], dtype=float)
    y = np.array([k[1] for k in keys], dtype=float)
    v = np.array([np.mean(cells[k]) for k in keys], dtype=float)
    return x, y, v, 0.0


def _pitch(coords):
    u = np.unique(coords)
    if u.size < 2:
        return 0.0
    return float(np.min(np.diff(u)))


def wafer_heatmap(source, value_column="resistance_ohm", title="", unit=""):
    """Render one coloured cell per die (or grid point) as an SVG string.

    ``source`` is a ScalarField or an iterable of records with ``x_mm``,
    ``y_mm`` and ``value_column`` attributes.
    """
    x, y, v, step = _points(source, value_column)
    if x.size == 0:
        raise ValueError("heatmap needs at least one positioned value")
    if not np.all(np.isfinite(v)):
        raise ValueError("heatmap values must be finite")
    pitch = step or min((p for p in (_pitch(x), _pitch(y)) if p > 0), default=1.0)
    col = np.rint((x - x.min()) / pitch).astype(int)
    row = np.rint((y.max() - y) / pitch).astype(int)
    ncol, nrow = int(col.max()) + 1, int(row.max()) + 1

    vmin, vmax = float(v.min()), float(v.max())
    flat = vmax == vmin
    width = 2 * MARGIN_PX + ncol * CELL_PX + LEGEND_PX
    height = 2 * MARGIN_PX + max(nrow * CELL_PX, 120)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
        out.append(f'<text x="{MARGIN_PX}" y="{MARGIN_PX // 2}" font-size="12">{escape(title)}</text>')
    order = np.lexsort((col, row))
    out.append('<g id="cells">')
    for i in order:
        t = 0.0 if flat else (v[i] - vmin) / (vmax - vmin)
        fill = "#%02x%02x%02x" % FLAT_RGB if flat else _colour(t)
        px = MARGIN_PX + col[i] * CELL_PX
        py = MARGIN_PX + row[i] * CELL_PX
        out.append(f'<rect class="cell" x="{px}" y="{py}" width="{CELL_PX}" height="{CELL_PX}" '
                   f'fill="{fill}" data-x-mm="{_num(x[i])}" data-y-mm="{_num(y[i])}" '
                   f'data-value="{_num(v[i])}"/>')
    out.append('</g>')

    lx = MARGIN_PX + ncol * CELL_PX + 20
    suffix = f" {escape(unit)}" if unit else ""
    out.append('<g id="legend">')
    if flat:
        out.append(f'<rect x="{lx}" y="{MARGIN_PX}" width="16" height="100" fill="#%02x%02x%02x"/>' % FLAT_RGB)
        out.append(f'<text x="{lx}" y="{MARGIN_PX - 6}" font-size="10" class="note">'
                   f'degenerate scale: all values = {_num(vmin)}{suffix}</text>')
    else:
        out.append('<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">'
                   f'<stop offset="0" stop-color="{_colour(0.0)}"/>'
                   f'<stop offset="1" stop-color="{_colour(1.0)}"/></linearGradient></defs>')
        out.append(f'<rect x="{lx}" y="{MARGIN_PX}" width="16" height="100" fill="url(#ramp)"/>')
    out.append(f'<text x="{lx + 20}" y="{MARGIN_PX + 8}" font-size="10" class="max">'
               f'max {_num(vmax)}{suffix}</text>')
    out.append(f'<text x="{lx + 20}" y="{MARGIN_PX + 100}" font-size="10" class="min">'
               f'min {_num(vmin)}{suffix}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
