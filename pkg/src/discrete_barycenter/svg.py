"""Deterministic SVG plots of planar measures and their barycenter.

Atoms are drawn as disks whose area is proportional to mass.  Input
measures are translucent and colored per measure; the barycenter is drawn
in black on top.  Optionally, arrows show where each barycenter atom sends
its mass in one chosen measure.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .barycenter import SUPPORT_TOL, BarycenterResult
from .errors import DimensionError
from .measure import MeasureSet

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _f(v: float) -> str:
    s = f"{float(v):.6f}"
    return "0.000000" if s == "-0.000000" else s


def render_svg(result: BarycenterResult, ms: MeasureSet, *, transport_to: int | None = None,
               width: int = 720, height: int = 540, margin: int = 40, max_radius: float = 28.0,
               labels: list[str] | None = None, title: str | None = None) -> str:
    """SVG document for a 2-d result; byte-identical for identical inputs.

    Raises
    ------
    DimensionError
        If the measures are not planar.
    ValueError
        If ``transport_to`` is not a measure index.
    """
    if ms.dim != 2:
        raise DimensionError(f"plots need 2-d measures, got dimension {ms.dim}")
    if transport_to is not None and not 0 <= transport_to < ms.n:
        raise ValueError(f"transport_to must be in 0..{ms.n - 1}")
    pts = [np.asarray(m.points, dtype=float) for m in ms]
    bary = np.asarray(result.barycenter.points, dtype=float).reshape(-1, 2)
    allp = np.concatenate(pts + [bary], axis=0)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    pad = margin + max_radius
    scale = min((width - 2 * pad) / span[0], (height - 2 * pad) / span[1])

    def xy(p):
        # y grows upward in data and downward in SVG
        return pad + (p[0] - lo[0]) * scale, height - pad - (p[1] - lo[1]) * scale

    def radius(mass):
        return max_radius * math.sqrt(max(float(mass), 0.0))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" '
        'markerHeight="6" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#444444"/>'
        "</marker></defs>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{margin}" y="{margin // 2 + 6}" font-family="sans-serif" font-size="14">'
                   f"{escape(title)}</text>")
    out.append('<g id="measures">')
    for i, m in enumerate(ms):
        color = PALETTE[i % len(PALETTE)]
        name = escape(labels[i]) if labels and i < len(labels) else f"measure {i}"
        out.append(f'<g class="measure" data-index="{i}" data-label="{name}">')
        for p, w in zip(pts[i], m.masses):
            cx, cy = xy(p)
            out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(radius(w))}" fill="{color}" '
                       f'fill-opacity="0.30" stroke="{color}" stroke-width="0.8"/>')
        out.append("</g>")
    out.append("</g>")
    if transport_to is not None:
        out.append(f'<g id="transport" data-measure="{transport_to}">')
        t = result.transport
        j, k, mass = t.entries(transport_to)
        target = pts[transport_to]
        cpts = np.asarray(result.centroids.points, dtype=float)
        order = np.lexsort((k, j))
        for a in order:
            if float(mass[a]) <= SUPPORT_TOL:
                continue
            x1, y1 = xy(cpts[j[a]])
            x2, y2 = xy(target[k[a]])
            out.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" stroke="#444444" '
                       f'stroke-width="1.0" marker-end="url(#arrow)"/>')
        out.append("</g>")
    out.append('<g id="barycenter">')
    for p, w in zip(bary, result.barycenter.masses):
        cx, cy = xy(p)
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(radius(w))}" fill="#000000" '
                   f'fill-opacity="0.75" stroke="#000000" stroke-width="0.5"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
