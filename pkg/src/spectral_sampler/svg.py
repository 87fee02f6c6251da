"""Minimal SVG line plots; CSV files remain the canonical outputs."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _ticks(lo, hi, log):
    if log:
        return [10.0**k for k in range(int(np.floor(lo)), int(np.ceil(hi)) + 1)]
    return list(np.linspace(lo, hi, 5))


def line_plot(series, title="", xlabel="", ylabel="", logx=False, logy=False,
              vlines=(), width=640, height=400) -> str:
    """``series`` is a list of ``(label, xs, ys)``; ``vlines`` a list of ``(label, x)``."""
    left, right, top, bottom = 70, 20, 30, 50
    tx = np.log10 if logx else (lambda v: np.asarray(v, dtype=np.float64))
    ty = np.log10 if logy else (lambda v: np.asarray(v, dtype=np.float64))

    cleaned = []
    for label, xs, ys in series:
        xs, ys = np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)
        ok = np.isfinite(xs) & np.isfinite(ys)
        if logx:
            ok &= xs > 0
        if logy:
            ok &= ys > 0
        cleaned.append((label, tx(xs[ok]), ty(ys[ok])))
    allx = np.concatenate([c[1] for c in cleaned] + [tx(np.array([v for _, v in vlines]))])
    ally = np.concatenate([c[2] for c in cleaned])
    if allx.size == 0 or ally.size == 0:
        allx, ally = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    if title:
        out.append(f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    for t in _ticks(x0, x1, logx):
        v = np.log10(t) if logx else t
        if x0 - 1e-9 <= v <= x1 + 1e-9:
            out.append(f'<text x="{sx(v):.1f}" y="{top + ph + 15}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1, logy):
        v = np.log10(t) if logy else t
        if y0 - 1e-9 <= v <= y1 + 1e-9:
            out.append(f'<text x="{left - 5}" y="{sy(v) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2})">{escape(ylabel)}</text>')

    for i, (label, xs, ys) in enumerate(cleaned):
        color = COLORS[i % len(COLORS)]
        if xs.size:
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, ys))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{left + 10}" y="{top + 15 + 14 * i}" fill="{color}">{escape(label)}</text>')
    for label, v in vlines:
        x = sx(float(tx(np.array([v]))[0]))
        out.append(f'<line x1="{x:.2f}" x2="{x:.2f}" y1="{top}" y2="{top + ph}" stroke="#555" '
                   f'stroke-dasharray="5,4"/>')
        out.append(f'<text x="{x + 4:.2f}" y="{top + ph - 6}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
