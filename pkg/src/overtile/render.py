"""SVG output: stacked broken-line rows for 1D patches and plots for GIFS systems."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import __version__
from .geometry1d import GeomSubstitution, Patch, apply

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
ROW = 40
PAD = 20


def _f(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _doc(width: float, height: float, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
            f'viewBox="0 0 {_f(width)} {_f(height)}">')
    return "\n".join([head, f"<!-- overtile {__version__} -->", *body, "</svg>"]) + "\n"


def _row(p: Patch, y: float, scale: float, x0: float, clip: tuple[float, float] | None) -> list[str]:
    """One broken line; parts of a tile outside ``clip`` are dashed."""
    g = p.geom
    out = []
    for k, t in enumerate(p.tiles):
        a, b = float(t.left), float(g.right(t))
        col = PALETTE[t.label % len(PALETTE)]
        yy = y + (6 if k % 2 else -6)  # alternate so overlapping tiles stay visible
        pieces = [(a, b, False)]
        if clip is not None:
            lo, hi = clip
            pieces = [(a, min(b, lo), True), (max(a, lo), min(b, hi), False), (max(a, hi), b, True)]
        for u, v, dashed in pieces:
            if v <= u:
                continue
            dash = ' stroke-dasharray="4 3"' if dashed else ""
            out.append(f'<line x1="{_f(x0 + u * scale)}" y1="{_f(yy)}" x2="{_f(x0 + v * scale)}" '
                       f'y2="{_f(yy)}" stroke="{col}" stroke-width="3"{dash}/>')
        for u in (a, b):
            out.append(f'<line x1="{_f(x0 + u * scale)}" y1="{_f(yy - 4)}" x2="{_f(x0 + u * scale)}" '
                       f'y2="{_f(yy + 4)}" stroke="{col}"/>')
        out.append(f'<text x="{_f(x0 + (a + b) / 2 * scale)}" y="{_f(yy - 6)}" font-size="9" '
                   f'text-anchor="middle">{g.alphabet[t.label]}</text>')
    return out


def svg_levels(g: GeomSubstitution, i: int, n: int, width: float = 900) -> str:
    """Rows rho^0(T_i) .. rho^n(T_i), each rescaled by beta^-nu to a common frame."""
    patches = [g.proto(i)]
    for _ in range(n):
        patches.append(apply(g, patches[-1]))
    beta = float(g.beta)
    spans = [(min(float(t.left) for t in p.tiles) / beta ** k, max(float(g.right(t)) for t in p.tiles) / beta ** k)
             for k, p in enumerate(patches)]
    lo = min(s[0] for s in spans)
    hi = max(s[1] for s in spans)
    base = (width - 2 * PAD) / (hi - lo)
    body = []
    for k, p in enumerate(patches):
        scale = base / beta ** k
        x0 = PAD - lo * base
        clip = (0.0, float(g.lengths[i]) * beta ** k)
        body += _row(p, PAD + ROW * (k + 0.5), scale, x0, clip)
    return _doc(width, 2 * PAD + ROW * (n + 1), body)


def svg_patch(p: Patch, width: float = 900, window: tuple | None = None) -> str:
    if not p.tiles:
        return _doc(width, 2 * PAD + ROW, [])
    lo = min(float(t.left) for t in p.tiles)
    hi = max(float(p.geom.right(t)) for t in p.tiles)
    if window is not None:
        lo, hi = min(lo, float(window[0])), max(hi, float(window[1]))
    scale = (width - 2 * PAD) / max(hi - lo, 1e-12)
    return _doc(width, 2 * PAD + ROW, _row(p, PAD + ROW / 2, scale, PAD - lo * scale, None))


def svg_gifs(polygons: Sequence[np.ndarray] | None, images: Sequence[Sequence[np.ndarray]],
             polylines: Sequence[np.ndarray], names: Sequence[str], size: float = 400) -> str:
    """One panel per vertex: feasible set, its images, and the attractor polyline."""
    body = []
    for v, name in enumerate(names):
        pts = [np.asarray(polylines[v])]
        if polygons is not None:
            pts.append(np.asarray(polygons[v]))
        allp = np.vstack([p for p in pts if len(p)])
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        span = float(max(hi - lo)) or 1.0
        s = (size - 2 * PAD) / span
        ox = v * size

        def tr(p):
            return f"{_f(ox + PAD + (p[0] - lo[0]) * s)},{_f(size - PAD - (p[1] - lo[1]) * s)}"

        body.append(f'<text x="{_f(ox + PAD)}" y="14" font-size="12">{name}</text>')
        if polygons is not None:
            body.append(f'<polygon points="{" ".join(tr(p) for p in polygons[v])}" fill="#eeeeee" stroke="#888"/>')
        for k, img in enumerate(images[v]):
            body.append(f'<polygon points="{" ".join(tr(p) for p in img)}" fill="none" '
                        f'stroke="{PALETTE[k % len(PALETTE)]}" stroke-dasharray="3 2"/>')
        body.append(f'<polyline points="{" ".join(tr(p) for p in polylines[v])}" fill="none" stroke="black"/>')
    return _doc(size * len(names), size, body)
