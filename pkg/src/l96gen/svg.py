"""Minimal SVG emitters for eigenvalue curves and Hovmoeller rasters."""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["eigencurve_svg", "hovmoeller_svg", "diverging_color"]

_W, _H, _PAD = 480, 480, 40


def _frame(body: list[str], width: int = _W, height: int = _H) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>\n"])


def eigencurve_svg(path, curve, title: str = "") -> None:
    """Curve ``p(e^{2 pi i s})`` as a polyline, discrete eigenvalues as dots, plus the imaginary axis."""
    pts = np.concatenate([curve.values, curve.points, [0j]])
    lo_x, hi_x = pts.real.min(), pts.real.max()
    lo_y, hi_y = pts.imag.min(), pts.imag.max()
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-12) * 1.1
    cx, cy = 0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y)
    scale = (_W - 2 * _PAD) / span

    def xy(z):
        return _W / 2 + (z.real - cx) * scale, _H / 2 - (z.imag - cy) * scale

    body = []
    x0, _ = xy(0j)
    body.append(f'<line x1="{x0:.2f}" y1="{_PAD / 2}" x2="{x0:.2f}" y2="{_H - _PAD / 2}" '
                'stroke="gray" stroke-dasharray="4 3"/>')
    _, y0 = xy(0j)
    body.append(f'<line x1="{_PAD / 2}" y1="{y0:.2f}" x2="{_W - _PAD / 2}" y2="{y0:.2f}" stroke="lightgray"/>')
    poly = " ".join("{:.2f},{:.2f}".format(*xy(z)) for z in curve.values)
    body.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    for z in curve.points:
        px, py = xy(z)
        body.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="crimson"/>')
    if title:
        body.append(f'<text x="{_PAD}" y="{_PAD / 2}" font-family="sans-serif" font-size="14">{title}</text>')
    Path(path).write_text(_frame(body))


def diverging_color(v: float) -> str:
    """Blue-white-red for ``v`` in ``[-1, 1]``."""
    v = float(np.clip(v, -1, 1))
    if v >= 0:
        r, g, b = 255, int(255 * (1 - v)), int(255 * (1 - v))
    else:
        r, g, b = int(255 * (1 + v)), int(255 * (1 + v)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def hovmoeller_svg(path, grid, max_cells: int = 200) -> None:
    """Raster with sites left to right and time increasing upward.

    The grid is decimated to at most ``max_cells`` cells per axis; colors are
    centred on the mean value.
    """
    ti = np.unique(np.linspace(0, len(grid.times) - 1, min(max_cells, len(grid.times))).astype(int))
    si = np.unique(np.linspace(0, len(grid.sites) - 1, min(max_cells, len(grid.sites))).astype(int))
    vals = grid.values[np.ix_(ti, si)]
    centre = vals.mean()
    half = max(np.abs(vals - centre).max(), 1e-12)
    w_plot, h_plot = _W - 2 * _PAD, _H - 2 * _PAD
    cw, ch = w_plot / len(si), h_plot / len(ti)
    body = []
    for a, row in enumerate(vals):
        y = _H - _PAD - (a + 1) * ch
        for b, v in enumerate(row):
            body.append(f'<rect x="{_PAD + b * cw:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                        f'height="{ch + 0.05:.2f}" fill="{diverging_color((v - centre) / half)}"/>')
    t0, t1 = grid.times[0], grid.times[-1]
    body.append(f'<text x="{_PAD}" y="{_H - 10}" font-family="sans-serif" font-size="12">'
                f'site 0..{grid.n}, t {t0:g}..{t1:g}</text>')
    Path(path).write_text(_frame(body))
