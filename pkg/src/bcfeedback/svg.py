"""Tiny SVG line-plot writer (axes, ticks, polylines, legend)."""

from xml.sax.saxutils import escape

import numpy as np

_COLORS = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')
W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, count)


def line_plot(series, xlabel='', ylabel='', title=''):
    """Render ``{label: (x, y)}`` as an SVG document string.

    Non-finite points are dropped from the polylines.
    """
    pts = {k: (np.asarray(x, float), np.asarray(y, float)) for k, (x, y) in series.items()}
    xs = np.concatenate([x[np.isfinite(y)] for x, y in pts.values()])
    ys = np.concatenate([y[np.isfinite(y)] for _, y in pts.values()])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = min(0.0, float(ys.min())), float(ys.max()) * 1.05
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
           f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{TOP + ph}" x2="{sx(t):.2f}" '
                   f'y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{TOP + ph + 18}" '
                   f'text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{LEFT - 5}" y1="{sy(t):.2f}" x2="{LEFT}" '
                   f'y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{sy(t) + 4:.2f}" '
                   f'text-anchor="end">{t:.3g}</text>')
    for i, (label, (x, y)) in enumerate(pts.items()):
        ok = np.isfinite(y)
        color = _COLORS[i % len(_COLORS)]
        path = ' '.join(f'{sx(a):.2f},{sy(b):.2f}' for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{path}"/>')
        ly = TOP + 14 + 16 * i
        out.append(f'<line x1="{LEFT + pw - 150}" y1="{ly - 4}" x2="{LEFT + pw - 130}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw - 125}" y="{ly}">{escape(str(label))}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{H - 10}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">'
               f'{escape(title)}</text>')
    out.append('</svg>')
    return '\n'.join(out) + '\n'


def write_line_plot(path, series, **kw):
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(line_plot(series, **kw))
