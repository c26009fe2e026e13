"""Static SVG of divergence-versus-leverage curves, one panel per market size."""

from __future__ import annotations

import csv
from xml.sax.saxutils import escape

from .errors import CreditDivergenceError

COLORS = {"low": "#1f77b4", "high": "#d62728"}
DASHES = {"low": "6 3", "high": ""}
PANEL_W, PANEL_H = 320, 220
MARGIN = dict(left=58, right=16, top=30, bottom=44)
COLUMNS = 2


class PlotInputError(CreditDivergenceError, ValueError):
    pass


def read_figure1(path):
    """Group rows of a figure1.csv by ``(n, regime)``.

    Returns ``{(n, regime): [(leverage, mean_J), ...]}`` sorted by leverage.
    """
    required = {"n", "regime", "leverage", "mean_J"}
    groups = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise PlotInputError(f"{path}: missing columns, need {sorted(required)}")
            for lineno, row in enumerate(reader, 2):
                try:
                    key = (int(row["n"]), row["regime"].strip().lower())
                    point = (float(row["leverage"]), float(row["mean_J"]))
                except (TypeError, ValueError, AttributeError):
                    raise PlotInputError(f"{path}:{lineno}: malformed row") from None
                groups.setdefault(key, []).append(point)
    except OSError as exc:
        raise PlotInputError(str(exc)) from None
    if not groups:
        raise PlotInputError(f"{path}: no data rows")
    return {k: sorted(v) for k, v in sorted(groups.items())}


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def render_svg(groups) -> str:
    sizes = sorted({n for n, _ in groups})
    rows = (len(sizes) + COLUMNS - 1) // COLUMNS
    width = PANEL_W * min(COLUMNS, len(sizes))
    height = PANEL_H * rows + 40
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    xs = [x for pts in groups.values() for x, _ in pts]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    for k, n in enumerate(sizes):
        ox = PANEL_W * (k % COLUMNS)
        oy = PANEL_H * (k // COLUMNS)
        ys = [y for (m, _), pts in groups.items() if m == n for _, y in pts]
        y_hi = max(ys) * 1.05 if max(ys) > 0 else 1.0
        y_lo = 0.0
        pw = PANEL_W - MARGIN["left"] - MARGIN["right"]
        ph = PANEL_H - MARGIN["top"] - MARGIN["bottom"]
        x0, y0 = ox + MARGIN["left"], oy + MARGIN["top"]

        def sx(x):
            return x0 + (x - x_lo) / (x_hi - x_lo) * pw

        def sy(y):
            return y0 + ph - (y - y_lo) / (y_hi - y_lo) * ph

        parts.append(f'<g class="panel" data-n="{n}">')
        parts.append(f'<text x="{x0 + pw / 2:.1f}" y="{oy + 18}" text-anchor="middle" font-weight="bold">N = {n}</text>')
        parts.append(f'<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')
        for t in _ticks(x_lo, x_hi):
            parts.append(f'<text x="{sx(t):.1f}" y="{y0 + ph + 14}" text-anchor="middle">{t:.2g}</text>')
        for t in _ticks(y_lo, y_hi):
            parts.append(f'<text x="{x0 - 4}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
        parts.append(f'<text x="{x0 + pw / 2:.1f}" y="{y0 + ph + 32}" text-anchor="middle">leverage ln(D/V)</text>')
        parts.append(
            f'<text transform="translate({ox + 14},{y0 + ph / 2:.1f}) rotate(-90)" '
            f'text-anchor="middle">mean Jeffreys divergence</text>'
        )
        for (m, regime), pts in groups.items():
            if m != n:
                continue
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            color = COLORS.get(regime, "#333")
            dash = DASHES.get(regime, "")
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            parts.append(
                f'<polyline data-n="{n}" data-regime="{escape(regime)}" points="{coords}" '
                f'fill="none" stroke="{color}" stroke-width="1.8"{dash_attr}/>'
            )
        parts.append("</g>")
    ly = PANEL_H * rows + 22
    regimes = sorted({r for _, r in groups})
    for i, regime in enumerate(regimes):
        lx = 20 + 150 * i
        color = COLORS.get(regime, "#333")
        dash = DASHES.get(regime, "")
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash_attr}/>')
        parts.append(f'<text x="{lx + 36}" y="{ly + 4}">{escape(regime)} correlation</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_figure1(csv_path, svg_path):
    svg = render_svg(read_figure1(csv_path))
    with open(svg_path, "w") as fh:
        fh.write(svg)
