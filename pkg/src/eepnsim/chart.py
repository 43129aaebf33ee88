"""Static SVG line charts for sweep results (log BER axis, one polyline per
series value).  Hand-rolled so output bytes are fully deterministic."""

from __future__ import annotations

import math

WIDTH, HEIGHT = 820, 560
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 170, 30, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_chart(points_by_series: dict[str, list[tuple[float, float, bool]]],
                 x_label: str, y_label: str) -> str:
    """Build the SVG document.  Each point is (x, y, is_bound); bound points
    (zero-error rows plotted at their rule-of-three bound) get an open marker.
    The y axis is log10-scaled."""
    all_pts = [p for pts in points_by_series.values() for p in pts]
    if all_pts:
        x_min = min(p[0] for p in all_pts)
        x_max = max(p[0] for p in all_pts)
        y_min = min(p[1] for p in all_pts)
        y_max = max(p[1] for p in all_pts)
        if x_min == x_max:
            x_min, x_max = x_min - 1.0, x_max + 1.0
    else:
        x_min, x_max, y_min, y_max = 0.0, 1.0, 1e-6, 1e0
    dec_lo = math.floor(math.log10(y_min))
    dec_hi = math.ceil(math.log10(y_max))
    if dec_lo == dec_hi:
        dec_lo -= 1

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x: float) -> float:
        return MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y: float) -> float:
        ly = math.log10(y)
        return MARGIN_T + (dec_hi - ly) / (dec_hi - dec_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
    ]
    # y decade gridlines + labels
    for d in range(dec_lo, dec_hi + 1):
        y = sy(10.0**d)
        parts.append(f'<line x1="{MARGIN_L}" y1="{_fmt(y)}" x2="{MARGIN_L + plot_w}" '
                     f'y2="{_fmt(y)}" stroke="#cccccc" stroke-dasharray="3,3"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
                     f'font-size="12">1e{d}</text>')
    # x ticks (5 evenly spaced)
    for i in range(5):
        x = x_min + i * (x_max - x_min) / 4
        parts.append(f'<text x="{_fmt(sx(x))}" y="{HEIGHT - MARGIN_B + 20}" '
                     f'text-anchor="middle" font-size="12">{x:g}</text>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 14}" '
                 f'text-anchor="middle" font-size="14">{x_label}</text>')
    parts.append(f'<text x="20" y="{MARGIN_T + plot_h / 2}" text-anchor="middle" '
                 f'font-size="14" transform="rotate(-90 20 {MARGIN_T + plot_h / 2})">'
                 f'{y_label}</text>')

    for si, (name, pts) in enumerate(sorted(points_by_series.items())):
        color = PALETTE[si % len(PALETTE)]
        pts = sorted(pts)
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y, _ in pts)
        if len(pts) >= 2:
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                         'stroke-width="1.5"/>')
        for x, y, is_bound in pts:
            if is_bound:
                parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="4" '
                             f'fill="white" stroke="{color}" stroke-width="1.5"/>')
            else:
                parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" '
                             f'fill="{color}"/>')
        ly = MARGIN_T + 16 + 18 * si
        lx = MARGIN_L + plot_w + 12
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly}" font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
