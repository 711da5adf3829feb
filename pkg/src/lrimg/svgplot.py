"""Self-contained SVG line charts, no external assets."""

from __future__ import annotations

from .errors import PlotError

WIDTH = 960
HEIGHT = 600
MARGIN_LEFT = 80
MARGIN_RIGHT = 200
MARGIN_TOP = 50
MARGIN_BOTTOM = 70

# Plot convention: codec curves blue, SVD curves orange.
SVD_COLOR = "#ff7f0e"
CODEC_COLORS = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#17becf"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def color_for(name: str, codec_index: int) -> str:
    if name.startswith("svd"):
        return SVD_COLOR
    return CODEC_COLORS[codec_index % len(CODEC_COLORS)]


def line_chart_svg(series, title: str, x_label: str, y_label: str) -> str:
    """Render (name, [(x, y), ...]) series as a standalone SVG document.

    x is expected in [0, 1]; y is auto-scaled and a zero line is drawn
    whenever the range crosses zero.
    """
    if not series:
        raise PlotError("no curves to plot")
    for name, points in series:
        if len(points) < 2:
            raise PlotError(f"curve {name} has fewer than 2 points")

    ys = [y for _, points in series for _, y in points]
    y_min = min(min(ys), 0.0 if max(ys) > 0 else min(ys))
    y_max = max(max(ys), 0.0)
    if y_max == y_min:
        y_max = y_min + 1.0
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    plot_left = MARGIN_LEFT
    plot_right = WIDTH - MARGIN_RIGHT
    plot_top = MARGIN_TOP
    plot_bottom = HEIGHT - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return plot_left + x * (plot_right - plot_left)

    def sy(y: float) -> float:
        return plot_bottom - (y - y_min) / (y_max - y_min) * (plot_bottom - plot_top)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" font-size="18" '
        f'font-family="sans-serif">{title}</text>',
    ]

    # axes
    parts.append(
        f'<line x1="{plot_left}" y1="{plot_bottom}" x2="{plot_right}" y2="{plot_bottom}" '
        f'stroke="black"/>'
    )
    parts.append(
        f'<line x1="{plot_left}" y1="{plot_top}" x2="{plot_left}" y2="{plot_bottom}" '
        f'stroke="black"/>'
    )
    # zero line when the y range crosses zero
    if y_min < 0.0 < y_max:
        zy = sy(0.0)
        parts.append(
            f'<line x1="{plot_left}" y1="{_fmt(zy)}" x2="{plot_right}" y2="{_fmt(zy)}" '
            f'stroke="#888888" stroke-dasharray="4 3"/>'
        )
        parts.append(
            f'<text x="{plot_left - 8}" y="{_fmt(zy + 4)}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">0</text>'
        )

    # x ticks every 0.1
    for i in range(11):
        x = i / 10
        px = sx(x)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{plot_bottom}" x2="{_fmt(px)}" '
            f'y2="{plot_bottom + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{plot_bottom + 20}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{x:.1f}</text>'
        )
    # y ticks at 5 evenly spaced values
    for i in range(6):
        y = y_min + i * (y_max - y_min) / 5
        py = sy(y)
        parts.append(
            f'<line x1="{plot_left - 5}" y1="{_fmt(py)}" x2="{plot_left}" '
            f'y2="{_fmt(py)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{plot_left - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{y:.2f}</text>'
        )

    parts.append(
        f'<text x="{(plot_left + plot_right) // 2}" y="{HEIGHT - 20}" '
        f'text-anchor="middle" font-size="14" font-family="sans-serif">{x_label}</text>'
    )
    parts.append(
        f'<text x="22" y="{(plot_top + plot_bottom) // 2}" text-anchor="middle" '
        f'font-size="14" font-family="sans-serif" '
        f'transform="rotate(-90 22 {(plot_top + plot_bottom) // 2})">{y_label}</text>'
    )

    codec_index = 0
    for row, (name, points) in enumerate(series):
        color = color_for(name, codec_index)
        if not name.startswith("svd"):
            codec_index += 1
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        ly = plot_top + 16 + row * 20
        lx = plot_right + 20
        parts.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 28}" y2="{ly}" stroke="{color}" '
            f'stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 34}" y="{ly + 4}" font-size="12" '
            f'font-family="sans-serif">{name}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
