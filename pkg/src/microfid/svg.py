"""Minimal deterministic SVG writers for report figures.

Hand-rolled rather than delegated to a plotting library so rerunning a
report reproduces byte-identical files: no timestamps, no generated ids,
fixed float formatting throughout.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["heatmap_pair_svg", "scatter_panels_svg", "line_chart_svg", "write_svg"]

_EXP_COLOR = "#1f6fb2"
_SYN_COLOR = "#d95f02"


def _f(v: float) -> str:
    return f"{v:.6g}"


def _gray(value: float, lo: float, hi: float) -> str:
    # Degenerate scale (e.g. all-zero grids) renders uniformly black.
    t = 0.0 if hi <= lo else (value - lo) / (hi - lo)
    level = int(round(255 * min(max(t, 0.0), 1.0)))
    return f"#{level:02x}{level:02x}{level:02x}"


def _text(x: float, y: float, s: str, size: int = 12, anchor: str = "start") -> str:
    return (
        f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" '
        f'font-size="{size}" text-anchor="{anchor}">{s}</text>'
    )


def heatmap_pair_svg(
    grid_a: np.ndarray, grid_b: np.ndarray, title_a: str, title_b: str, cell: int = 18
) -> str:
    """Two grayscale heatmaps side by side on a shared color scale.

    Row 0 of each grid is drawn at the bottom (lowest persistence at the
    bottom edge, matching diagram orientation).
    """
    lo = float(min(grid_a.min(), grid_b.min()))
    hi = float(max(grid_a.max(), grid_b.max()))
    ny, nx = grid_a.shape
    pad, gap, header = 14, 36, 26
    width = 2 * nx * cell + gap + 2 * pad
    height = ny * cell + header + pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for k, (grid, title) in enumerate(((grid_a, title_a), (grid_b, title_b))):
        x0 = pad + k * (nx * cell + gap)
        parts.append(_text(x0, header - 10, title))
        for iy in range(ny):
            for ix in range(nx):
                color = _gray(float(grid[iy, ix]), lo, hi)
                x = x0 + ix * cell
                y = header + (ny - 1 - iy) * cell
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{color}"/>'
                )
        parts.append(
            f'<rect x="{x0}" y="{header}" width="{nx * cell}" height="{ny * cell}" '
            f'fill="none" stroke="black" stroke-width="1"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_panels_svg(
    coords_a: np.ndarray,
    coords_b: np.ndarray,
    label_a: str,
    label_b: str,
    axis_names: tuple[str, str, str] = ("pc1", "pc2", "pc3"),
    panel: int = 220,
) -> str:
    """Three pairwise-component scatter panels for two 3-D point sets."""
    pairs = ((0, 1), (0, 2), (1, 2))
    pad, header = 34, 30
    width = 3 * panel + 4 * pad
    height = panel + header + pad + 18
    pts = [p for p in (coords_a, coords_b) if len(p)]
    allpts = np.vstack(pts) if pts else np.zeros((1, 3))
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    span = np.where(hi - lo <= 0, 1.0, hi - lo)

    def sx(v, axis, x0):
        return x0 + (v - lo[axis]) / span[axis] * (panel - 12) + 6

    def sy(v, axis, y0):
        return y0 + panel - ((v - lo[axis]) / span[axis] * (panel - 12) + 6)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        _text(pad, 18, f"{label_a} (circles) vs {label_b} (squares)"),
    ]
    for k, (i, j) in enumerate(pairs):
        x0 = pad + k * (panel + pad)
        y0 = header
        parts.append(
            f'<rect x="{x0}" y="{y0}" width="{panel}" height="{panel}" '
            f'fill="none" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            _text(x0 + panel / 2, y0 + panel + 14, f"{axis_names[i]} / {axis_names[j]}", 11, "middle")
        )
        for p in coords_a:
            parts.append(
                f'<circle cx="{_f(sx(p[i], i, x0))}" cy="{_f(sy(p[j], j, y0))}" '
                f'r="3" fill="{_EXP_COLOR}" fill-opacity="0.7"/>'
            )
        for p in coords_b:
            parts.append(
                f'<rect x="{_f(sx(p[i], i, x0) - 2.5)}" y="{_f(sy(p[j], j, y0) - 2.5)}" '
                f'width="5" height="5" fill="{_SYN_COLOR}" fill-opacity="0.7"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_chart_svg(
    x: np.ndarray,
    series: list[tuple[str, np.ndarray]],
    x_label: str,
    y_label: str,
    size: tuple[int, int] = (420, 280),
) -> str:
    """Polyline chart with fixed [0, 1] y-axis, one polyline per series."""
    w, h = size
    pad_l, pad_r, pad_t, pad_b = 46, 14, 26, 40
    plot_w, plot_h = w - pad_l - pad_r, h - pad_t - pad_b
    x_lo, x_hi = float(x.min()), float(x.max())
    x_span = x_hi - x_lo if x_hi > x_lo else 1.0

    def px(v):
        return pad_l + (v - x_lo) / x_span * plot_w

    def py(v):
        return pad_t + (1.0 - min(max(v, 0.0), 1.0)) * plot_h

    colors = (_EXP_COLOR, _SYN_COLOR, "#3a9d23", "#8856a7")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{pad_l}" y="{pad_t}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>',
        _text(pad_l + plot_w / 2, h - 8, x_label, 12, "middle"),
        _text(14, pad_t - 8, y_label, 12),
    ]
    for tick in (0.0, 0.5, 1.0):
        parts.append(_text(pad_l - 6, py(tick) + 4, _f(tick), 10, "end"))
        parts.append(_text(px(x_lo + tick * x_span), h - pad_b + 14, _f(x_lo + tick * x_span), 10, "middle"))
    for k, (name, ys) in enumerate(series):
        color = colors[k % len(colors)]
        path = " ".join(f"{_f(px(xi))},{_f(py(yi))}" for xi, yi in zip(x, ys))
        parts.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(_text(pad_l + 8 + k * 150, pad_t + 14, name, 11))
        parts.append(
            f'<rect x="{pad_l + k * 150 - 4}" y="{pad_t + 6}" width="9" height="9" fill="{color}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(content: str, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(content, encoding="utf-8")
    return path
