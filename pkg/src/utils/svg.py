"""
Static SVG figures built from string parts.

All coordinates are printed with three decimals so a figure is byte-stable for
a given input.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .serialization import ensure_parent_dir

SIZE = 400
MARGIN = 40
MAX_ITEMS = 20000

HEADER = (
    '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
)


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _thin(rows: np.ndarray) -> Tuple[np.ndarray, str]:
    """Every k-th row when there are more than MAX_ITEMS rows, with a caption saying so."""
    if len(rows) <= MAX_ITEMS:
        return rows, f"{len(rows)} classes"
    stride = int(math.ceil(len(rows) / MAX_ITEMS))
    shown = rows[::stride]
    return shown, f"showing {len(shown)} of {len(rows)} classes (every {stride}th)"


def _document(parts: List[str], title: str, width: int = SIZE, height: int = SIZE) -> str:
    head = HEADER.format(w=width, h=height)
    head += f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
    head += f'<text x="{MARGIN // 2}" y="{MARGIN // 2}" font-family="sans-serif" font-size="12">{title}</text>\n'
    return head + "".join(parts) + "</svg>\n"


def _wedge(cx: float, cy: float, r: float, start: float, stop: float, style: str) -> str:
    x0, y0 = cx + r * math.cos(start), cy - r * math.sin(start)
    x1, y1 = cx + r * math.cos(stop), cy - r * math.sin(stop)
    large = 1 if stop - start > math.pi else 0
    return (
        f'<path d="M {_fmt(cx)} {_fmt(cy)} L {_fmt(x0)} {_fmt(y0)} '
        f'A {_fmt(r)} {_fmt(r)} 0 {large} 0 {_fmt(x1)} {_fmt(y1)} Z" {style}/>\n'
    )


def ring_svg(angles: Sequence[float], gap_center: Optional[float] = None, gap_radius: Optional[float] = None) -> str:
    """
    RP^1 ring: each class at angle theta is the diameter through theta and theta + pi.

    When a gap is given, the empty arc and its antipodal copy are shaded.
    """
    cx = cy = SIZE / 2
    r = SIZE / 2 - MARGIN
    shown, caption = _thin(np.asarray(angles, dtype=float))
    parts = [f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="none" stroke="black"/>\n']
    if gap_center is not None and gap_radius is not None:
        style = 'fill="orange" fill-opacity="0.35" stroke="none"'
        for base in (gap_center, gap_center + math.pi):
            parts.append(_wedge(cx, cy, r, base - gap_radius, base + gap_radius, style))
    for theta in shown:
        dx, dy = r * math.cos(theta), r * math.sin(theta)
        parts.append(
            f'<line x1="{_fmt(cx - dx)}" y1="{_fmt(cy + dy)}" x2="{_fmt(cx + dx)}" y2="{_fmt(cy - dy)}" '
            'stroke="steelblue" stroke-width="0.5"/>\n'
        )
    return _document(parts, f"RP1 directions: {caption}")


def sphere_svg(
    reps: np.ndarray, center: Optional[np.ndarray] = None, radius: Optional[float] = None
) -> str:
    """
    Orthographic view of the upper hemisphere (z >= 0) with both antipodes of each class.

    The cap center is marked with a cross and its boundary traced when given.
    """
    cx = cy = SIZE / 2
    r = SIZE / 2 - MARGIN
    shown, caption = _thin(np.array(reps, dtype=float, ndmin=2))
    doubled = np.vstack([shown, -shown]) if len(shown) else np.empty((0, 3))
    visible = doubled[doubled[:, 2] >= 0] if len(doubled) else doubled
    parts = [f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="none" stroke="black"/>\n']
    for x, y, _ in visible:
        parts.append(f'<circle cx="{_fmt(cx + r * x)}" cy="{_fmt(cy - r * y)}" r="1.500" fill="steelblue"/>\n')

    if center is not None:
        c = np.asarray(center, dtype=float)
        if c[2] < 0:
            c = -c
        if radius is not None:
            parts.append(_cap_outline(c, radius, cx, cy, r))
        px, py = cx + r * c[0], cy - r * c[1]
        parts.append(
            f'<path d="M {_fmt(px - 5)} {_fmt(py - 5)} L {_fmt(px + 5)} {_fmt(py + 5)} '
            f'M {_fmt(px - 5)} {_fmt(py + 5)} L {_fmt(px + 5)} {_fmt(py - 5)}" stroke="red" stroke-width="2"/>\n'
        )
    return _document(parts, f"RP2 directions (upper hemisphere): {caption}")


def _cap_outline(c: np.ndarray, radius: float, cx: float, cy: float, r: float) -> str:
    helper = np.eye(3)[int(np.argmin(np.abs(c)))]
    e1 = np.cross(c, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    t = np.linspace(0.0, 2.0 * math.pi, 73)
    ring = math.cos(radius) * c + math.sin(radius) * (np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2))
    ring = ring[ring[:, 2] >= 0]
    if len(ring) < 2:
        return ""
    points = " ".join(f"{_fmt(cx + r * x)},{_fmt(cy - r * y)}" for x, y, _ in ring)
    return f'<polyline points="{points}" fill="none" stroke="orange" stroke-width="1.5"/>\n'


def histogram_svg(values: np.ndarray, bins: int = 50, window: Optional[Tuple[float, float]] = None) -> str:
    """Histogram of slopes; values outside the window are counted in the end bins."""
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(values.min()), float(values.max())) if len(values) else (-1.0, 1.0)
    low, high = window
    if high <= low:
        low, high = low - 0.5, high + 0.5
    counts, edges = np.histogram(np.clip(values, low, high), bins=bins, range=(low, high))
    width = SIZE + 200
    plot_w, plot_h = width - 2 * MARGIN, SIZE - 2 * MARGIN
    peak = max(int(counts.max()) if len(counts) else 0, 1)
    bar_w = plot_w / bins
    parts: List[str] = []
    for k, count in enumerate(counts):
        h = plot_h * count / peak
        parts.append(
            f'<rect x="{_fmt(MARGIN + k * bar_w)}" y="{_fmt(SIZE - MARGIN - h)}" '
            f'width="{_fmt(bar_w * 0.9)}" height="{_fmt(h)}" fill="steelblue"/>\n'
        )
    parts.append(
        f'<text x="{MARGIN}" y="{SIZE - MARGIN // 3}" font-family="sans-serif" font-size="11">{_fmt(edges[0])}</text>\n'
    )
    parts.append(
        f'<text x="{width - MARGIN}" y="{SIZE - MARGIN // 3}" font-family="sans-serif" font-size="11" '
        f'text-anchor="end">{_fmt(edges[-1])}</text>\n'
    )
    return _document(parts, f"Secant slopes: {len(values)} values, {bins} bins", width=width)


def write_svg(path: str, text: str) -> None:
    ensure_parent_dir(path)
    with open(path, "w") as f:
        f.write(text)
