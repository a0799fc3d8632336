"""SVG overlay of a Morse-Smale complex."""
from __future__ import annotations

from .morse import MorseSmaleComplex

__all__ = ["SEPARATRIX_COLORS", "CRITICAL_COLORS", "render_svg"]

SEPARATRIX_COLORS = {0: "blue", 1: "red"}
CRITICAL_COLORS = {0: "blue", 1: "yellow", 2: "red"}


def render_svg(msc: MorseSmaleComplex, size: int = 800, reference_circle=None) -> str:
    """Draw separatrices as polylines and critical cells as dots.

    ``reference_circle`` is an optional ``(cx, cy, r)`` drawn in grey.
    Physical y grows upwards, so the drawing is flipped vertically.
    """
    g = msc.grid
    x0, y0 = g.origin
    span_x = (g.width - 1) * g.pixel_w
    span_y = (g.height - 1) * g.pixel_h
    scale = size / max(span_x, span_y)
    w, h = span_x * scale, span_y * scale

    def pt(x, y):
        return f"{(x - x0) * scale:.3f},{h - (y - y0) * scale:.3f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.3f} {h:.3f}">',
        f'<rect x="0" y="0" width="{w:.3f}" height="{h:.3f}" fill="white" stroke="black"/>',
    ]
    if reference_circle is not None:
        cx, cy, r = reference_circle
        px, py = pt(cx, cy).split(",")
        out.append(f'<circle cx="{px}" cy="{py}" r="{r * scale:.3f}" fill="none" stroke="grey" stroke-width="2"/>')
    for sep in msc.separatrices:
        color = SEPARATRIX_COLORS[sep.index]
        pts = " ".join(pt(x, y) for x, y in sep.polyline)
        out.append(f'<polyline class="sep{sep.index}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    for c in msc.criticals:
        px, py = pt(*c.position).split(",")
        out.append(
            f'<circle class="crit{c.index}" cx="{px}" cy="{py}" r="4" '
            f'fill="{CRITICAL_COLORS[c.index]}" stroke="black" stroke-width="0.5"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
