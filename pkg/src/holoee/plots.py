"""Minimal SVG writer for the entropy-curve figure (no plotting backend needed)."""
from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 50
Y_MAX = 6.0

STYLES = {
    "ideal": {"stroke": "#ff7f0e", "dash": "6,4", "marker": None},
    "maxent": {"stroke": "#2ca02c", "dash": "2,3", "marker": None},
    "noisy": {"stroke": "#d62728", "dash": None, "marker": "circle"},
    "compensated": {"stroke": "#1f77b4", "dash": None, "marker": "square"},
    "measured": {"stroke": "#d62728", "dash": None, "marker": "circle"},
}


def _x(k: float) -> float:
    return LEFT + (k - 0.5) / 5.0 * (WIDTH - LEFT - RIGHT)


def _y(s: float) -> float:
    return HEIGHT - BOTTOM - s / Y_MAX * (HEIGHT - TOP - BOTTOM)


def entropy_curve_svg(series: dict, title: str = "Entanglement entropy S(k)") -> str:
    """``series`` maps a style name to ``[(k, mean, spread), ...]``."""
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{_y(0):.1f}" x2="{WIDTH - RIGHT}" y2="{_y(0):.1f}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{_y(0):.1f}" x2="{LEFT}" y2="{TOP}" stroke="black"/>',
    ]
    for k in range(1, 6):
        out.append(f'<text x="{_x(k):.1f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle" font-size="12">{k}</text>')
    for s in range(0, int(Y_MAX) + 1):
        out.append(f'<text x="{LEFT - 8}" y="{_y(s) + 4:.1f}" text-anchor="end" font-size="12">{s}</text>')
    out.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">k</text>')
    out.append(f'<text x="16" y="{HEIGHT / 2:.1f}" font-size="12" transform="rotate(-90 16 {HEIGHT / 2:.1f})">S (bits)</text>')
    for i, (name, points) in enumerate(series.items()):
        st = STYLES.get(name, STYLES["measured"])
        color = st["stroke"]
        if st["marker"] is None:
            pts = " ".join(f"{_x(k):.1f},{_y(m):.1f}" for k, m, _ in points)
            dash = f' stroke-dasharray="{st["dash"]}"' if st["dash"] else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        else:
            for k, m, spread in points:
                x, y = _x(k), _y(m)
                out.append(f'<line x1="{x:.1f}" y1="{_y(m - spread):.1f}" x2="{x:.1f}" y2="{_y(m + spread):.1f}" stroke="{color}"/>')
                if st["marker"] == "circle":
                    out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="5" fill="none" stroke="{color}" stroke-width="2"/>')
                else:
                    out.append(f'<rect x="{x - 5:.1f}" y="{y - 5:.1f}" width="10" height="10" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = TOP + 14 * i + 6
        out.append(f'<text x="{LEFT + 10}" y="{ly + 4}" font-size="11" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
