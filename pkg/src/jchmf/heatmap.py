"""Self-contained SVG heatmaps of sweep results.

One rectangle per grid cell, a linear color scale between the observed
minimum and maximum (annotated in the legend), axes labeled with the
dimensionless sweep coordinates.  No external assets, valid XML.
"""

from __future__ import annotations

from .sweep import IncompleteGrid, SweepRecord

# evenly spaced anchors of the viridis colormap, dark to bright
_ANCHORS = (
    (0x44, 0x01, 0x54),
    (0x48, 0x28, 0x78),
    (0x3E, 0x49, 0x89),
    (0x31, 0x68, 0x8E),
    (0x26, 0x82, 0x8E),
    (0x1F, 0x9E, 0x89),
    (0x35, 0xB7, 0x79),
    (0x6E, 0xCE, 0x58),
    (0xB5, 0xDE, 0x2B),
    (0xFD, 0xE7, 0x25),
)

_MARGIN_LEFT = 80
_MARGIN_RIGHT = 24
_MARGIN_TOP = 34
_MARGIN_BOTTOM = 58
_PLOT = 480.0


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    x = t * (len(_ANCHORS) - 1)
    i = min(int(x), len(_ANCHORS) - 2)
    f = x - i
    lo, hi = _ANCHORS[i], _ANCHORS[i + 1]
    rgb = tuple(round(a + (b - a) * f) for a, b in zip(lo, hi))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def emit_heatmap(records: list[SweepRecord], observable: str, path: str) -> None:
    """Render one observable of a complete rectangular sweep grid to SVG."""
    if observable not in ("psi", "rho"):
        raise ValueError(f"observable must be 'psi' or 'rho', got {observable!r}")
    if not records:
        raise IncompleteGrid("no records")
    attr = "psi_min" if observable == "psi" else "rho"

    js = sorted({r.j_over_lambda for r in records})
    mus = sorted({r.mu_minus_omega_over_lambda for r in records})
    cells = {}
    for r in records:
        key = (r.j_over_lambda, r.mu_minus_omega_over_lambda)
        if key in cells:
            raise IncompleteGrid(f"duplicate grid point {key}")
        cells[key] = getattr(r, attr)
    if len(cells) != len(js) * len(mus):
        raise IncompleteGrid(
            f"{len(cells)} records cannot fill a {len(js)}x{len(mus)} grid"
        )
    for j in js:
        for m in mus:
            if (j, m) not in cells:
                raise IncompleteGrid(f"missing grid point ({j}, {m})")

    values = list(cells.values())
    vmin = min(values)
    vmax = max(values)
    span = vmax - vmin
    cell_w = _PLOT / len(js)
    cell_h = _PLOT / len(mus)
    width = _MARGIN_LEFT + _PLOT + _MARGIN_RIGHT
    height = _MARGIN_TOP + _PLOT + _MARGIN_BOTTOM

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" '
        f'height="{height:g}" viewBox="0 0 {width:g} {height:g}">',
        f'<rect x="0" y="0" width="{width:g}" height="{height:g}" fill="white"/>',
        f'<text x="{_MARGIN_LEFT:g}" y="20" font-family="sans-serif" '
        f'font-size="13">{observable}: min={vmin:.6g} max={vmax:.6g}</text>',
    ]
    for ji, j in enumerate(js):
        x = _MARGIN_LEFT + ji * cell_w
        for mi, m in enumerate(mus):
            y = _MARGIN_TOP + (len(mus) - 1 - mi) * cell_h
            t = 0.0 if span == 0.0 else (cells[(j, m)] - vmin) / span
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell_w + 0.35:.2f}" '
                f'height="{cell_h + 0.35:.2f}" fill="{_color(t)}"/>'
            )

    x0 = _MARGIN_LEFT
    x1 = _MARGIN_LEFT + _PLOT
    y0 = _MARGIN_TOP + _PLOT
    y1 = _MARGIN_TOP
    parts += [
        f'<text x="{x0:g}" y="{y0 + 16:g}" font-family="sans-serif" '
        f'font-size="11" text-anchor="middle">{js[0]:.4g}</text>',
        f'<text x="{x1:g}" y="{y0 + 16:g}" font-family="sans-serif" '
        f'font-size="11" text-anchor="middle">{js[-1]:.4g}</text>',
        f'<text x="{(x0 + x1) / 2:g}" y="{y0 + 40:g}" font-family="sans-serif" '
        f'font-size="14" text-anchor="middle">J/λ</text>',
        f'<text x="{x0 - 8:g}" y="{y0:g}" font-family="sans-serif" '
        f'font-size="11" text-anchor="end">{mus[0]:.4g}</text>',
        f'<text x="{x0 - 8:g}" y="{y1 + 10:g}" font-family="sans-serif" '
        f'font-size="11" text-anchor="end">{mus[-1]:.4g}</text>',
        f'<text x="{x0 - 46:g}" y="{(y0 + y1) / 2:g}" font-family="sans-serif" '
        f'font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 {x0 - 46:g} {(y0 + y1) / 2:g})">'
        f'(μ−ω)/λ</text>',
        "</svg>",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
