"""Hand-written SVG grouped bar charts with byte-stable output."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

PALETTE = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1"]


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _nice_max(v: float) -> float:
    if v <= 0:
        return 1.0
    mag = 10 ** math.floor(math.log10(v))
    for step in (1, 2, 2.5, 5, 10):
        if step * mag >= v:
            return step * mag
    return 10 * mag


def grouped_bars(title: str, groups: Sequence[str], series: Sequence[str],
                 values: Mapping[tuple[str, str], float], y_label: str = "") -> str:
    """One cluster per group, one bar per series. Missing cells are left empty."""
    width = max(420, 80 + len(groups) * (len(series) * 22 + 30))
    height = 320
    left, right, top, bottom = 60, 20, 40, 70
    plot_w = width - left - right
    plot_h = height - top - bottom
    vmax = _nice_max(max([v for v in values.values() if v is not None] or [0.0]))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>']
    for k in range(6):
        v = vmax * k / 5
        y = top + plot_h - plot_h * k / 5
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{width - right}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{_num(v)}</text>')
    if y_label:
        out.append(f'<text x="14" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {top + plot_h / 2:.1f})">{escape(y_label)}</text>')

    slot = plot_w / max(len(groups), 1)
    bar = min(22.0, (slot - 20) / max(len(series), 1))
    for gi, group in enumerate(groups):
        x0 = left + gi * slot + (slot - bar * len(series)) / 2
        for si, name in enumerate(series):
            v = values.get((group, name))
            if v is None:
                continue
            h = plot_h * v / vmax
            x = x0 + si * bar
            out.append(f'<rect x="{x:.1f}" y="{top + plot_h - h:.1f}" width="{bar - 2:.1f}" '
                       f'height="{h:.1f}" fill="{PALETTE[si % len(PALETTE)]}">'
                       f'<title>{escape(group)} / {escape(name)}: {v:.4f}</title></rect>')
        out.append(f'<text x="{left + gi * slot + slot / 2:.1f}" y="{top + plot_h + 16}" '
                   f'text-anchor="middle">{escape(group)}</text>')
    out.append(f'<line x1="{left}" y1="{top + plot_h}" x2="{width - right}" '
               f'y2="{top + plot_h}" stroke="#333"/>')

    lx = left
    ly = height - 22
    for si, name in enumerate(series):
        out.append(f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" '
                   f'fill="{PALETTE[si % len(PALETTE)]}"/>')
        out.append(f'<text x="{lx + 14}" y="{ly}">{escape(name)}</text>')
        lx += 24 + 7 * len(name)
    out.append("</svg>")
    return "\n".join(out) + "\n"
