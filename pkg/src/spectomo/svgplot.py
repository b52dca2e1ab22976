"""Minimal static SVG charts (boxplots, line plots, bar panels)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ["#1b1b1b", "#c0392b", "#27ae60", "#2c5fbf", "#8e44ad", "#d35400", "#16a085"]

W, H = 640, 400
ML, MR, MT, MB = 70, 20, 40, 60


def _doc(body: list[str], title: str, width: int = W, height: int = H) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    t = f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>'
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', t, *body, "</svg>"]) + "\n"


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e3 or abs(v) < 1e-2:
        return f"{v:.1e}"
    return f"{v:.3g}"


def _axes(lo: float, hi: float, ylabel: str, x0=ML, y0=MT, w=W - ML - MR, h=H - MT - MB) -> tuple[list[str], callable]:
    if hi <= lo:
        hi = lo + 1.0

    def ymap(v):
        return y0 + h - (v - lo) / (hi - lo) * h

    out = [
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y0 + h}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0 + h}" x2="{x0 + w}" y2="{y0 + h}" stroke="black"/>',
    ]
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        y = ymap(v)
        out.append(f'<line x1="{x0 - 4}" y1="{y:.1f}" x2="{x0}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 6}" y="{y + 4:.1f}" text-anchor="end">{_fmt(v)}</text>')
    out.append(
        f'<text x="16" y="{y0 + h / 2:.1f}" transform="rotate(-90 16 {y0 + h / 2:.1f})" '
        f'text-anchor="middle">{escape(ylabel)}</text>'
    )
    return out, ymap


def boxplot_svg(boxes: dict, title: str, ylabel: str = "squared error") -> str:
    """``boxes`` maps a label to a dict with ``min, q1, median, q3, max``."""
    if not boxes:
        return _doc([], title)
    lo = min(b["min"] for b in boxes.values())
    hi = max(b["max"] for b in boxes.values())
    pad = 0.05 * (hi - lo or 1.0)
    body, ymap = _axes(max(lo - pad, 0.0) if lo >= 0 else lo - pad, hi + pad, ylabel)
    slot = (W - ML - MR) / len(boxes)
    for i, (label, b) in enumerate(boxes.items()):
        cx = ML + slot * (i + 0.5)
        half = slot * 0.25
        color = PALETTE[i % len(PALETTE)]
        body.append(
            f'<line x1="{cx:.1f}" y1="{ymap(b["min"]):.1f}" x2="{cx:.1f}" y2="{ymap(b["max"]):.1f}" stroke="{color}"/>'
        )
        top, bottom = ymap(b["q3"]), ymap(b["q1"])
        body.append(
            f'<rect x="{cx - half:.1f}" y="{top:.1f}" width="{2 * half:.1f}" '
            f'height="{max(bottom - top, 0.5):.1f}" fill="white" stroke="{color}"/>'
        )
        ym = ymap(b["median"])
        body.append(f'<line x1="{cx - half:.1f}" y1="{ym:.1f}" x2="{cx + half:.1f}" y2="{ym:.1f}" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{cx:.1f}" y="{H - MB + 18}" text-anchor="middle">{escape(str(label))}</text>')
    return _doc(body, title)


def line_svg(series: dict, title: str, xlabel: str, ylabel: str, logx: bool = True) -> str:
    """``series`` maps a label to ``(xs, ys)``."""
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys]
    if not xs_all:
        return _doc([], title)
    tx = (lambda x: math.log10(x)) if logx else (lambda x: x)
    xlo, xhi = tx(min(xs_all)), tx(max(xs_all))
    if xhi <= xlo:
        xhi = xlo + 1
    body, ymap = _axes(0.0, max(ys_all) * 1.1 or 1.0, ylabel)
    w = W - ML - MR

    def xmap(x):
        return ML + 20 + (tx(x) - xlo) / (xhi - xlo) * (w - 40)

    for x in sorted(set(xs_all)):
        body.append(f'<text x="{xmap(x):.1f}" y="{H - MB + 18}" text-anchor="middle">{_fmt(x)}</text>')
    body.append(f'<text x="{ML + w / 2:.1f}" y="{H - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{xmap(x):.1f},{ymap(y):.1f}" for x, y in zip(xs, ys))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in zip(xs, ys):
            body.append(f'<circle cx="{xmap(x):.1f}" cy="{ymap(y):.1f}" r="3" fill="{color}"/>')
        body.append(f'<text x="{W - MR - 60}" y="{MT + 14 * i + 10}" fill="{color}">{escape(str(label))}</text>')
    return _doc(body, title)


def bar_panels_svg(panels: dict, title: str, ylabel: str = "proportion") -> str:
    """One bar chart per panel; ``panels`` maps a panel title to ``{category: value}``."""
    n = max(len(panels), 1)
    pw = 260
    width = ML + n * pw + MR
    body = []
    top = max((v for p in panels.values() for v in p.values()), default=1.0) or 1.0
    for i, (ptitle, bars) in enumerate(panels.items()):
        x0 = ML + i * pw
        axes, ymap = _axes(0.0, top, ylabel if i == 0 else "", x0=x0, w=pw - 20)
        body.extend(axes)
        body.append(f'<text x="{x0 + (pw - 20) / 2:.1f}" y="{MT - 6}" text-anchor="middle">{escape(str(ptitle))}</text>')
        if not bars:
            continue
        slot = (pw - 20) / len(bars)
        for j, (cat, v) in enumerate(bars.items()):
            bx = x0 + j * slot + 1
            y = ymap(v)
            body.append(
                f'<rect x="{bx:.1f}" y="{y:.1f}" width="{max(slot - 2, 1):.1f}" '
                f'height="{ymap(0) - y:.1f}" fill="{PALETTE[3]}"/>'
            )
            body.append(f'<text x="{bx + slot / 2:.1f}" y="{H - MB + 14}" text-anchor="middle" font-size="9">{escape(str(cat))}</text>')
    return _doc(body, title, width=width)
