"""Minimal SVG line plot: target vs achieved pixel shift per projector column."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 480
LEFT, RIGHT, TOP, BOTTOM = 80, 30, 40, 60
SERIES = (("target", "#1f77b4", "6 4"), ("achieved", "#d62728", None))


def _nice_ticks(lo, hi, n=5):
    span = hi - lo
    raw = span / max(n - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = np.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else float(t))
        t += step
    return ticks


def _label(v):
    return f"{v:.6g}"


def render_shift_plot(pixel, target_shift_m, achieved_shift_m, title="Pixel shift per projector column"):
    x = np.asarray(pixel, dtype=np.float64)
    ys = {"target": np.asarray(target_shift_m) * 1e3, "achieved": np.asarray(achieved_shift_m) * 1e3}
    xlo, xhi = float(x.min()), float(x.max())
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    allv = np.concatenate(list(ys.values()))
    ylo, yhi = float(allv.min()), float(allv.max())
    pad = 0.05 * (yhi - ylo) if yhi > ylo else max(abs(yhi), 1e-3)
    ylo, yhi = ylo - pad, yhi + pad

    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return TOP + (yhi - v) / (yhi - ylo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{escape(title)}</text>',
        f'<g id="axes" stroke="black" stroke-width="1">'
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}"/>'
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}"/></g>',
    ]
    ticks = ['<g id="ticks" font-family="sans-serif" font-size="11">']
    for t in _nice_ticks(xlo, xhi):
        px = sx(t)
        ticks.append(f'<line x1="{px:.2f}" y1="{TOP + ph}" x2="{px:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        ticks.append(f'<text x="{px:.2f}" y="{TOP + ph + 18}" text-anchor="middle">{_label(t)}</text>')
    for t in _nice_ticks(ylo, yhi):
        py = sy(t)
        ticks.append(f'<line x1="{LEFT - 5}" y1="{py:.2f}" x2="{LEFT}" y2="{py:.2f}" stroke="black"/>')
        ticks.append(f'<text x="{LEFT - 8}" y="{py + 4:.2f}" text-anchor="end">{_label(t)}</text>')
    if ylo < 0.0 < yhi:
        ticks.append(
            f'<line x1="{LEFT}" y1="{sy(0.0):.2f}" x2="{LEFT + pw}" y2="{sy(0.0):.2f}" '
            'stroke="#999999" stroke-width="0.5"/>'
        )
    ticks.append("</g>")
    out.extend(ticks)
    out.append(
        f'<text id="xlabel" x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle" '
        'font-family="sans-serif" font-size="13">projector x-coordinate [pixel column]</text>'
    )
    out.append(
        f'<text id="ylabel" x="20" y="{TOP + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 20 {TOP + ph / 2:.2f})">pixel shift [mm], right positive</text>'
    )
    for i, (name, color, dash) in enumerate(SERIES):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, ys[name]))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(
            f'<polyline id="{name}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{pts}"/>'
        )
        ly = TOP + 14 + 18 * i
        out.append(
            f'<line x1="{LEFT + 12}" y1="{ly - 4}" x2="{LEFT + 40}" y2="{ly - 4}" stroke="{color}" '
            f'stroke-width="1.5"{dash_attr}/>'
        )
        out.append(f'<text x="{LEFT + 46}" y="{ly}" font-family="sans-serif" font-size="12">{name} shift</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
