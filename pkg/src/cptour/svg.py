"""SVG pictures of tours with their circles."""
from __future__ import annotations

import math
from typing import Sequence

from .geometry import Arc, Config, Point, dubins_shortest


def _f(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _dubins_path_d(path, flip) -> str:
    parts = []
    for prim in path.primitives():
        if isinstance(prim, Arc):
            end = prim.end
            large = 1 if abs(prim.sweep) > math.pi else 0
            # y is flipped, so counter-clockwise in the plane is clockwise on screen
            sweep_flag = 0 if prim.sweep > 0 else 1
            parts.append(f"A {_f(prim.radius)} {_f(prim.radius)} 0 {large} {sweep_flag} {_f(end.x)} {_f(flip(end.y))}")
        else:
            parts.append(f"L {_f(prim.b.x)} {_f(flip(prim.b.y))}")
    return " ".join(parts)


def render_svg(record, points: Sequence[Point], width: int = 800) -> str:
    """Nodes, disks, the tour (segments or Dubins arcs) and a start marker.

    One user unit per length unit; the view box is the node bounding box
    grown by twice the radius.  Output depends only on the inputs.
    """
    pts = [Point(float(x), float(y)) for x, y in points]
    r = float(record.radius or 0.0) if record is not None else 0.0
    xs = [p.x for p in pts] or [0.0]
    ys = [p.y for p in pts] or [0.0]
    pad = 2.0 * r if r > 0 else 0.05 * max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    w, h = max(x1 - x0, 1e-9), max(y1 - y0, 1e-9)
    unit = max(w, h) / 400.0

    def flip(y):
        return y0 + y1 - y

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{int(round(width * h / w))}" '
           f'viewBox="{_f(x0)} {_f(y0)} {_f(w)} {_f(h)}">']
    tour = [v - 1 for v in record.tour] if record is not None and record.tour else []
    circles = record.circles if record is not None else []
    if circles:
        out.append(f'<g fill="#c8d8ec" fill-opacity="0.6" stroke="#3b6ea5" stroke-width="{_f(unit)}">')
        for x, y, rad in circles:
            out.append(f'<circle cx="{_f(x)}" cy="{_f(flip(y))}" r="{_f(rad)}"/>')
        out.append("</g>")
    if tour:
        n = len(tour)
        first = pts[tour[0]]
        d = [f"M {_f(first.x)} {_f(flip(first.y))}"]
        if record.variant == "dubins" and record.headings:
            cfg = [Config.of(p.x, p.y, hd) for p, hd in zip(pts, record.headings)]
            for i in range(n):
                a, b = tour[i], tour[(i + 1) % n]
                d.append(_dubins_path_d(dubins_shortest(cfg[a], cfg[b], record.dubins_radius), flip))
        else:
            d += [f"L {_f(pts[v].x)} {_f(flip(pts[v].y))}" for v in tour[1:]]
            d.append("Z")
        out.append(f'<path d="{" ".join(d)}" fill="none" stroke="#b03a2e" stroke-width="{_f(2 * unit)}"/>')
        nxt = pts[tour[1 % n]]
        ang = math.atan2(nxt.y - first.y, nxt.x - first.x)
        if record.variant == "dubins" and record.headings:
            ang = record.headings[tour[0]]
        tip = Point(first.x + 12 * unit * math.cos(ang), first.y + 12 * unit * math.sin(ang))
        q = 6 * unit
        fx, fy = first.x, flip(first.y)
        out.append(f'<path d="M {_f(fx - q)} {_f(fy)} L {_f(fx)} {_f(fy - q)} L {_f(fx + q)} {_f(fy)} '
                   f'L {_f(fx)} {_f(fy + q)} Z" fill="none" stroke="#1e8449" stroke-width="{_f(2 * unit)}"/>')
        out.append(f'<path d="M {_f(first.x)} {_f(flip(first.y))} L {_f(tip.x)} {_f(flip(tip.y))}" '
                   f'stroke="#1e8449" stroke-width="{_f(2 * unit)}"/>')
    dots = " ".join(f"M {_f(p.x)} {_f(flip(p.y))} h 0" for p in pts)
    out.append(f'<path d="{dots}" stroke="#222" stroke-width="{_f(5 * unit)}" stroke-linecap="round"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
