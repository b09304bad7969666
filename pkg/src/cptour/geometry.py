"""Planar primitives, Dubins maneuvers and the collision predicates built on them.

All obstacle tests use the open interior of a disk shrunk by ``tol``: a curve
collides with a disk when its minimum distance to the center is strictly
below ``radius - tol``.  Touching the boundary is legal, which is what lets
every node sit on the rim of its own disk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

EPS = 1e-9
TWO_PI = 2.0 * math.pi

WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


class Disk(NamedTuple):
    center: Point
    radius: float


class Arc(NamedTuple):
    """Circular arc; ``sweep`` is signed (positive = counter-clockwise)."""

    center: Point
    radius: float
    start_angle: float
    sweep: float

    def point_at(self, angle_offset: float) -> Point:
        a = self.start_angle + angle_offset
        return Point(self.center.x + self.radius * math.cos(a),
                     self.center.y + self.radius * math.sin(a))

    @property
    def start(self) -> Point:
        return self.point_at(0.0)

    @property
    def end(self) -> Point:
        return self.point_at(self.sweep)

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)


def mod2pi(angle: float) -> float:
    """Normalize to [0, 2*pi); values a rounding error below 2*pi snap to 0."""
    a = angle % TWO_PI
    if TWO_PI - a < 1e-10:
        return 0.0
    return a


def dist(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


@dataclass(frozen=True)
class Config:
    position: Point
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "position", Point(float(self.position[0]), float(self.position[1])))
        object.__setattr__(self, "heading", mod2pi(float(self.heading)))

    @classmethod
    def of(cls, x: float, y: float, heading: float) -> "Config":
        return cls(Point(x, y), heading)


# --------------------------------------------------------------------------
# Scalar distance predicates
# --------------------------------------------------------------------------

def point_segment_distance(p: Sequence[float], seg: Segment) -> float:
    (ax, ay), (bx, by) = seg
    dx, dy = bx - ax, by - ay
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / ll
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def point_arc_distance(p: Sequence[float], arc: Arc) -> float:
    cx, cy = arc.center
    dx, dy = p[0] - cx, p[1] - cy
    dc = math.hypot(dx, dy)
    if abs(arc.sweep) >= TWO_PI or dc == 0.0:
        return abs(dc - arc.radius)
    phi = math.atan2(dy, dx)
    if arc.sweep >= 0:
        rel = (phi - arc.start_angle) % TWO_PI
    else:
        rel = (arc.start_angle - phi) % TWO_PI
    if rel <= abs(arc.sweep):
        return abs(dc - arc.radius)
    return min(dist(p, arc.start), dist(p, arc.end))


def segment_disk_collides(seg: Segment, disk: Disk, tol: float = EPS) -> bool:
    return point_segment_distance(disk.center, seg) < disk.radius - tol


def disks_disjoint(d1: Disk, d2: Disk, tol: float = EPS) -> bool:
    return dist(d1.center, d2.center) >= d1.radius + d2.radius - tol


# --------------------------------------------------------------------------
# Dubins maneuvers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DubinsPath:
    word: str
    segment_params: tuple[float, float, float]
    rho: float
    start: Config
    end: Config
    length: float

    def primitives(self) -> list[Union[Arc, Segment]]:
        """Up to three arc/segment pieces in travel order (zero pieces dropped)."""
        out: list[Union[Arc, Segment]] = []
        x, y = self.start.position
        th = self.start.heading
        rho = self.rho
        for kind, param in zip(self.word, self.segment_params):
            if kind == "S":
                length = param * rho
                nx, ny = x + length * math.cos(th), y + length * math.sin(th)
                if length > 0.0:
                    out.append(Segment(Point(x, y), Point(nx, ny)))
                x, y = nx, ny
                continue
            if kind == "L":
                center = Point(x - rho * math.sin(th), y + rho * math.cos(th))
                start_angle = th - math.pi / 2
                sweep = param
                th = th + param
            else:
                center = Point(x + rho * math.sin(th), y - rho * math.cos(th))
                start_angle = th + math.pi / 2
                sweep = -param
                th = th - param
            arc = Arc(center, rho, start_angle, sweep)
            if param > 0.0:
                out.append(arc)
            x, y = arc.end
        return out

    def sample(self, step: float) -> np.ndarray:
        """Points along the path, spaced at most ``step`` apart, endpoints included."""
        pts = [np.array([self.start.position])]
        for prim in self.primitives():
            if isinstance(prim, Segment):
                length = dist(prim.a, prim.b)
                k = max(1, int(math.ceil(length / step)))
                t = np.linspace(0.0, 1.0, k + 1)[1:]
                pts.append(np.column_stack([prim.a.x + t * (prim.b.x - prim.a.x),
                                            prim.a.y + t * (prim.b.y - prim.a.y)]))
            else:
                k = max(1, int(math.ceil(prim.length / step)))
                ang = prim.start_angle + np.linspace(0.0, prim.sweep, k + 1)[1:]
                pts.append(np.column_stack([prim.center.x + prim.radius * np.cos(ang),
                                            prim.center.y + prim.radius * np.sin(ang)]))
        return np.vstack(pts)


def _dubins_words(alpha: float, beta: float, d: float):
    sa, sb = math.sin(alpha), math.sin(beta)
    ca, cb = math.cos(alpha), math.cos(beta)
    c_ab = math.cos(alpha - beta)
    d_sq = d * d
    out = {}

    p_sq = 2 + d_sq - 2 * c_ab + 2 * d * (sa - sb)
    if p_sq >= 0:
        tmp = math.atan2(cb - ca, d + sa - sb)
        out["LSL"] = (mod2pi(tmp - alpha), math.sqrt(p_sq), mod2pi(beta - tmp))

    p_sq = 2 + d_sq - 2 * c_ab + 2 * d * (sb - sa)
    if p_sq >= 0:
        tmp = math.atan2(ca - cb, d - sa + sb)
        out["RSR"] = (mod2pi(alpha - tmp), math.sqrt(p_sq), mod2pi(tmp - beta))

    p_sq = -2 + d_sq + 2 * c_ab + 2 * d * (sa + sb)
    if p_sq >= 0:
        p = math.sqrt(p_sq)
        tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        out["LSR"] = (mod2pi(tmp - alpha), p, mod2pi(tmp - beta))

    p_sq = -2 + d_sq + 2 * c_ab - 2 * d * (sa + sb)
    if p_sq >= 0:
        p = math.sqrt(p_sq)
        tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        out["RSL"] = (mod2pi(alpha - tmp), p, mod2pi(beta - tmp))

    tmp = (6.0 - d_sq + 2 * c_ab + 2 * d * (sa - sb)) / 8.0
    if abs(tmp) <= 1:
        phi = math.atan2(ca - cb, d - sa + sb)
        p = mod2pi(TWO_PI - math.acos(tmp))
        t = mod2pi(alpha - phi + mod2pi(p / 2.0))
        out["RLR"] = (t, p, mod2pi(alpha - beta - t + p))

    tmp = (6.0 - d_sq + 2 * c_ab + 2 * d * (sb - sa)) / 8.0
    if abs(tmp) <= 1:
        phi = math.atan2(ca - cb, d + sa - sb)
        p = mod2pi(TWO_PI - math.acos(tmp))
        t = mod2pi(-alpha - phi + p / 2.0)
        out["LRL"] = (t, p, mod2pi(beta - alpha - t + p))
    return out


def dubins_candidates(start: Config, end: Config, rho: float) -> dict[str, DubinsPath]:
    """Every existing word type between two configurations."""
    if not rho > 0:
        raise ValueError("turning radius must be positive")
    dx = end.position.x - start.position.x
    dy = end.position.y - start.position.y
    d = math.hypot(dx, dy) / rho
    theta = mod2pi(math.atan2(dy, dx)) if d > 0 else 0.0
    alpha = mod2pi(start.heading - theta)
    beta = mod2pi(end.heading - theta)
    return {
        word: DubinsPath(word, params, rho, start, end, rho * sum(params))
        for word, params in _dubins_words(alpha, beta, d).items()
    }


def dubins_shortest(start: Config, end: Config, rho: float) -> DubinsPath:
    cands = dubins_candidates(start, end, rho)
    best = None
    for word in WORDS:
        path = cands.get(word)
        if path is not None and (best is None or path.length < best.length):
            best = path
    return best


Curve = Union[Segment, DubinsPath]


def curve_primitives(curve: Curve) -> list[Union[Arc, Segment]]:
    if isinstance(curve, DubinsPath):
        return curve.primitives()
    return [curve]


def point_curve_distance(p: Sequence[float], curve: Curve) -> float:
    best = math.inf
    for prim in curve_primitives(curve):
        if isinstance(prim, Arc):
            best = min(best, point_arc_distance(p, prim))
        else:
            best = min(best, point_segment_distance(p, prim))
    if best == math.inf:
        # a zero-length maneuver degenerates to its start point
        start = curve.start.position if isinstance(curve, DubinsPath) else curve.a
        best = dist(p, start)
    return best


def dubins_disk_collides(path: DubinsPath, disk: Disk, tol: float = EPS) -> bool:
    return point_curve_distance(disk.center, path) < disk.radius - tol


def curve_disk_collides(curve: Curve, disk: Disk, tol: float = EPS) -> bool:
    if isinstance(curve, DubinsPath):
        return dubins_disk_collides(curve, disk, tol)
    return segment_disk_collides(curve, disk, tol)


def curve_length(curve: Curve) -> float:
    if isinstance(curve, DubinsPath):
        return curve.length
    return dist(curve.a, curve.b)


# --------------------------------------------------------------------------
# Batched distances
# --------------------------------------------------------------------------

_NONE, _SEG, _ARC = 0, 1, 2


class CurveBank:
    """Curves flattened into fixed-width primitive tables for numpy queries.

    ``min_distance(points, idx)`` returns an array of shape
    ``(len(points), len(idx))`` holding the distance from every query point
    to every selected curve.
    """

    SLOTS = 3

    def __init__(self, curves: Sequence[Curve]):
        c = len(curves)
        shape = (c, self.SLOTS)
        self.kind = np.zeros(shape, dtype=np.int8)
        self.ax = np.zeros(shape)
        self.ay = np.zeros(shape)
        self.bx = np.zeros(shape)
        self.by = np.zeros(shape)
        self.cx = np.zeros(shape)
        self.cy = np.zeros(shape)
        self.rad = np.zeros(shape)
        self.a0 = np.zeros(shape)
        self.sweep = np.zeros(shape)
        for ci, curve in enumerate(curves):
            prims = curve_primitives(curve)
            if not prims:
                p = curve.start.position
                prims = [Segment(p, p)]
            for s, prim in enumerate(prims):
                if isinstance(prim, Arc):
                    self.kind[ci, s] = _ARC
                    self.cx[ci, s], self.cy[ci, s] = prim.center
                    self.rad[ci, s] = prim.radius
                    self.a0[ci, s] = prim.start_angle
                    self.sweep[ci, s] = prim.sweep
                    (self.ax[ci, s], self.ay[ci, s]) = prim.start
                    (self.bx[ci, s], self.by[ci, s]) = prim.end
                else:
                    self.kind[ci, s] = _SEG
                    (self.ax[ci, s], self.ay[ci, s]) = prim.a
                    (self.bx[ci, s], self.by[ci, s]) = prim.b
        self.has_arcs = bool((self.kind == _ARC).any())
        used = (self.kind != _NONE).any(axis=0)
        self.slots_used = int(used.sum())

    def __len__(self):
        return self.kind.shape[0]

    def min_distance(self, points: np.ndarray, idx=None) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if idx is None:
            idx = slice(None)
        qx = points[:, 0][:, None]
        qy = points[:, 1][:, None]
        best = None
        for s in range(self.slots_used):
            kind = self.kind[idx, s][None, :]
            ax, ay = self.ax[idx, s][None, :], self.ay[idx, s][None, :]
            bx, by = self.bx[idx, s][None, :], self.by[idx, s][None, :]
            d = segment_distances(qx, qy, ax, ay, bx, by)
            if self.has_arcs:
                da = arc_distances(qx, qy, self.cx[idx, s][None, :], self.cy[idx, s][None, :],
                                   self.rad[idx, s][None, :], self.a0[idx, s][None, :],
                                   self.sweep[idx, s][None, :], ax, ay, bx, by)
                d = np.where(kind == _ARC, da, d)
            d = np.where(kind == _NONE, np.inf, d)
            best = d if best is None else np.minimum(best, d)
        if best is None:
            return np.full((points.shape[0], 0), np.inf)
        return best


def segment_distances(qx, qy, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    ll = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((qx - ax) * dx + (qy - ay) * dy) / ll
    t = np.where(ll > 0, np.clip(t, 0.0, 1.0), 0.0)
    return np.hypot(qx - (ax + t * dx), qy - (ay + t * dy))


def arc_distances(qx, qy, cx, cy, rad, a0, sweep, sx, sy, ex, ey):
    dx = qx - cx
    dy = qy - cy
    dc = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)
    rel = np.where(sweep >= 0, np.mod(phi - a0, TWO_PI), np.mod(a0 - phi, TWO_PI))
    inside = (rel <= np.abs(sweep)) | (dc == 0.0)
    d_rim = np.abs(dc - rad)
    d_end = np.minimum(np.hypot(qx - sx, qy - sy), np.hypot(qx - ex, qy - ey))
    return np.where(inside, d_rim, d_end)
