"""Circle placement along a fixed cycle.

Each node gets one disk of the common radius r whose boundary passes through
the node.  Disks must be pairwise disjoint; a disk may cross edges that the
cycle has already traversed before reaching its node, but not the rest of
the cycle (weak conformance).  The soft variant counts such crossings as a
penalty, the hard variant discards offending candidates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError
from .geometry import EPS, Arc, CurveBank, Curve, Disk, Point, Segment, curve_primitives

SPREAD_FACTOR = {3: math.sqrt(3.0), 4: math.sqrt(2.0), 5: 2.0 * math.sin(math.pi / 5)}


@dataclass
class PlacementParams:
    n_candidates: int = 64
    max_sweeps: int = 50
    restarts: int = 5
    seed: int = 0
    tol: float = EPS

    def __post_init__(self):
        if self.n_candidates < 1 or self.max_sweeps < 1 or self.restarts < 1:
            raise InputError("placement counts must be positive")


@dataclass(frozen=True)
class Placement:
    """Disks indexed by node id, all of radius ``radius``."""

    disks: tuple[Disk, ...]
    radius: float
    penalty: int = 0

    @classmethod
    def degenerate(cls, points: Sequence[Point]) -> "Placement":
        return cls(tuple(Disk(Point(*p), 0.0) for p in points), 0.0, 0)

    @property
    def centers(self) -> np.ndarray:
        return np.array([d.center for d in self.disks], dtype=float).reshape(-1, 2)


class CycleGeometry:
    """Node coordinates, a visiting order and the curve leaving each position.

    ``curves[i]`` runs from ``order[i]`` to ``order[i+1]``; the last one closes
    the cycle.  ``headings`` (node-indexed) marks curves that must leave and
    enter each node along a fixed direction, as Dubins maneuvers do.
    """

    def __init__(self, points: Sequence[Sequence[float]], order: Sequence[int], curves: Sequence[Curve],
                 headings: Sequence[float] | None = None):
        self.points = [Point(float(x), float(y)) for x, y in points]
        self.order = tuple(order)
        self.curves = tuple(curves)
        self.headings = None if headings is None else np.asarray(headings, dtype=float)
        n = len(self.points)
        if len(self.order) != n or sorted(self.order) != list(range(n)):
            raise InputError("order must be a permutation of the points")
        if len(self.curves) != n:
            raise InputError("one curve per cycle position required")
        self.bank = CurveBank(self.curves)
        self.lo, self.hi = curve_boxes(self.curves)

    @classmethod
    def euclidean(cls, points, order):
        pts = [Point(float(x), float(y)) for x, y in points]
        n = len(order)
        curves = [Segment(pts[order[i]], pts[order[(i + 1) % n]]) for i in range(n)]
        return cls(pts, order, curves)

    @property
    def n(self) -> int:
        return len(self.points)


def curve_boxes(curves: Sequence[Curve]) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned boxes containing each curve (arcs use their full circle)."""
    lo = np.empty((len(curves), 2))
    hi = np.empty((len(curves), 2))
    for k, curve in enumerate(curves):
        xs, ys = [], []
        prims = curve_primitives(curve)
        if not prims:
            p = curve.start.position
            xs.append(p.x)
            ys.append(p.y)
        for prim in prims:
            if isinstance(prim, Arc):
                cx, cy = prim.center
                xs += [cx - prim.radius, cx + prim.radius]
                ys += [cy - prim.radius, cy + prim.radius]
            else:
                xs += [prim.a.x, prim.b.x]
                ys += [prim.a.y, prim.b.y]
        lo[k] = min(xs), min(ys)
        hi[k] = max(xs), max(ys)
    return lo, hi


def candidate_centers(points: np.ndarray, r: float, k: int, phase=None) -> np.ndarray:
    """Centers at distance r from each node on k evenly spaced bearings; shape (n, k, 2).

    ``phase`` (one angle per node) rotates each node's ring, so a ring started
    at a node's heading always holds the two bearings square to it.
    """
    theta = 2.0 * np.pi * np.arange(k) / k
    if phase is None:
        theta = np.broadcast_to(theta, (len(points), k))
    else:
        theta = np.asarray(phase, dtype=float).reshape(-1, 1) + theta
    ring = np.stack([np.cos(theta), np.sin(theta)], axis=2) * r
    return points[:, None, :] + ring


def remainder_penalties(geom: CycleGeometry, centers: np.ndarray, r: float, tol: float = EPS) -> np.ndarray:
    """Per node and candidate: how many curves of the cycle remainder the disk crosses.

    The remainder of the node at position i is curves i..n-1, including the
    closing curve.
    """
    pts = np.array(geom.points)
    pen = np.zeros(centers.shape[:2], dtype=np.int64)
    reach = 2.0 * r
    for i, v in enumerate(geom.order):
        gap = np.maximum(np.maximum(geom.lo[i:] - pts[v], pts[v] - geom.hi[i:]), 0.0)
        near = np.nonzero(np.hypot(gap[:, 0], gap[:, 1]) < reach)[0] + i
        if near.size == 0:
            continue
        d = geom.bank.min_distance(centers[v], near)
        pen[v] = (d < r - tol).sum(axis=1)
    return pen


def heading_blocked(geom: CycleGeometry, centers: np.ndarray, r: float) -> np.ndarray:
    """Candidates that would cut every curve leaving (or, at the start, entering) their node.

    With a fixed heading, all curves out of a node depart along it, so a disk
    reaching across the departure direction deletes every outgoing edge of
    its own node and no rerouting can recover.  The start node's disk must
    also keep clear of the arrival direction, or no closing curve survives.
    """
    blocked = np.zeros(centers.shape[:2], dtype=bool)
    if geom.headings is None:
        return blocked
    pts = np.array(geom.points)
    u = np.stack([np.cos(geom.headings), np.sin(geom.headings)], axis=1)
    along = np.einsum("nkd,nd->nk", centers - pts[:, None, :], u)
    thr = 1e-9 * max(r, 1.0)
    blocked = along > thr
    start = geom.order[0]
    blocked[start] |= along[start] < -thr
    return blocked


def _best_response(geom, r, pen, allowed, params, rng) -> tuple[np.ndarray, np.ndarray] | None:
    """Iterated best response over candidate choices; (choice, chosen centers) or None.

    ``load[v, a]`` counts the neighbors whose current disk clashes with
    candidate a of node v, so a node's best response is a single argmin.
    """
    n, k = pen.shape
    pts = np.array(geom.points)
    centers = candidate_centers(pts, r, k, geom.headings)
    diff = pts[:, None, :] - pts[None, :, :]
    node_d = np.hypot(diff[..., 0], diff[..., 1])
    clash = 2.0 * r - params.tol
    nbrs: list[list[int]] = [[] for _ in range(n)]
    table: dict[tuple[int, int], np.ndarray] = {}
    for v in range(n):
        for u in np.nonzero(node_d[v] < 4.0 * r)[0]:
            u = int(u)
            if u > v:
                d = centers[v][:, None, :] - centers[u][None, :, :]
                m = (np.hypot(d[..., 0], d[..., 1]) < clash).astype(np.int64)
                if m.any():
                    table[v, u] = m
                    table[u, v] = m.T
                    nbrs[v].append(u)
                    nbrs[u].append(v)
    big = n * n + 1
    score_base = np.where(allowed, pen, np.iinfo(np.int64).max // 4)
    best = None
    for restart in range(params.restarts):
        if restart == 0:
            choice = np.argmin(score_base, axis=1)
        else:
            choice = np.array([rng.choice(np.nonzero(allowed[v])[0]) for v in range(n)])
        load = np.zeros((n, k), dtype=np.int64)
        for v in range(n):
            for u in nbrs[v]:
                load[v] += table[v, u][:, choice[u]]

        def move(v, pick):
            old = choice[v]
            for u in nbrs[v]:
                m = table[u, v]
                load[u] += m[:, pick] - m[:, old]
            choice[v] = pick

        for _ in range(params.max_sweeps):
            changed = False
            for v in geom.order:
                score = load[v] * big + score_base[v]
                pick = int(np.argmin(score))
                if score[pick] < score[choice[v]]:
                    move(v, pick)
                    changed = True
            if not changed:
                stuck = np.nonzero(load[np.arange(n), choice])[0]
                if stuck.size == 0:
                    break
                # shake the nodes still in conflict and keep sweeping
                for v in stuck:
                    if rng.random() < 0.5:
                        move(int(v), int(rng.choice(np.nonzero(allowed[v])[0])))
        if not load[np.arange(n), choice].any():
            total = int(pen[np.arange(n), choice].sum())
            if best is None or total < best[0]:
                best = (total, choice.copy())
            if total == 0:
                break
    if best is None:
        return None
    choice = best[1]
    return choice, centers[np.arange(n), choice]


def _place(geom: CycleGeometry, r: float, params: PlacementParams | None, hard: bool) -> Placement | None:
    if params is None:
        params = PlacementParams()
    if not r > 0:
        raise InputError("radius must be positive")
    pts = np.array(geom.points)
    centers = candidate_centers(pts, r, params.n_candidates, geom.headings)
    pen = remainder_penalties(geom, centers, r, params.tol)
    allowed = ~heading_blocked(geom, centers, r)
    if hard:
        allowed &= pen == 0
    if not allowed.any(axis=1).all():
        return None
    rng = np.random.default_rng(params.seed)
    res = _best_response(geom, r, pen, allowed, params, rng)
    if res is None:
        return None
    choice, cur = res
    n = geom.n
    disks = tuple(Disk(Point(float(cur[v, 0]), float(cur[v, 1])), float(r)) for v in range(n))
    return Placement(disks, float(r), int(pen[np.arange(n), choice].sum()))


def place_circles_soft(geom: CycleGeometry, r: float, params: PlacementParams | None = None) -> Placement | None:
    """Pairwise disjoint disks minimizing remainder crossings; crossings allowed."""
    return _place(geom, r, params, hard=False)


def place_circles_hard(geom: CycleGeometry, r: float, params: PlacementParams | None = None) -> Placement | None:
    """Pairwise disjoint disks that cross nothing of the cycle remainder."""
    return _place(geom, r, params, hard=True)


def radius_upper_bound(points: Sequence[Sequence[float]]) -> float:
    """An r no feasible common radius can exceed.

    Two packing arguments, the smaller one wins.  Area: every disk lies in
    the node box grown by 2r on each side, so n*pi*r^2 <= (W+4r)(H+4r); this
    only bounds r once n*pi > 16.  Spreading: centers lie within R+r of the
    box center (R the largest node distance from it) and are 2r apart, which
    caps 2r by the best minimum separation of n points in that circle.  Two
    nodes admit arbitrarily large disks, hence infinity.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 2:
        raise InputError("radius bound needs at least two points")
    if n == 2:
        return math.inf
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    w, h = hi - lo
    mid = (lo + hi) / 2
    big_r = float(np.hypot(*(pts - mid).T).max())
    s = SPREAD_FACTOR.get(n, 1.0)
    bound = s * big_r / (2.0 - s)
    a = n * math.pi - 16.0
    if a > 0:
        b = 4.0 * (w + h)
        area = (b + math.sqrt(b * b + 4.0 * a * w * h)) / (2.0 * a)
        bound = min(bound, area)
    return float(bound)


@dataclass
class WpccpResult:
    placement: Placement
    radius: float
    ub: float
    ub0: float
    oracle_calls: int = 0
    trace: list[tuple[float, float]] = field(default_factory=list)


def wpccp_bisection(geom: CycleGeometry, eps: float = 0.1, params: PlacementParams | None = None,
                    ub0: float | None = None) -> WpccpResult:
    """Largest radius (within eps) with a hard placement along the fixed cycle.

    The returned ``ub`` is the final bracket end; ``ub0`` the packing bound the
    search started from.  r = 0 with degenerate disks signals that no positive
    radius was found.
    """
    if not eps > 0:
        raise InputError("eps must be positive")
    if ub0 is None:
        ub0 = radius_upper_bound(geom.points)
    if not math.isfinite(ub0):
        raise InputError("radius bisection needs at least three nodes")
    lb, ub = 0.0, float(ub0)
    best = Placement.degenerate(geom.points)
    calls = 0
    trace = [(lb, ub)]
    while ub - lb > eps:
        mid = 0.5 * (lb + ub)
        calls += 1
        found = place_circles_hard(geom, mid, params)
        if found is not None:
            lb, best = mid, found
        else:
            ub = mid
        trace.append((lb, ub))
    return WpccpResult(best, lb, ub, float(ub0), calls, trace)
