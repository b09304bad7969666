"""Tour + circle placement solvers, Euclidean and Dubins.

The outer loop bisects the common radius.  For a candidate radius, disks are
placed along the initial tour; if some disk blocks the tour's remainder, the
blocked edges become the delete function of a self-deleting graph and GRASP
reroutes the tour around them.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InputError
from .geometry import EPS, Config, Curve, CurveBank, Point, Segment, dubins_shortest
from .placement import (CycleGeometry, Placement, PlacementParams, candidate_centers, place_circles_soft,
                        radius_upper_bound, wpccp_bisection)
from .sdgraph import Cycle, SelfDeletingGraph, cycle_cost
from .tspsd import GraspParams, StopCondition, grasp


# --------------------------------------------------------------------------
# roadmaps: the complete graph with its edge curves
# --------------------------------------------------------------------------

class Roadmap:
    """Nodes, directed edge weights and the curve realizing every edge.

    Euclidean roadmaps store one segment per unordered pair (a collision
    blocks both directions); Dubins roadmaps store every directed maneuver
    between the fixed node headings.
    """

    def __init__(self, points, weights: np.ndarray, pairs: list[tuple[int, int]], curves: list[Curve],
                 variant: str, headings: Sequence[float] | None = None, rho: float | None = None):
        self.points = [Point(float(x), float(y)) for x, y in points]
        self.weights = weights
        self.pairs = pairs
        self.curves = curves
        self.variant = variant
        self.headings = None if headings is None else tuple(float(h) for h in headings)
        self.rho = rho
        self._index = {p: k for k, p in enumerate(pairs)}
        self._bank: CurveBank | None = None

    @classmethod
    def euclidean(cls, points) -> "Roadmap":
        pts = [Point(float(x), float(y)) for x, y in points]
        arr = np.array(pts, dtype=float).reshape(-1, 2)
        diff = arr[:, None, :] - arr[None, :, :]
        weights = np.hypot(diff[..., 0], diff[..., 1])
        n = len(pts)
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        curves = [Segment(pts[a], pts[b]) for a, b in pairs]
        return cls(pts, weights, pairs, curves, "euclidean")

    @classmethod
    def dubins(cls, points, headings: Sequence[float], rho: float) -> "Roadmap":
        if not rho > 0:
            raise InputError("Dubins turning radius must be positive")
        pts = [Point(float(x), float(y)) for x, y in points]
        n = len(pts)
        if len(headings) != n:
            raise InputError("one heading per node required")
        cfg = [Config.of(p.x, p.y, h) for p, h in zip(pts, headings)]
        weights = np.zeros((n, n))
        pairs, curves = [], []
        for a in range(n):
            for b in range(n):
                if a != b:
                    path = dubins_shortest(cfg[a], cfg[b], rho)
                    weights[a, b] = path.length
                    pairs.append((a, b))
                    curves.append(path)
        return cls(pts, weights, pairs, curves, "dubins", [c.heading for c in cfg], rho)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def bank(self) -> CurveBank:
        if self._bank is None:
            self._bank = CurveBank(self.curves)
        return self._bank

    def curve(self, a: int, b: int) -> Curve:
        if self.variant == "euclidean":
            if a < b:
                return self.curves[self._index[(a, b)]]
            return Segment(self.points[a], self.points[b])
        return self.curves[self._index[(a, b)]]

    def cycle_geometry(self, order: Sequence[int]) -> CycleGeometry:
        n = len(order)
        return CycleGeometry(self.points, order, [self.curve(order[i], order[(i + 1) % n]) for i in range(n)],
                             self.headings)

    def tour_cost(self, order: Sequence[int]) -> float:
        n = len(order)
        return float(sum(self.weights[order[i], order[(i + 1) % n]] for i in range(n)))


def generate_tspsd(roadmap: Roadmap, placement: Placement, tol: float = EPS) -> SelfDeletingGraph:
    """Self-deleting graph whose f(v) holds every edge crossing v's disk."""
    n = roadmap.n
    delete_sets: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    r = placement.radius
    if r > 0 and roadmap.pairs:
        hits = roadmap.bank.min_distance(placement.centers) < r - tol
        for v, k in zip(*np.nonzero(hits)):
            a, b = roadmap.pairs[k]
            delete_sets[v].append((a, b))
            if roadmap.variant == "euclidean":
                delete_sets[v].append((b, a))
    return SelfDeletingGraph(roadmap.weights.tolist(), delete_sets, coords=roadmap.points)


# --------------------------------------------------------------------------
# initial tours
# --------------------------------------------------------------------------

def _nearest_neighbor(d: np.ndarray, start: int) -> list[int]:
    n = len(d)
    seen = np.zeros(n, dtype=bool)
    tour = [start]
    seen[start] = True
    for _ in range(n - 1):
        row = np.where(seen, np.inf, d[tour[-1]])
        nxt = int(np.argmin(row))
        tour.append(nxt)
        seen[nxt] = True
    return tour


def _two_opt(d: np.ndarray, tour: list[int]) -> tuple[list[int], bool]:
    n = len(tour)
    t = np.array(tour)
    improved_any = False
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            a, b = t[i], t[i + 1]
            js = np.arange(i + 2, n if i > 0 else n - 1)
            if js.size == 0:
                continue
            c = t[js]
            dd = t[(js + 1) % n]
            delta = d[a, c] + d[b, dd] - d[a, b] - d[c, dd]
            k = int(np.argmin(delta))
            if delta[k] < -1e-10:
                j = int(js[k])
                t[i + 1:j + 1] = t[i + 1:j + 1][::-1]
                improved = improved_any = True
    return t.tolist(), improved_any


def _or_opt(d: np.ndarray, tour: list[int], max_len: int = 3) -> tuple[list[int], bool]:
    n = len(tour)
    improved_any = False
    improved = True
    while improved:
        improved = False
        for m in range(1, min(max_len, n - 2) + 1):
            for i in range(n):
                seg = [tour[(i + s) % n] for s in range(m)]
                prev, nxt = tour[(i - 1) % n], tour[(i + m) % n]
                gain = d[prev, seg[0]] + d[seg[-1], nxt] - d[prev, nxt]
                rest = [tour[(i + m + s) % n] for s in range(n - m)]
                u = np.array(rest[:-1])
                v = np.array(rest[1:])
                fwd = d[u, seg[0]] + d[seg[-1], v] - d[u, v]
                bwd = d[u, seg[-1]] + d[seg[0], v] - d[u, v]
                kf, kb = int(np.argmin(fwd)), int(np.argmin(bwd))
                if min(fwd[kf], bwd[kb]) < gain - 1e-10:
                    if fwd[kf] <= bwd[kb]:
                        k, block = kf, seg
                    else:
                        k, block = kb, seg[::-1]
                    tour = rest[:k + 1] + block + rest[k + 1:]
                    improved = improved_any = True
                    break
            if improved:
                break
    return tour, improved_any


def _local_search(d: np.ndarray, tour: list[int]) -> list[int]:
    while True:
        tour, a = _two_opt(d, tour)
        tour, b = _or_opt(d, tour)
        if not b:
            return tour


def _rotate(tour: list[int], start: int = 0) -> list[int]:
    k = tour.index(start)
    return tour[k:] + tour[:k]


def tsp_tours(points, seed: int = 0, restarts: int = 5) -> list[list[int]]:
    """Distinct local optima from nearest-neighbor starts, cheapest first."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 3:
        raise InputError("a tour needs at least three points")
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    rng = random.Random(seed)
    starts = [0] + [rng.randrange(n) for _ in range(restarts - 1)]
    found: dict[tuple[int, ...], float] = {}
    for s in starts:
        tour = _rotate(_local_search(d, _nearest_neighbor(d, s)))
        if tour[1] > tour[-1]:
            tour = [tour[0]] + tour[1:][::-1]
        key = tuple(tour)
        found[key] = float(sum(d[tour[i], tour[(i + 1) % n]] for i in range(n)))
    return [list(t) for t, _ in sorted(found.items(), key=lambda kv: (kv[1], kv[0]))]


def solve_tsp_initial(points, seed: int = 0, restarts: int = 5) -> Cycle:
    """Nearest neighbor, then 2-opt and Or-opt to a local optimum; best of several starts."""
    tour = tsp_tours(points, seed, restarts)[0]
    roadmap = Roadmap.euclidean(points)
    return Cycle(tuple(tour), roadmap.tour_cost(tour))


@dataclass(frozen=True)
class HeadingGrid:
    k: int = 8

    def __post_init__(self):
        if self.k < 2:
            raise InputError("at least two headings per node")

    @property
    def headings(self) -> list[float]:
        return [2.0 * math.pi * j / self.k for j in range(self.k)]


class _DubinsTable:
    """Lazily evaluated k x k maneuver lengths between node pairs."""

    def __init__(self, points, rho: float, grid: HeadingGrid):
        self.points = [Point(float(x), float(y)) for x, y in points]
        self.rho = rho
        self.hs = grid.headings
        self.cache: dict[tuple[int, int], np.ndarray] = {}

    def __call__(self, a: int, b: int) -> np.ndarray:
        key = (a, b)
        if key not in self.cache:
            pa, pb = self.points[a], self.points[b]
            k = len(self.hs)
            out = np.empty((k, k))
            for i, ha in enumerate(self.hs):
                ca = Config.of(pa.x, pa.y, ha)
                for j, hb in enumerate(self.hs):
                    out[i, j] = dubins_shortest(ca, Config.of(pb.x, pb.y, hb), self.rho).length
            self.cache[key] = out
        return self.cache[key]


def assign_headings(order: Sequence[int], table: _DubinsTable) -> tuple[float, list[int]]:
    """Optimal grid headings for a fixed order: layered shortest path, closure by enumeration."""
    n = len(order)
    k = len(table.hs)
    best_cost, best_seq = math.inf, None
    for h0 in range(k):
        cost = table(order[0], order[1])[h0].copy()
        back = []
        for i in range(1, n - 1):
            step = cost[:, None] + table(order[i], order[i + 1])
            back.append(np.argmin(step, axis=0))
            cost = step.min(axis=0)
        total = cost + table(order[-1], order[0])[:, h0]
        last = int(np.argmin(total))
        if total[last] < best_cost - 1e-12:
            seq = [last]
            for bp in reversed(back):
                seq.append(int(bp[seq[-1]]))
            seq.append(h0)
            best_cost, best_seq = float(total[last]), seq[::-1]
    return best_cost, best_seq


@dataclass
class DubinsTour:
    order: tuple[int, ...]
    headings: tuple[float, ...]
    cost: float


def solve_dtsp_initial(points, rho: float, k: int = 8, seed: int = 0, restarts: int = 5) -> DubinsTour:
    """Euclidean tour orders (both directions) with optimal grid headings; cheapest wins.

    ``headings`` is indexed by node id.
    """
    if not rho > 0:
        raise InputError("Dubins turning radius must be positive")
    grid = HeadingGrid(k)
    table = _DubinsTable(points, rho, grid)
    best = None
    for tour in tsp_tours(points, seed, restarts):
        for order in (tour, [tour[0]] + tour[1:][::-1]):
            cost, seq = assign_headings(order, table)
            if best is None or cost < best[0] - 1e-12:
                best = (cost, order, seq)
    cost, order, seq = best
    headings = [0.0] * len(order)
    for v, j in zip(order, seq):
        headings[v] = grid.headings[j]
    return DubinsTour(tuple(order), tuple(headings), cost)


# --------------------------------------------------------------------------
# fixed radius and outer bisection
# --------------------------------------------------------------------------

@dataclass
class TspCpParams:
    eps: float = 0.1
    grasp: GraspParams = field(default_factory=lambda: GraspParams(
        stop=StopCondition(max_iterations=10), construction_attempts=5,
        construction_time_limit=None, construction_node_limit=20000))
    placement: PlacementParams = field(default_factory=PlacementParams)
    seed: int = 0
    tsp_restarts: int = 5
    headings: int = 8
    placement_attempts: int = 5

    def __post_init__(self):
        if not self.eps > 0:
            raise InputError("eps must be positive")
        if self.placement_attempts < 1:
            raise InputError("placement_attempts must be >= 1")


@dataclass
class TspCpSolution:
    cycle: Cycle
    placement: Placement
    radius: float
    cost: float
    variant: str
    headings: tuple[float, ...] | None = None
    dubins_radius: float | None = None
    wpccp_radius: float = 0.0
    ub0: float = 0.0
    trace: list[tuple[float, float]] = field(default_factory=list)


def tspcp_fixed_radius(roadmap: Roadmap, r: float, c_tsp: Cycle,
                       params: TspCpParams | None = None) -> tuple[Cycle, Placement] | None:
    """Place disks of radius r along c_tsp; reroute with GRASP if they block it.

    A placement whose self-deleting graph GRASP cannot solve is retried with
    the next placement seed, up to ``params.placement_attempts`` times.
    """
    if params is None:
        params = TspCpParams()
    if not r > 0:
        raise InputError("radius must be positive")
    if not isinstance(roadmap, Roadmap):
        roadmap = Roadmap.euclidean(roadmap)
    geom = roadmap.cycle_geometry(c_tsp.order)
    for attempt in range(params.placement_attempts):
        pparams = replace(params.placement, seed=params.placement.seed + attempt)
        placement = place_circles_soft(geom, r, pparams)
        if placement is None:
            continue
        if placement.penalty == 0:
            return c_tsp, placement
        graph = generate_tspsd(roadmap, placement, pparams.tol)
        found = grasp(graph, c_tsp.order, params.grasp)
        if found is not None:
            return Cycle(found.order, cycle_cost(graph, found.order)), placement
    return None


def rotate_start(roadmap: Roadmap, order: Sequence[int], params: PlacementParams | None = None,
                 halvings: int = 24) -> list[int]:
    """Rotate the cycle to start at the node whose own disk has the most room.

    The start node's disk must miss both its outgoing and its closing curve.
    With fixed Dubins headings these can bend to opposite sides, capping the
    radius near the turning radius; any other node only has to miss its
    outgoing curve.  Score each node by the largest radius in a halving ladder
    below the packing bound admitting such a disk; earliest position wins ties.
    """
    if params is None:
        params = PlacementParams()
    order = list(order)
    geom = roadmap.cycle_geometry(order)
    ub = radius_upper_bound(roadmap.points)
    pts = np.array(roadmap.points)
    ladder = ub * 0.5 ** np.arange(halvings)
    best_pos, best_r = 0, -1.0
    for i, v in enumerate(order):
        bank = CurveBank([geom.curves[i - 1], geom.curves[i]])
        room = 0.0
        for r in ladder:
            phase = None if geom.headings is None else geom.headings[v:v + 1]
            cands = candidate_centers(pts[v:v + 1], r, params.n_candidates, phase)[0]
            if (bank.min_distance(cands) >= r - params.tol).all(axis=1).any():
                room = float(r)
                break
        if room > best_r:
            best_pos, best_r = i, room
    return order[best_pos:] + order[:best_pos]


def _bisect(roadmap: Roadmap, c_init: Cycle, params: TspCpParams) -> TspCpSolution:
    order = rotate_start(roadmap, c_init.order, params.placement)
    c_init = Cycle(tuple(order), c_init.cost)
    geom = roadmap.cycle_geometry(c_init.order)
    ub0 = radius_upper_bound(roadmap.points)
    wp = wpccp_bisection(geom, params.eps, params.placement, ub0=ub0)
    lb, ub = wp.radius, wp.ub0
    cycle, placement = c_init, wp.placement
    trace = [(lb, ub)]
    while ub - lb > params.eps:
        r_cand = 0.5 * (lb + ub)
        res = tspcp_fixed_radius(roadmap, r_cand, c_init, params)
        if res is not None:
            lb = r_cand
            cycle, placement = res
        else:
            ub = r_cand
        trace.append((lb, ub))
    return TspCpSolution(cycle, placement, lb, roadmap.tour_cost(cycle.order), roadmap.variant,
                         roadmap.headings, roadmap.rho, wp.radius, ub0, trace)


def solve_tspcp(points, params: TspCpParams | None = None) -> TspCpSolution:
    """Largest common radius and a tour for it, Euclidean edges."""
    if params is None:
        params = TspCpParams()
    if len(points) < 3:
        raise InputError("TSP-CP needs at least three nodes")
    c_tsp = solve_tsp_initial(points, params.seed, params.tsp_restarts)
    return _bisect(Roadmap.euclidean(points), c_tsp, params)


def solve_dtspcp(points, rho: float, params: TspCpParams | None = None) -> TspCpSolution:
    """Dubins variant: headings fixed by the initial Dubins tour, maneuvers as edges."""
    if params is None:
        params = TspCpParams()
    if len(points) < 3:
        raise InputError("DTSP-CP needs at least three nodes")
    tour = solve_dtsp_initial(points, rho, params.headings, params.seed, params.tsp_restarts)
    roadmap = Roadmap.dubins(points, tour.headings, rho)
    c_init = Cycle(tour.order, roadmap.tour_cost(tour.order))
    return _bisect(roadmap, c_init, params)
