"""Independent solution checker.

Deliberately naive: plain Python sets, no bitmasks, no solver imports.  Only
the scalar geometry predicates are shared with the solvers.  The delete
function of tour-with-circles solutions is re-derived from the circles.
"""
from __future__ import annotations

import math
from typing import Sequence

from .geometry import Config, Disk, Point, Segment, curve_disk_collides, dubins_shortest

TOL = 1e-6


def _conformance(n: int, tour: Sequence[int], deletes) -> list[str]:
    """Walk the tour, growing the deleted-edge set from each processed node."""
    out = []
    deleted: dict[tuple[int, int], int] = {}
    for i in range(n):
        v = tour[i]
        for e in deletes(v):
            deleted.setdefault(e, v)
        if i + 1 < n:
            edge = (v, tour[i + 1])
            if edge in deleted:
                out.append(f"edge {edge[0] + 1}->{edge[1] + 1} at position {i + 1} "
                           f"was deleted by node {deleted[edge] + 1}")
    closing = (tour[-1], tour[0])
    if closing in deleted:
        out.append(f"closing edge {closing[0] + 1}->{closing[1] + 1} was deleted by node {deleted[closing] + 1}")
    return out


def _tour_problems(tour: Sequence[int], n: int) -> list[str]:
    if len(tour) != n or sorted(tour) != list(range(1, n + 1)):
        return [f"tour is not a permutation of 1..{n}"]
    return []


def validate_tspsd(record, points: Sequence[Point], delete_sets) -> list[str]:
    n = len(points)
    problems = _tour_problems(record.tour, n)
    if problems:
        return problems
    tour = [v - 1 for v in record.tour]
    sets = [set(map(tuple, s)) for s in delete_sets] if delete_sets else [set() for _ in range(n)]
    problems += _conformance(n, tour, lambda v: sets[v])
    cost = sum(math.dist(points[tour[i]], points[tour[(i + 1) % n]]) for i in range(n))
    if abs(cost - record.cost) > TOL * max(1.0, abs(cost)):
        problems.append(f"recorded cost {record.cost!r} differs from recomputed {cost!r}")
    return problems


def validate_tspcp(record, points: Sequence[Point]) -> list[str]:
    """C1-C4 and cost for Euclidean or Dubins tours with circles."""
    n = len(points)
    problems = _tour_problems(record.tour, n)
    if problems:
        return problems
    tour = [v - 1 for v in record.tour]
    if len(record.circles) != n:
        return [f"expected {n} circles, found {len(record.circles)}"]
    r = record.radius
    if r is None or not r >= 0:
        return ["radius missing or negative"]
    disks = [Disk(Point(c[0], c[1]), c[2]) for c in record.circles]
    for v, d in enumerate(disks):
        if abs(d.radius - r) > TOL:
            problems.append(f"C1: circle of node {v + 1} has radius {d.radius!r}, expected {r!r}")
        gap = abs(math.dist(d.center, points[v]) - d.radius)
        if gap > TOL:
            problems.append(f"C2: node {v + 1} is {gap:.3g} off its circle")
    for a in range(n):
        for b in range(a + 1, n):
            if math.dist(disks[a].center, disks[b].center) < disks[a].radius + disks[b].radius - TOL:
                problems.append(f"C3: circles of nodes {a + 1} and {b + 1} overlap")

    dubins = record.variant == "dubins"
    if dubins:
        if record.headings is None or len(record.headings) != n or not record.dubins_radius:
            return problems + ["Dubins record needs one heading per node and a turning radius"]
        cfg = [Config.of(p.x, p.y, h) for p, h in zip(points, record.headings)]

    def curve(a, b):
        if dubins:
            return dubins_shortest(cfg[a], cfg[b], record.dubins_radius)
        return Segment(points[a], points[b])

    curves = {(tour[i], tour[(i + 1) % n]): curve(tour[i], tour[(i + 1) % n]) for i in range(n)}

    def deletes(v):
        if disks[v].radius <= 0:
            return []
        return [e for e, c in curves.items() if curve_disk_collides(c, disks[v], TOL)]

    problems += ["C4: " + p for p in _conformance(n, tour, deletes)]
    cost = 0.0
    for c in curves.values():
        cost += c.length if dubins else math.dist(c.a, c.b)
    if abs(cost - record.cost) > TOL * max(1.0, abs(cost)):
        problems.append(f"recorded cost {record.cost!r} differs from recomputed {cost!r}")
    return problems


def validate_record(record, instance) -> list[str]:
    """Violations of one record against its instance; empty means valid."""
    if record.variant == "tspsd":
        return validate_tspsd(record, instance.points, instance.delete_sets)
    if record.variant in ("euclidean", "dubins"):
        return validate_tspcp(record, instance.points)
    return [f"unknown variant {record.variant!r}"]
