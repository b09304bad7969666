"""Self-deleting graphs: a complete directed weighted graph plus a delete function.

Processing node ``v`` deletes the directed edges ``f(v)``.  Edges are encoded
as integers ``u * n + v``.  Each edge keeps a bitmask (a Python int) of the
nodes that delete it, so "is ``e`` still present after processing the node
set ``X``" is a single AND against the bitmask of ``X``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ContractViolation, InputError
from .geometry import Point


class SelfDeletingGraph:
    """Immutable after construction; share freely between solver runs."""

    def __init__(self, weights: Sequence[Sequence[float]],
                 delete_sets: Sequence[Iterable[tuple[int, int]]] | None = None,
                 coords: Sequence[Point] | None = None):
        n = len(weights)
        if n < 2:
            raise InputError("a self-deleting graph needs at least two nodes")
        w = []
        for row in weights:
            if len(row) != n:
                raise InputError("weight matrix must be square")
            vals = [float(x) for x in row]
            for x in vals:
                if not math.isfinite(x) or x < 0:
                    raise InputError(f"weights must be finite and non-negative, got {x}")
            w.append(vals)
        self.n = n
        self.w = w
        self.coords = None if coords is None else [Point(float(x), float(y)) for x, y in coords]
        if delete_sets is None:
            delete_sets = [()] * n
        if len(delete_sets) != n:
            raise InputError("one delete set per node required")
        dmask = [0] * (n * n)
        sets = []
        for v, edges in enumerate(delete_sets):
            ids = set()
            bit = 1 << v
            for a, b in edges:
                e = self.edge_id(a, b)
                ids.add(e)
                dmask[e] |= bit
            sets.append(frozenset(ids))
        self.delete_sets: tuple[frozenset[int], ...] = tuple(sets)
        # transposed index: dmask[e] has bit v set iff e in f(v)
        self.deleter_mask: list[int] = dmask

    @classmethod
    def euclidean(cls, points: Sequence[Sequence[float]],
                  delete_sets: Sequence[Iterable[tuple[int, int]]] | None = None):
        pts = [Point(float(x), float(y)) for x, y in points]
        w = [[math.hypot(p.x - q.x, p.y - q.y) for q in pts] for p in pts]
        return cls(w, delete_sets, coords=pts)

    def edge_id(self, a: int, b: int) -> int:
        n = self.n
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise InputError(f"({a}, {b}) is not an edge of a {n}-node graph")
        return a * n + b

    def edge(self, e: int) -> tuple[int, int]:
        return divmod(e, self.n)

    def deleters(self, a: int, b: int) -> frozenset[int]:
        m = self.deleter_mask[self.edge_id(a, b)]
        return frozenset(v for v in range(self.n) if m >> v & 1)

    def delete_edges(self, v: int) -> list[tuple[int, int]]:
        return sorted(self.edge(e) for e in self.delete_sets[v])

    @property
    def mean_deletions(self) -> float:
        return sum(len(s) for s in self.delete_sets) / self.n

    def weight(self, a: int, b: int) -> float:
        return self.w[a][b]


def node_mask(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


class NodeSetAccumulator:
    """Growing/shrinking node set with O(1) residual-graph queries.

    ``checks`` counts primitive edge-membership tests, which is what the
    scaling measurements report.
    """

    __slots__ = ("graph", "mask", "checks")

    def __init__(self, graph: SelfDeletingGraph, nodes: Iterable[int] = ()):
        self.graph = graph
        self.mask = node_mask(nodes)
        self.checks = 0

    def add(self, v: int) -> None:
        self.mask |= 1 << v

    def remove(self, v: int) -> None:
        self.mask &= ~(1 << v)

    def __contains__(self, v: int) -> bool:
        return bool(self.mask >> v & 1)

    def keeps(self, a: int, b: int) -> bool:
        """True iff edge (a, b) survives in the residual graph of this set."""
        self.checks += 1
        return not (self.graph.deleter_mask[a * self.graph.n + b] & self.mask)


def residual_contains(graph: SelfDeletingGraph, nodes: Iterable[int], edge: tuple[int, int]) -> bool:
    e = graph.edge_id(*edge)
    mask = 0
    for v in nodes:
        if not 0 <= v < graph.n:
            raise InputError(f"unknown node {v}")
        mask |= 1 << v
    return not (graph.deleter_mask[e] & mask)


def check_permutation(order: Sequence[int], n: int) -> None:
    if len(order) != n or sorted(order) != list(range(n)):
        raise InputError("cycle order must be a permutation of the graph's nodes")


def first_violation(graph: SelfDeletingGraph, order: Sequence[int]) -> tuple[int, int, int] | None:
    """First (position, tail, head) whose edge is deleted by the processed prefix."""
    n = graph.n
    dm = graph.deleter_mask
    processed = 0
    for i in range(n - 1):
        a, b = order[i], order[i + 1]
        processed |= 1 << a
        if dm[a * n + b] & processed:
            return i, a, b
    a, b = order[-1], order[0]
    if dm[a * n + b]:
        return n - 1, a, b
    return None


def is_f_conforming(graph: SelfDeletingGraph, order: Sequence[int]) -> bool:
    check_permutation(order, graph.n)
    return first_violation(graph, order) is None


def cycle_cost(graph: SelfDeletingGraph, order: Sequence[int]) -> float:
    w = graph.w
    total = 0.0
    for i in range(len(order) - 1):
        total += w[order[i]][order[i + 1]]
    return total + w[order[-1]][order[0]]


@dataclass(frozen=True)
class Cycle:
    order: tuple[int, ...]
    cost: float

    @classmethod
    def of(cls, graph: SelfDeletingGraph, order: Sequence[int]) -> "Cycle":
        check_permutation(order, graph.n)
        return cls(tuple(order), cycle_cost(graph, order))

    def __len__(self):
        return len(self.order)


def require_conforming(graph: SelfDeletingGraph, cycle: Cycle) -> None:
    bad = first_violation(graph, cycle.order)
    if bad is not None:
        _, a, b = bad
        raise ContractViolation(f"cycle is not f-conforming at edge ({a}, {b})")
