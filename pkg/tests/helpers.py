"""Small oracles shared by the test modules."""
import itertools
import random

from cptour.sdgraph import SelfDeletingGraph, cycle_cost, first_violation
from cptour.tspsd import backward_search


def random_graph(n: int, deletions: int, rng: random.Random, side: float = 100.0) -> SelfDeletingGraph:
    pts = [(rng.random() * side, rng.random() * side) for _ in range(n)]
    edges = [(a, b) for a in range(n) for b in range(n) if a != b]
    return SelfDeletingGraph.euclidean(pts, [rng.sample(edges, min(len(edges), deletions)) for _ in range(n)])


def naive_conforming(graph: SelfDeletingGraph, order) -> bool:
    """Definition, literally: each edge must survive every node processed so far."""
    n = len(order)
    processed = set()
    for i in range(n):
        processed.add(order[i])
        edge = (order[i], order[(i + 1) % n])
        if i == n - 1:
            processed = set(range(n))
        if any(edge in graph.delete_edges(v) for v in processed):
            return False
    return True


def brute_force_optimum(graph: SelfDeletingGraph):
    """Cheapest conforming cycle by enumeration; None when there is none."""
    best = None
    n = graph.n
    for start in range(n):
        for rest in itertools.permutations([v for v in range(n) if v != start]):
            order = (start,) + rest
            if first_violation(graph, order) is None:
                c = cycle_cost(graph, order)
                if best is None or c < best[0]:
                    best = (c, order)
    return best


def conforming_start(graph: SelfDeletingGraph, rng: random.Random, tries: int = 200):
    for _ in range(tries):
        c = backward_search(graph, rng=rng, node_limit=20000)
        if c is not None:
            return list(c.order)
    return None


def tspcp_record(points, order, placement, cost, variant="euclidean", headings=None, rho=None):
    """Wrap a tour with disks as a record the validator understands."""
    from cptour.instances import SolutionRecord
    circles = [[d.center.x, d.center.y, d.radius] for d in placement.disks]
    return SolutionRecord("t", variant, 0, placement.radius, cost, [v + 1 for v in order],
                          None if headings is None else list(headings), circles, rho)
