"""GRASP for the TSP on self-deleting graphs.

Construction is a backward depth-first search; local search is a cyclic
variable neighborhood descent over three operators (2-opt, block move and
asymmetric block swap).  Every operator keeps the first and the last node of
the cycle in place and decides feasibility of a candidate incrementally from
the node sets in front of, inside and between the touched blocks, so a full
neighborhood scan costs O(n^2) membership tests.

Positions below are 0-based: ``p[0]`` is the start and ``p[n-1]`` the node
visited last before closing the cycle.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Sequence

from .errors import InputError
from .sdgraph import Cycle, SelfDeletingGraph, check_permutation, cycle_cost, require_conforming

IMPROVEMENT_EPS = 1e-9


@dataclass
class StopCondition:
    time_budget: float | None = None
    max_iterations: int | None = None

    def __post_init__(self):
        if self.time_budget is None and self.max_iterations is None:
            raise InputError("stop condition needs a time budget or an iteration cap")
        if self.time_budget is not None and not self.time_budget > 0:
            raise InputError("time budget must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InputError("iteration cap must be at least 1")


@dataclass
class GraspParams:
    stop: StopCondition = field(default_factory=lambda: StopCondition(max_iterations=50))
    rcl_size: int = 3
    move_lengths: tuple[int, ...] = (1, 2, 3)
    swap_length_pairs: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 2), (2, 3), (3, 3))
    construction_attempts: int = 20
    construction_time_limit: float | None = 20.0
    construction_node_limit: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.rcl_size < 1:
            raise InputError("rcl_size must be >= 1")
        if any(m < 1 for m in self.move_lengths):
            raise InputError("move lengths must be >= 1")
        if any(k < 1 or l < 1 for k, l in self.swap_length_pairs):
            raise InputError("swap lengths must be >= 1")
        if self.construction_attempts < 1:
            raise InputError("construction_attempts must be >= 1")


class Candidate(NamedTuple):
    """One scanned index pair: feasibility decision and cost change."""

    i: int
    j: int
    feasible: bool
    delta: float


@dataclass
class ScanStats:
    membership_checks: int = 0


def _prefix_masks(p: Sequence[int]) -> list[int]:
    out = [0] * (len(p) + 1)
    m = 0
    for t, v in enumerate(p):
        m |= 1 << v
        out[t + 1] = m
    return out


# --------------------------------------------------------------------------
# 2-opt
# --------------------------------------------------------------------------

def scan_two_opt(graph: SelfDeletingGraph, p: Sequence[int],
                 stats: ScanStats | None = None) -> Iterator[Candidate]:
    """Reversal of ``p[i..j]`` for j = n-2 .. 2 and i = j-1 .. 1."""
    n = graph.n
    w = graph.w
    dm = graph.deleter_mask
    prefix = _prefix_masks(p)
    checks = 0
    try:
        for j in range(n - 2, 1, -1):
            pj, pj1 = p[j], p[j + 1]
            wj = w[pj]
            old_tail = wj[pj1]
            x_mask = 1 << pj
            # union of deleter masks of reversed edges that the prefix deleted;
            # the pending set is non-empty iff this union still meets A
            pending = 0
            fwd = rev = 0.0
            for i in range(j - 1, 0, -1):
                pi, pi1, pim = p[i], p[i + 1], p[i - 1]
                a_mask = prefix[i]
                fwd += w[pi][pi1]
                rev += w[pi1][pi]
                delta = w[pim][pj] + w[pi][pj1] - w[pim][pi] - old_tail + rev - fwd
                d_new = dm[pi1 * n + pi]
                checks += 1
                if d_new & x_mask:
                    yield Candidate(i, j, False, delta)
                    break
                x_mask |= 1 << pi
                checks += 1
                if d_new & a_mask:
                    pending |= d_new
                    yield Candidate(i, j, False, delta)
                    continue
                checks += 1
                ok = not (pending & a_mask)
                if ok:
                    checks += 1
                    ok = not (dm[pim * n + pj] & a_mask)
                if ok:
                    checks += 1
                    ok = not (dm[pi * n + pj1] & (a_mask | x_mask))
                yield Candidate(i, j, ok, delta)
    finally:
        if stats is not None:
            stats.membership_checks += checks


def apply_two_opt(p: Sequence[int], i: int, j: int) -> list[int]:
    p = list(p)
    p[i:j + 1] = p[i:j + 1][::-1]
    return p


# --------------------------------------------------------------------------
# move
# --------------------------------------------------------------------------

def scan_move_right(graph: SelfDeletingGraph, p: Sequence[int], m: int,
                    stats: ScanStats | None = None) -> Iterator[Candidate]:
    """Block ``p[i..i+m-1]`` reinserted after ``p[j]``, j >= i+m."""
    n = graph.n
    w = graph.w
    dm = graph.deleter_mask
    prefix = _prefix_masks(p)
    checks = 0
    try:
        for i in range(1, n - m - 1):
            last = i + m - 1
            pi, pl, pim, pafter = p[i], p[last], p[i - 1], p[i + m]
            a_mask = prefix[i]
            x_mask = prefix[i + m] ^ a_mask
            checks += 1
            if dm[pim * n + pafter] & a_mask:
                continue
            ex = 0
            for t in range(i, last):
                ex |= dm[p[t] * n + p[t + 1]]
            base = w[pim][pafter] - w[pim][pi] - w[pl][pafter]
            b_mask = 0
            for j in range(i + m, n - 1):
                pj, pj1 = p[j], p[j + 1]
                b_mask |= 1 << pj
                delta = base + w[pj][pi] + w[pl][pj1] - w[pj][pj1]
                checks += 1
                if ex & b_mask:
                    yield Candidate(i, j, False, delta)
                    break
                ab = a_mask | b_mask
                checks += 1
                ok = not (dm[pj * n + pi] & ab)
                if ok:
                    checks += 1
                    ok = not (dm[pl * n + pj1] & (ab | x_mask))
                yield Candidate(i, j, ok, delta)
    finally:
        if stats is not None:
            stats.membership_checks += checks


def apply_move_right(p: Sequence[int], i: int, j: int, m: int) -> list[int]:
    p = list(p)
    return p[:i] + p[i + m:j + 1] + p[i:i + m] + p[j + 1:]


def scan_move_left(graph: SelfDeletingGraph, p: Sequence[int], m: int,
                   stats: ScanStats | None = None) -> Iterator[Candidate]:
    """Mirror of move-right: block ``p[i..i+m-1]`` reinserted after ``p[j]``, j <= i-2.

    With A = p[0..j] and B = p[j+1..i-1] the conditions become: (p[i-1], p[i+m])
    survives A+B+X, (p[j], p[i]) survives A, (p[i+m-1], p[j+1]) survives A+X, and
    X deletes no edge inside B (B is now traversed after X).
    """
    n = graph.n
    w = graph.w
    dm = graph.deleter_mask
    prefix = _prefix_masks(p)
    checks = 0
    try:
        for i in range(n - m - 1, 1, -1):
            last = i + m - 1
            pi, pl, pim, pafter = p[i], p[last], p[i - 1], p[i + m]
            x_mask = prefix[i + m] ^ prefix[i]
            checks += 1
            if dm[pim * n + pafter] & prefix[i + m]:
                continue
            base = w[pim][pafter] - w[pim][pi] - w[pl][pafter]
            eb = 0
            for j in range(i - 2, -1, -1):
                pj, pj1 = p[j], p[j + 1]
                if j + 2 <= i - 1:
                    eb |= dm[pj1 * n + p[j + 2]]
                a_mask = prefix[j + 1]
                delta = base + w[pj][pi] + w[pl][pj1] - w[pj][pj1]
                checks += 1
                if eb & x_mask:
                    yield Candidate(i, j, False, delta)
                    break
                checks += 1
                ok = not (dm[pj * n + pi] & a_mask)
                if ok:
                    checks += 1
                    ok = not (dm[pl * n + pj1] & (a_mask | x_mask))
                yield Candidate(i, j, ok, delta)
    finally:
        if stats is not None:
            stats.membership_checks += checks


def apply_move_left(p: Sequence[int], i: int, j: int, m: int) -> list[int]:
    p = list(p)
    return p[:j + 1] + p[i:i + m] + p[j + 1:i] + p[i + m:]


# --------------------------------------------------------------------------
# swap
# --------------------------------------------------------------------------

def scan_swap_asym(graph: SelfDeletingGraph, p: Sequence[int], k: int, l: int,
                   stats: ScanStats | None = None) -> Iterator[Candidate]:
    """Exchange x = p[i..i+k-1] with a later y = p[j..j+l-1]."""
    n = graph.n
    w = graph.w
    dm = graph.deleter_mask
    prefix = _prefix_masks(p)
    checks = 0
    try:
        for j in range(n - l - 1, k, -1):
            ylast = j + l - 1
            pj, pyl, pafter = p[j], p[ylast], p[j + l]
            y_mask = prefix[j + l] ^ prefix[j]
            eb = 0
            for i in range(j - k, 0, -1):
                xlast = i + k - 1
                pi, pxl, pim = p[i], p[xlast], p[i - 1]
                if i + k + 1 <= j - 1:
                    eb |= dm[p[i + k] * n + p[i + k + 1]]
                a_mask = prefix[i]
                x_mask = prefix[i + k] ^ a_mask
                b_mask = prefix[j] ^ prefix[i + k]
                if i + k == j:
                    e2 = e3 = pyl * n + pi
                    delta = (w[pim][pj] + w[pyl][pi] + w[pxl][pafter]
                             - w[pim][pi] - w[pxl][pj] - w[pyl][pafter])
                else:
                    pb0, pbl = p[i + k], p[j - 1]
                    e2 = pyl * n + pb0
                    e3 = pbl * n + pi
                    delta = (w[pim][pj] + w[pyl][pb0] + w[pbl][pi] + w[pxl][pafter]
                             - w[pim][pi] - w[pxl][pb0] - w[pbl][pj] - w[pyl][pafter])
                checks += 1
                if eb & y_mask:
                    yield Candidate(i, j, False, delta)
                    break
                ex = 0
                for t in range(i, xlast):
                    ex |= dm[p[t] * n + p[t + 1]]
                ay = a_mask | y_mask
                ayb = ay | b_mask
                ok = True
                for d_mask, blockers in ((dm[pim * n + pj], a_mask), (dm[e2], ay), (dm[e3], ayb),
                                         (dm[pxl * n + pafter], ayb | x_mask), (ex, b_mask | y_mask)):
                    checks += 1
                    if d_mask & blockers:
                        ok = False
                        break
                yield Candidate(i, j, ok, delta)
    finally:
        if stats is not None:
            stats.membership_checks += checks


def apply_swap(p: Sequence[int], i: int, j: int, k: int, l: int) -> list[int]:
    p = list(p)
    return p[:i] + p[j:j + l] + p[i + k:j] + p[i:i + k] + p[j + l:]


# --------------------------------------------------------------------------
# first-improvement passes
# --------------------------------------------------------------------------

def _first_improving(scan: Iterator[Candidate]) -> Candidate | None:
    try:
        for cand in scan:
            if cand.feasible and cand.delta < -IMPROVEMENT_EPS:
                return cand
        return None
    finally:
        scan.close()


def _moved(cycle: Cycle, order: list[int], delta: float) -> Cycle:
    return Cycle(tuple(order), cycle.cost + delta)


def two_opt_pass(graph: SelfDeletingGraph, cycle: Cycle) -> Cycle:
    require_conforming(graph, cycle)
    cand = _first_improving(scan_two_opt(graph, cycle.order))
    if cand is None:
        return cycle
    return _moved(cycle, apply_two_opt(cycle.order, cand.i, cand.j), cand.delta)


def move_pass(graph: SelfDeletingGraph, cycle: Cycle, m: int, direction: str = "right") -> Cycle:
    require_conforming(graph, cycle)
    if m < 1:
        raise InputError("move length must be >= 1")
    if direction == "right":
        cand = _first_improving(scan_move_right(graph, cycle.order, m))
        if cand is None:
            return cycle
        return _moved(cycle, apply_move_right(cycle.order, cand.i, cand.j, m), cand.delta)
    if direction == "left":
        cand = _first_improving(scan_move_left(graph, cycle.order, m))
        if cand is None:
            return cycle
        return _moved(cycle, apply_move_left(cycle.order, cand.i, cand.j, m), cand.delta)
    raise InputError(f"unknown move direction {direction!r}")


def swap_asym_pass(graph: SelfDeletingGraph, cycle: Cycle, k: int, l: int) -> Cycle:
    require_conforming(graph, cycle)
    cand = _first_improving(scan_swap_asym(graph, cycle.order, k, l))
    if cand is None:
        return cycle
    return _moved(cycle, apply_swap(cycle.order, cand.i, cand.j, k, l), cand.delta)


def swap_pass(graph: SelfDeletingGraph, cycle: Cycle, k: int, l: int) -> Cycle:
    """swap-asym(k, l), then swap-asym(l, k) if the first found nothing and k != l."""
    if k < 1 or l < 1:
        raise InputError("swap lengths must be >= 1")
    out = swap_asym_pass(graph, cycle, k, l)
    if out is cycle and k != l:
        out = swap_asym_pass(graph, cycle, l, k)
    return out


# --------------------------------------------------------------------------
# CVND
# --------------------------------------------------------------------------

class Neighborhood(NamedTuple):
    name: str
    apply: Callable[[SelfDeletingGraph, Cycle], Cycle]


def neighborhood_schedule(move_lengths: Sequence[int] = (1, 2, 3),
                          swap_length_pairs: Sequence[tuple[int, int]] = ((1, 1), (1, 2), (2, 2), (2, 3), (3, 3)),
                          ) -> list[Neighborhood]:
    """2-opt, then move (right, then left) by ascending m, then swaps by ascending (k, l)."""

    def move_both(m):
        def op(graph, cycle):
            out = move_pass(graph, cycle, m, "right")
            if out is cycle:
                out = move_pass(graph, cycle, m, "left")
            return out
        return op

    def swap(k, l):
        return lambda graph, cycle: swap_pass(graph, cycle, k, l)

    sched = [Neighborhood("2-opt", two_opt_pass)]
    sched += [Neighborhood(f"move-{m}", move_both(m)) for m in sorted(set(move_lengths))]
    sched += [Neighborhood(f"swap-{k}-{l}", swap(k, l)) for k, l in sorted(set(swap_length_pairs))]
    return sched


@dataclass
class CvndStats:
    passes: int = 0
    cost_trace: list[float] = field(default_factory=list)


def cvnd(graph: SelfDeletingGraph, cycle: Cycle, schedule: Sequence[Neighborhood] | None = None,
         deadline: float | None = None, stats: CvndStats | None = None) -> Cycle:
    """Cycle through the neighborhoods, restarting from the first after each improvement."""
    if schedule is None:
        schedule = neighborhood_schedule()
    require_conforming(graph, cycle)
    if stats is not None:
        stats.cost_trace.append(cycle.cost)
    k = 0
    while k < len(schedule):
        if deadline is not None and time.monotonic() >= deadline:
            break
        out = schedule[k].apply(graph, cycle)
        if stats is not None:
            stats.passes += 1
        if out is not cycle and out.cost < cycle.cost - IMPROVEMENT_EPS:
            cycle = out
            if stats is not None:
                stats.cost_trace.append(cycle.cost)
            k = 0
        else:
            k += 1
    return cycle


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

def _rcl_order(cands: list[int], head: int, w, rcl_size: int, rng: random.Random) -> list[int]:
    """Semi-greedy ordering: repeatedly draw uniformly from the rcl_size cheapest left."""
    pool = sorted(cands, key=lambda u: (w[u][head], u))
    out = []
    while pool:
        k = rng.randrange(min(rcl_size, len(pool)))
        out.append(pool.pop(k))
    return out


def _backward(graph: SelfDeletingGraph, start: int, pred: dict[int, int] | None,
              rng: random.Random, rcl_size: int, deadline: float | None,
              node_limit: int | None = None):
    """Depth-first backward construction from a fixed start.

    Returns (order or None, exhausted).  ``exhausted`` is True when the search
    space was fully explored, i.e. no conforming cycle starts at ``start``.
    ``node_limit`` caps expanded states, a clock-free alternative to ``deadline``.
    """
    n = graph.n
    dm = graph.deleter_mask
    w = graph.w
    full = (1 << n) - 1
    start_bit = 1 << start
    if n == 2:
        u = 1 - start
        ok = not dm[u * n + start] and not (dm[start * n + u] & start_bit)
        return ([start, u] if ok else None), True

    def candidates(remaining: int, head: int) -> list[int]:
        admissible = []
        r = remaining & ~start_bit
        while r:
            low = r & -r
            u = low.bit_length() - 1
            r ^= low
            if not dm[u * n + head] & remaining:
                admissible.append(u)
        if not admissible:
            return admissible
        first = None
        if pred is not None:
            g = pred[head]
            if g in admissible:
                admissible.remove(g)
                first = g
        ordered = _rcl_order(admissible, head, w, rcl_size, rng)
        if first is not None:
            ordered.insert(0, first)
        return ordered

    failed: set[tuple[int, int]] = set()
    # each frame: (remaining incl. its own head's predecessors, head, candidate list, cursor)
    suffix: list[int] = []
    stack = [[full, start, candidates(full, start), 0]]
    expansions = 0
    while stack:
        expansions += 1
        if node_limit is not None and expansions > node_limit:
            return None, False
        if deadline is not None and expansions & 63 == 0 and time.monotonic() >= deadline:
            return None, False
        frame = stack[-1]
        remaining, head, cands, k = frame
        if k >= len(cands):
            failed.add((remaining, head))
            stack.pop()
            if suffix:
                suffix.pop()
            continue
        frame[3] = k + 1
        u = cands[k]
        rem2 = remaining & ~(1 << u)
        if rem2 == start_bit:
            if not dm[start * n + u] & start_bit:
                suffix.append(u)
                return [start] + suffix[::-1], False
            continue
        if (rem2, u) in failed:
            continue
        nxt = candidates(rem2, u)
        if not nxt:
            failed.add((rem2, u))
            continue
        suffix.append(u)
        stack.append([rem2, u, nxt, 0])
    return None, True


def backward_search(graph: SelfDeletingGraph, guide: Sequence[int] | None = None,
                    rng: random.Random | None = None, rcl_size: int = 3,
                    deadline: float | None = None, start: int | None = None,
                    node_limit: int | None = None) -> Cycle | None:
    """Build an f-conforming cycle from its end toward its start.

    With the suffix ``p[i+1..n-1]`` fixed, the processed prefix is exactly the
    complement of that suffix, so ``p[i]`` is admissible iff no node outside
    the suffix deletes ``(p[i], p[i+1])``.  With a guide the cycle starts at
    the guide's first node and every step tries the guide predecessor first.
    """
    if rng is None:
        rng = random.Random(0)
    pred = None
    if guide is not None:
        guide = list(guide)
        check_permutation(guide, graph.n)
        start = guide[0]
        pred = {guide[k]: guide[k - 1] for k in range(len(guide))}
    elif start is None:
        start = rng.randrange(graph.n)
    order, _ = _backward(graph, start, pred, rng, rcl_size, deadline, node_limit)
    if order is None:
        return None
    return Cycle(tuple(order), cycle_cost(graph, order))


# --------------------------------------------------------------------------
# GRASP
# --------------------------------------------------------------------------

@dataclass
class GraspStats:
    iterations: int = 0
    constructions: int = 0
    failed_constructions: int = 0
    best_trace: list[float] = field(default_factory=list)


def grasp(graph: SelfDeletingGraph, guide: Sequence[int] | Cycle | None = None,
          params: GraspParams | None = None, stats: GraspStats | None = None) -> Cycle | None:
    """Construction + CVND until the stop condition; best conforming cycle or None."""
    if params is None:
        params = GraspParams()
    if isinstance(guide, Cycle):
        guide = guide.order
    rng = random.Random(params.rng_seed)
    schedule = neighborhood_schedule(params.move_lengths, params.swap_length_pairs)
    stop = params.stop
    t0 = time.monotonic()
    deadline = None if stop.time_budget is None else t0 + stop.time_budget
    pred = None
    if guide is not None:
        guide = list(guide)
        check_permutation(guide, graph.n)
        pred = {guide[k]: guide[k - 1] for k in range(len(guide))}
    exhausted_starts: set[int] = set()
    best: Cycle | None = None
    failures = 0
    iterations = 0
    while True:
        if stop.max_iterations is not None and iterations >= stop.max_iterations:
            break
        now = time.monotonic()
        if deadline is not None and now >= deadline:
            break
        iterations += 1
        cdeadline = deadline
        if params.construction_time_limit is not None:
            limit = now + params.construction_time_limit
            cdeadline = limit if cdeadline is None else min(cdeadline, limit)
        if guide is not None:
            start = guide[0]
        else:
            open_starts = [v for v in range(graph.n) if v not in exhausted_starts]
            start = open_starts[rng.randrange(len(open_starts))]
        order, exhausted = _backward(graph, start, pred, rng, params.rcl_size, cdeadline,
                                     params.construction_node_limit)
        if stats is not None:
            stats.constructions += 1
        if order is None:
            if stats is not None:
                stats.failed_constructions += 1
            if exhausted:
                exhausted_starts.add(start)
                if guide is not None or len(exhausted_starts) == graph.n:
                    break
            if best is None:
                failures += 1
                if failures >= params.construction_attempts:
                    break
            continue
        cycle = cvnd(graph, Cycle(tuple(order), cycle_cost(graph, order)), schedule, deadline)
        if best is None or cycle.cost < best.cost - IMPROVEMENT_EPS:
            best = cycle
        if stats is not None:
            stats.best_trace.append(best.cost)
    if stats is not None:
        stats.iterations = iterations
    return best
