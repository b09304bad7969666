import math

import numpy as np
import pytest

from cptour.errors import InputError
from cptour.geometry import Disk, Point, curve_disk_collides
from cptour.instances import InstanceSpec, generate
from cptour.placement import (CycleGeometry, Placement, PlacementParams, place_circles_hard, place_circles_soft,
                              radius_upper_bound, remainder_penalties, wpccp_bisection)
from cptour.tspcp import solve_tsp_initial
from cptour.validate import validate_tspcp

from helpers import tspcp_record

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def grid_geometry(side=4, spacing=10.0):
    pts = [(spacing * i, spacing * j) for j in range(side) for i in range(side)]
    order = solve_tsp_initial(pts).order
    return CycleGeometry.euclidean(pts, order)


def cost_of(geom):
    n = geom.n
    return sum(math.dist(geom.points[geom.order[i]], geom.points[geom.order[(i + 1) % n]]) for i in range(n))


def recount(geom, placement):
    """Remainder crossings counted with the scalar predicate, one pair at a time."""
    total = 0
    for i, v in enumerate(geom.order):
        for curve in geom.curves[i:]:
            total += curve_disk_collides(curve, placement.disks[v])
    return total


class TestSoft:
    def test_far_clusters_tiny_radius(self):
        pts = [(0, 0), (1, 0), (0, 1), (1000, 1000), (1001, 1000), (1000, 1001)]
        geom = CycleGeometry.euclidean(pts, [0, 1, 2, 3, 4, 5])
        pl = place_circles_soft(geom, 0.01)
        assert pl.penalty == 0
        assert validate_tspcp(tspcp_record(pts, geom.order, pl, cost_of(geom)), geom.points) == []

    def test_huge_radius_on_square(self):
        geom = CycleGeometry.euclidean(SQUARE, [0, 1, 2, 3])
        assert place_circles_soft(geom, 10) is None
        assert place_circles_hard(geom, 10) is None

    def test_penalty_matches_recount(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(0, 100, (20, 2))
        geom = CycleGeometry.euclidean(pts, solve_tsp_initial(pts).order)
        for r in (2.0, 4.0, 6.0):
            pl = place_circles_soft(geom, r)
            if pl is not None:
                assert pl.penalty == recount(geom, pl)

    def test_nonpositive_radius(self):
        geom = CycleGeometry.euclidean(SQUARE, [0, 1, 2, 3])
        with pytest.raises(InputError):
            place_circles_soft(geom, 0)

    def test_weak_scope(self):
        # node 3's disk crosses the already traversed edge 1->2 but clears its own remainder
        pts = [(0, 0), (10, 0), (10, 10), (9, 5)]
        geom = CycleGeometry.euclidean(pts, [0, 1, 2, 3])
        u = np.array([9.0, 5.0]) / math.hypot(9, 5)
        centers = np.array([[-1, 0], [10.6, -0.8], [10.6, 10.8], [9 + u[0], 5 + u[1]]], dtype=float)
        pl = Placement(tuple(Disk(Point(*c), 1.0) for c in centers), 1.0)
        assert curve_disk_collides(geom.curves[1], pl.disks[3])
        assert remainder_penalties(geom, centers[:, None, :], 1.0).sum() == 0
        assert validate_tspcp(tspcp_record(pts, geom.order, pl, cost_of(geom)), geom.points) == []
        # visited second, node 3 still has that edge ahead of it
        late = CycleGeometry.euclidean(pts, [0, 3, 2, 1])
        assert remainder_penalties(late, centers[:, None, :], 1.0)[3, 0] > 0


class TestHard:
    def test_tiny_radius_passes_validator(self):
        for family in ("square", "hex", "mesh"):
            pts = generate(InstanceSpec(family, 16, spacing=10.0, seed=3))
            geom = CycleGeometry.euclidean(pts, solve_tsp_initial(pts).order)
            pl = place_circles_hard(geom, 0.5)
            assert pl is not None and pl.penalty == 0
            assert validate_tspcp(tspcp_record(pts, geom.order, pl, cost_of(geom)), geom.points) == []

    def test_above_packing_bound(self):
        geom = grid_geometry()
        assert place_circles_hard(geom, 1.01 * radius_upper_bound(geom.points)) is None

    def test_deterministic(self):
        geom = grid_geometry()
        assert place_circles_hard(geom, 3.0) == place_circles_hard(geom, 3.0)

    def test_params_validated(self):
        with pytest.raises(InputError):
            PlacementParams(n_candidates=0)


class TestUpperBound:
    def test_two_points(self):
        assert radius_upper_bound([(0, 0), (10, 0)]) == math.inf

    def test_one_point(self):
        with pytest.raises(InputError):
            radius_upper_bound([(0, 0)])

    def test_is_an_upper_bound(self):
        # four unit-square corners: a 2x2 arrangement of touching disks is feasible at r = 1/2
        ub = radius_upper_bound(SQUARE)
        assert 0.5 <= ub < 10

    def test_area_bound_for_many_points(self):
        pts = [(i, j) for i in range(10) for j in range(10)]
        n, w = 100, 9.0
        ub = radius_upper_bound(pts)
        assert n * math.pi * ub ** 2 == pytest.approx((w + 4 * ub) ** 2, rel=1e-9)


class TestWpccp:
    def test_termination_contract(self):
        geom = grid_geometry()
        res = wpccp_bisection(geom, 0.1)
        assert res.radius <= res.ub and res.ub - res.radius <= 0.1
        assert res.ub0 == radius_upper_bound(geom.points)
        lbs, ubs = zip(*res.trace)
        assert list(lbs) == sorted(lbs) and list(ubs) == sorted(ubs, reverse=True)
        assert res.oracle_calls == len(res.trace) - 1 <= math.ceil(math.log2(res.ub0 / 0.1))
        rec = tspcp_record(geom.points, geom.order, res.placement, cost_of(geom))
        assert validate_tspcp(rec, geom.points) == []

    def test_halving_eps_never_hurts(self):
        geom = grid_geometry()
        coarse = wpccp_bisection(geom, 0.2)
        fine = wpccp_bisection(geom, 0.1)
        assert fine.radius >= coarse.radius

    def test_degenerate_when_nothing_fits(self):
        pts = [(0, 0), (1e-3, 0), (0, 1e-3), (5, 5)]
        geom = CycleGeometry.euclidean(pts, [0, 1, 3, 2])
        res = wpccp_bisection(geom, 0.1, ub0=0.15)
        assert res.radius == 0 and res.placement == Placement.degenerate(geom.points)

    def test_eps_positive(self):
        with pytest.raises(InputError):
            wpccp_bisection(grid_geometry(), 0)
