import itertools
import math

import numpy as np
import pytest

from cptour.errors import InputError
from cptour.geometry import Disk, Point
from cptour.instances import InstanceSpec, generate
from cptour.placement import Placement, radius_upper_bound
from cptour.sdgraph import cycle_cost, is_f_conforming
from cptour.tspcp import (HeadingGrid, Roadmap, TspCpParams, _DubinsTable, assign_headings, generate_tspsd,
                          rotate_start, solve_dtsp_initial, solve_dtspcp, solve_tsp_initial, solve_tspcp,
                          tspcp_fixed_radius)
from cptour.validate import validate_tspcp

from helpers import tspcp_record

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def exhaustive_tour(points):
    n = len(points)
    best = math.inf
    for rest in itertools.permutations(range(1, n)):
        order = (0,) + rest
        best = min(best, sum(math.dist(points[order[i]], points[order[(i + 1) % n]]) for i in range(n)))
    return best


class TestInitialTour:
    def test_square(self):
        c = solve_tsp_initial(SQUARE)
        assert c.cost == pytest.approx(4.0)
        assert sorted(c.order) == [0, 1, 2, 3]

    def test_hex_cluster(self):
        pts = generate(InstanceSpec("hex", 7, spacing=1.0))
        assert solve_tsp_initial(pts).cost == pytest.approx(exhaustive_tour(pts), abs=1e-9)

    def test_small_random_near_optimal(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            pts = rng.uniform(0, 100, (8, 2)).tolist()
            assert solve_tsp_initial(pts).cost <= 1.05 * exhaustive_tour(pts)

    def test_too_few_points(self):
        with pytest.raises(InputError):
            solve_tsp_initial([(0, 0), (1, 0)])


class TestGenerateTspsd:
    line = [(0, 0), (10, 0), (20, 0)]

    def placement(self, b_center):
        centers = [(-1, 0), b_center, (21, 0)]
        return Placement(tuple(Disk(Point(*c), 1.0) for c in centers), 1.0)

    def test_far_disks(self):
        pts = [(0, 0), (10, 0), (0, 10)]
        centers = [(-0.01, 0), (10.01, 0), (0, 10.01)]
        tiny = Placement(tuple(Disk(Point(*c), 0.01) for c in centers), 0.01)
        g = generate_tspsd(Roadmap.euclidean(pts), tiny)
        assert all(not s for s in g.delete_sets)

    def test_tangent_is_not_a_collision(self):
        g = generate_tspsd(Roadmap.euclidean(self.line), self.placement((10, 1)))
        assert (0, 2) not in g.delete_edges(1)

    def test_crossing_deletes_both_directions(self):
        g = generate_tspsd(Roadmap.euclidean(self.line), self.placement((10, 0.5)))
        assert {(0, 2), (2, 0)} <= set(g.delete_edges(1))

    def test_weights_are_distances(self):
        g = generate_tspsd(Roadmap.euclidean(self.line), self.placement((10, 1)))
        assert g.w[0][2] == 20.0


class TestFixedRadius:
    pts = generate(InstanceSpec("mesh", 20, spacing=10.0, seed=4))

    def test_tiny_radius_keeps_tour(self):
        c = solve_tsp_initial(self.pts)
        cycle, pl = tspcp_fixed_radius(Roadmap.euclidean(self.pts), 0.05, c)
        assert cycle is c and pl.penalty == 0

    def test_above_bound(self):
        c = solve_tsp_initial(self.pts)
        assert tspcp_fixed_radius(self.pts, 1.01 * radius_upper_bound(self.pts), c) is None

    def test_rerouted_tour_is_valid(self):
        roadmap = Roadmap.euclidean(self.pts)
        c = solve_tsp_initial(self.pts)
        for r in (3.0, 4.0, 5.0):
            res = tspcp_fixed_radius(roadmap, r, c)
            if res is None:
                continue
            cycle, pl = res
            g = generate_tspsd(roadmap, pl)
            assert is_f_conforming(g, cycle.order)
            rec = tspcp_record(self.pts, cycle.order, pl, roadmap.tour_cost(cycle.order))
            assert validate_tspcp(rec, roadmap.points) == []

    def test_radius_positive(self):
        with pytest.raises(InputError):
            tspcp_fixed_radius(self.pts, 0, solve_tsp_initial(self.pts))


class TestSolveTspcp:
    @pytest.mark.parametrize("family", ["square", "hex_noisy", "mesh"])
    def test_contract(self, family):
        pts = generate(InstanceSpec(family, 16, spacing=10.0, seed=1))
        sol = solve_tspcp(pts)
        assert sol.radius >= sol.wpccp_radius
        lbs, ubs = zip(*sol.trace)
        assert ubs[-1] - lbs[-1] <= 0.1
        assert list(lbs) == sorted(lbs) and list(ubs) == sorted(ubs, reverse=True)
        rec = tspcp_record(pts, sol.cycle.order, sol.placement, sol.cost)
        assert validate_tspcp(rec, [Point(*p) for p in pts]) == []

    def test_deterministic(self):
        pts = generate(InstanceSpec("mesh", 12, spacing=10.0, seed=2))
        a, b = solve_tspcp(pts), solve_tspcp(pts)
        assert (a.radius, a.cycle, a.placement) == (b.radius, b.cycle, b.placement)

    def test_needs_three_nodes(self):
        with pytest.raises(InputError):
            solve_tspcp([(0, 0), (1, 1)])
        with pytest.raises(InputError):
            TspCpParams(eps=0)

    def test_rotation_keeps_cycle(self):
        pts = generate(InstanceSpec("mesh", 12, spacing=10.0, seed=2))
        order = list(solve_tsp_initial(pts).order)
        rot = rotate_start(Roadmap.euclidean(pts), order)
        k = rot.index(order[0])
        assert rot[k:] + rot[:k] == order


class TestHeadings:
    def test_dp_matches_brute_force(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 10, (5, 2)).tolist()
        table = _DubinsTable(pts, 1.0, HeadingGrid(8))
        order = [0, 1, 2, 3, 4]
        cost, seq = assign_headings(order, table)
        brute = min(sum(table(order[i], order[(i + 1) % 5])[hs[i], hs[(i + 1) % 5]] for i in range(5))
                    for hs in itertools.product(range(8), repeat=5))
        assert cost == pytest.approx(brute, abs=1e-9)
        assert cost == pytest.approx(sum(table(order[i], order[(i + 1) % 5])[seq[i], seq[(i + 1) % 5]]
                                         for i in range(5)), abs=1e-9)

    def test_two_far_nodes(self):
        d, rho = 100.0, 0.1
        table = _DubinsTable([(0, 0), (d, 0)], rho, HeadingGrid(8))
        cost, seq = assign_headings([0, 1], table)
        brute = min(table(0, 1)[i, j] + table(1, 0)[j, i] for i in range(8) for j in range(8))
        assert cost == pytest.approx(brute)
        assert 2 * d <= cost <= 2 * d + 4 * math.pi * rho

    def test_equal_headings_small_rho(self):
        pts = generate(InstanceSpec("mesh", 10, spacing=10.0, seed=6))
        order = solve_tsp_initial(pts).order
        euclid = Roadmap.euclidean(pts).tour_cost(order)
        dubins = Roadmap.dubins(pts, [0.0] * 10, 1e-3).tour_cost(order)
        assert euclid <= dubins <= 1.01 * euclid

    def test_dtsp_initial(self):
        pts = generate(InstanceSpec("mesh", 10, spacing=10.0, seed=7))
        tour = solve_dtsp_initial(pts, 1.0)
        assert sorted(tour.order) == list(range(10)) and len(tour.headings) == 10
        roadmap = Roadmap.dubins(pts, tour.headings, 1.0)
        assert roadmap.tour_cost(tour.order) == pytest.approx(tour.cost)
        assert tour.cost >= Roadmap.euclidean(pts).tour_cost(tour.order)

    def test_grid(self):
        assert HeadingGrid(4).headings == [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
        with pytest.raises(InputError):
            HeadingGrid(1)


class TestSolveDtspcp:
    def test_valid_solution(self):
        pts = generate(InstanceSpec("mesh", 10, spacing=10.0, seed=8))
        sol = solve_dtspcp(pts, 1.0)
        assert sol.variant == "dubins" and sol.radius >= sol.wpccp_radius
        rec = tspcp_record(pts, sol.cycle.order, sol.placement, sol.cost, "dubins", sol.headings, 1.0)
        assert validate_tspcp(rec, [Point(*p) for p in pts]) == []

    def test_cost_matches_roadmap(self):
        pts = generate(InstanceSpec("mesh", 10, spacing=10.0, seed=9))
        sol = solve_dtspcp(pts, 0.5)
        roadmap = Roadmap.dubins(pts, sol.headings, 0.5)
        assert sol.cost == pytest.approx(roadmap.tour_cost(sol.cycle.order))
        g = generate_tspsd(roadmap, sol.placement)
        assert is_f_conforming(g, sol.cycle.order)
        assert sol.cost == pytest.approx(cycle_cost(g, sol.cycle.order))

    def test_rho_positive(self):
        with pytest.raises(InputError):
            solve_dtspcp(SQUARE, 0)
