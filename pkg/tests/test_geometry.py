import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cptour.geometry import (Arc, Config, CurveBank, Disk, Point, Segment, curve_disk_collides, disks_disjoint,
                             dubins_candidates, dubins_disk_collides, dubins_shortest, point_arc_distance,
                             segment_disk_collides)


def polyline_length(pts):
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


def lsl_length(q0, q1, rho):
    """Closed-form LSL: tangent between two left circles."""
    (x0, y0, t0), (x1, y1, t1) = q0, q1
    c0 = (x0 - rho * math.sin(t0), y0 + rho * math.cos(t0))
    c1 = (x1 - rho * math.sin(t1), y1 + rho * math.cos(t1))
    straight = math.dist(c0, c1)
    phi = math.atan2(c1[1] - c0[1], c1[0] - c0[0])
    a = (phi - t0) % (2 * math.pi)
    b = (t1 - phi) % (2 * math.pi)
    return rho * (a + b) + straight


class TestPredicates:
    @pytest.mark.parametrize("seg, disk, expected", [
        (Segment(Point(2, 0), Point(3, 0)), Disk(Point(0, 0), 1), False),
        (Segment(Point(-2, 0), Point(2, 0)), Disk(Point(0, 0), 1), True),
        (Segment(Point(0, 0), Point(1, 0)), Disk(Point(0, 1), 1), False),
    ])
    def test_segment_disk(self, seg, disk, expected):
        assert segment_disk_collides(seg, disk, 1e-9) is expected

    @pytest.mark.parametrize("c2, expected", [((3, 0), True), ((1, 0), False), ((2, 0), True)])
    def test_disks_disjoint(self, c2, expected):
        assert disks_disjoint(Disk(Point(0, 0), 1), Disk(Point(*c2), 1), 1e-9) is expected

    def test_arc_distance_endpoints_and_interior(self):
        arc = Arc(Point(0, 0), 1.0, 0.0, math.pi / 2)
        assert point_arc_distance((0, 0), arc) == pytest.approx(1.0)
        assert point_arc_distance((2, 2), arc) == pytest.approx(2 * math.sqrt(2) - 1)
        # closest point is the endpoint (1, 0) for a query below the arc
        assert point_arc_distance((1, -1), arc) == pytest.approx(1.0)


class TestDubins:
    def test_straight(self):
        path = dubins_shortest(Config.of(0, 0, 0), Config.of(5, 0, 0), 1)
        assert path.length == 5
        assert path.word in ("LSL", "RSR", "LSR", "RSL")
        assert all(isinstance(p, Segment) for p in path.primitives())

    def test_u_turn_is_lsl(self):
        q0, q1 = (0, 0, 0), (0, 4, math.pi)
        path = dubins_shortest(Config.of(*q0), Config.of(*q1), 1)
        assert path.word == "LSL"
        assert path.length == pytest.approx(2 + math.pi, abs=1e-6)
        assert lsl_length(q0, q1, 1) == pytest.approx(2 + math.pi, abs=1e-12)
        assert polyline_length(path.sample(1e-3)) == pytest.approx(2 + math.pi, abs=1e-5)

    def test_lsl_candidate_matches_closed_form(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            q0 = (*rng.uniform(-10, 10, 2), rng.uniform(0, 2 * math.pi))
            q1 = (*rng.uniform(-10, 10, 2), rng.uniform(0, 2 * math.pi))
            cands = dubins_candidates(Config.of(*q0), Config.of(*q1), 1.3)
            assert cands["LSL"].length == pytest.approx(lsl_length(q0, q1, 1.3), abs=1e-9)

    def test_sampled_path_hits_the_goal(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            q1 = (*rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
            path = dubins_shortest(Config.of(0, 0, 0.3), Config.of(*q1), 1.0)
            pts = path.sample(1e-2)
            assert np.allclose(pts[-1], q1[:2], atol=1e-9)
            assert polyline_length(pts) == pytest.approx(path.length, rel=1e-4, abs=1e-6)

    @settings(max_examples=300, deadline=None)
    @given(st.tuples(*[st.floats(-50, 50)] * 2, st.floats(0, 2 * math.pi)),
           st.tuples(*[st.floats(-50, 50)] * 2, st.floats(0, 2 * math.pi)),
           st.floats(0.01, 5))
    def test_euclidean_lower_bound(self, q0, q1, rho):
        path = dubins_shortest(Config.of(*q0), Config.of(*q1), rho)
        assert path.length >= math.dist(q0[:2], q1[:2]) - 1e-9

    def test_shrinking_rho_never_lengthens(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            q0 = Config.of(*rng.uniform(-10, 10, 2), rng.uniform(0, 2 * math.pi))
            q1 = Config.of(*rng.uniform(-10, 10, 2), rng.uniform(0, 2 * math.pi))
            lengths = [dubins_shortest(q0, q1, rho).length for rho in (1, 0.1, 0.01)]
            assert lengths[0] >= lengths[1] - 1e-6 and lengths[1] >= lengths[2] - 1e-6

    def test_invariant_under_rigid_motion(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a, b = rng.uniform(-10, 10, 2), rng.uniform(-10, 10, 2)
            ha, hb = rng.uniform(0, 2 * math.pi, 2)
            rot, shift = rng.uniform(0, 2 * math.pi), rng.uniform(-100, 100, 2)
            c, s = math.cos(rot), math.sin(rot)
            move = lambda p: (c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1])
            l1 = dubins_shortest(Config.of(*a, ha), Config.of(*b, hb), 0.7).length
            l2 = dubins_shortest(Config.of(*move(a), ha + rot), Config.of(*move(b), hb + rot), 0.7).length
            assert l1 == pytest.approx(l2, abs=1e-7)

    def test_rejects_nonpositive_rho(self):
        with pytest.raises(ValueError):
            dubins_shortest(Config.of(0, 0, 0), Config.of(1, 0, 0), 0)


class TestDubinsCollision:
    straight = dubins_shortest(Config.of(0, 0, 0), Config.of(5, 0, 0), 1)

    def test_straight_clear(self):
        assert not dubins_disk_collides(self.straight, Disk(Point(2.5, 3), 1))

    def test_straight_hit(self):
        assert dubins_disk_collides(self.straight, Disk(Point(2.5, 0.5), 1))

    def test_lsl_far_disk(self):
        path = dubins_shortest(Config.of(0, 0, 0), Config.of(0, 4, math.pi), 1)
        assert not dubins_disk_collides(path, Disk(Point(10, 10), 1))
        clearance = np.hypot(*(path.sample(1e-3) - (10, 10)).T).min() - 1
        assert clearance > 1

    def test_agrees_with_sampling(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            q0 = Config.of(*rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
            q1 = Config.of(*rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
            path = dubins_shortest(q0, q1, 1.0)
            disk = Disk(Point(*rng.uniform(-7, 7, 2)), float(rng.uniform(0.1, 3)))
            sampled = np.hypot(*(path.sample(1e-3) - disk.center).T).min()
            if abs(sampled - disk.radius) < 1e-3:
                continue
            assert dubins_disk_collides(path, disk, 0.0) == (sampled < disk.radius)


def test_curve_bank_matches_scalar_predicates():
    rng = np.random.default_rng(8)
    curves = []
    for _ in range(30):
        a, b = rng.uniform(0, 20, 2), rng.uniform(0, 20, 2)
        if rng.random() < 0.5:
            curves.append(Segment(Point(*a), Point(*b)))
        else:
            curves.append(dubins_shortest(Config.of(*a, rng.uniform(0, 6)), Config.of(*b, rng.uniform(0, 6)), 1.5))
    pts = rng.uniform(-2, 22, (40, 2))
    dist = CurveBank(curves).min_distance(pts)
    assert dist.shape == (40, 30)
    for q in range(40):
        for k, c in enumerate(curves):
            for rad in (0.5, 2.0, 5.0):
                if abs(dist[q, k] - rad) < 1e-7:
                    continue
                assert curve_disk_collides(c, Disk(Point(*pts[q]), rad), 0.0) == (dist[q, k] < rad)
