"""Circle/rectangle predicate tests, pinned against the brute-force oracles."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rectafold.circle import (
    AmbiguousOverlay,
    Interval,
    NotARectangleIntersection,
    Rect,
    compatible,
    crossing,
    interval_contains,
    interval_intersect,
    intersection_contains,
    mod1,
    overlays,
    rect_intersection,
    refinement_grid,
)

from oracles import oracle_compatible, oracle_interval_contains, raster

F = Fraction


def rational(max_den=64):
    return st.integers(1, 64).flatmap(
        lambda q: st.integers(0, q - 1).map(lambda p: F(p, q))
    )


def intervals(max_den=64):
    return st.tuples(rational(max_den), rational(max_den)).filter(
        lambda t: t[0] != t[1]
    ).map(lambda t: Interval(*t))


def rects(max_den=64):
    return st.tuples(intervals(max_den), intervals(max_den)).map(lambda t: Rect(*t))


class TestIntervalContains:
    def test_wrap_through_zero(self):
        assert interval_contains(Interval(F(3, 4), F(1, 4)), 0, "closed")

    def test_open_excludes_endpoint(self):
        assert not interval_contains(Interval(F(1, 4), F(3, 4)), F(1, 4), "open")

    def test_outside(self):
        # frozen from the lift-to-reals oracle
        assert oracle_interval_contains(Interval(F(1, 4), F(3, 4)), F(7, 8), "closed") is False
        assert not interval_contains(Interval(F(1, 4), F(3, 4)), F(7, 8), "closed")

    @given(intervals(), rational(), st.sampled_from(["closed", "open", "half_open"]))
    def test_matches_oracle(self, i, p, openness):
        assert interval_contains(i, p, openness) == oracle_interval_contains(i, p, openness)


class TestIntervalIntersect:
    def test_simple_overlap(self):
        assert interval_intersect(Interval(0, F(1, 2)), Interval(F(1, 4), F(3, 4))) == [
            ("interval", Interval(F(1, 4), F(1, 2)))
        ]

    def test_endpoints_only(self):
        got = interval_intersect(Interval(0, F(1, 2)), Interval(F(1, 2), 0))
        assert set(got) == {("point", F(0)), ("point", F(1, 2))}

    def test_two_components(self):
        got = interval_intersect(Interval(F(1, 8), F(7, 8)), Interval(F(3, 4), F(1, 4)))
        assert set(got) == {
            ("interval", Interval(F(3, 4), F(7, 8))),
            ("interval", Interval(F(1, 8), F(1, 4))),
        }

    @given(intervals(), intervals())
    def test_pointwise_against_membership(self, a, b):
        """Each sample of the joint refinement lies in some piece iff it lies
        in both arcs."""
        pieces = interval_intersect(a, b)
        assert len(pieces) <= 2
        for s in refinement_grid([a.lo, a.hi, b.lo, b.hi]):
            in_pieces = any(
                (k == "point" and v == s) or (k == "interval" and interval_contains(v, s))
                for k, v in pieces
            )
            assert in_pieces == (interval_contains(a, s) and interval_contains(b, s))


class TestRectIntersection:
    def test_disjoint(self):
        r1 = Rect.of(0, F(1, 8), 0, F(1, 8))
        r2 = Rect.of(F(1, 2), F(5, 8), F(1, 2), F(5, 8))
        assert rect_intersection(r1, r2).kind == "empty"

    def test_shared_corner(self):
        r1 = Rect.of(F(1, 8), F(3, 8), F(1, 8), F(3, 8))
        r2 = Rect.of(F(3, 8), F(5, 8), F(3, 8), F(5, 8))
        ri = rect_intersection(r1, r2)
        assert ri.kind == "vertices"
        assert ri.vertices == frozenset({(F(3, 8), F(3, 8))})

    def test_overlapping_corners_not_vertex_free(self):
        # Intersection rectangle [1/4;1/2]^2 contains the corner (1/2,1/2)
        # of r1 (and (1/4,1/4) of r2), so the pair is incompatible.
        # Frozen from the rasterization oracle.
        r1 = Rect.of(0, F(1, 2), 0, F(1, 2))
        r2 = Rect.of(F(1, 4), F(3, 4), F(1, 4), F(3, 4))
        ri = rect_intersection(r1, r2)
        assert ri.kind == "rect"
        assert ri.rect == Rect.of(F(1, 4), F(1, 2), F(1, 4), F(1, 2))
        assert oracle_compatible(r1, r2) is False
        assert not compatible(r1, r2)

    def test_plus_crossing_compatible(self):
        r1 = Rect.of(F(3, 8), F(5, 8), F(1, 8), F(7, 8))
        r2 = Rect.of(F(1, 8), F(7, 8), F(3, 8), F(5, 8))
        ri = rect_intersection(r1, r2)
        assert ri.kind == "rect"
        assert ri.rect == Rect.of(F(3, 8), F(5, 8), F(3, 8), F(5, 8))
        assert compatible(r1, r2)

    @given(rects(), rects())
    @settings(max_examples=300)
    def test_pointwise_against_raster(self, r1, r2):
        ri = rect_intersection(r1, r2)
        tc, pc, occ = raster(r1, r2)
        for i, (_, ts) in enumerate(tc):
            for j, (_, ps) in enumerate(pc):
                assert intersection_contains(ri, (ts, ps)) == occ[(i, j)]


class TestCompatible:
    def test_equal_rectangles(self):
        r = Rect.of(0, F(1, 2), 0, F(1, 2))
        assert compatible(r, r)

    def test_corner_in_intersection(self):
        r1 = Rect.of(0, F(1, 2), 0, F(1, 2))
        r2 = Rect.of(F(1, 4), F(3, 4), F(3, 8), F(5, 8))
        # corner (1/2, 1/2) of r1 lies in the intersection rectangle
        assert oracle_compatible(r1, r2) is False
        assert not compatible(r1, r2)

    @given(rects(), rects())
    @settings(max_examples=400)
    def test_matches_oracle(self, r1, r2):
        assert compatible(r1, r2) == oracle_compatible(r1, r2)

    @given(rects(), rects())
    def test_symmetric(self, r1, r2):
        assert compatible(r1, r2) == compatible(r2, r1)

    @given(rects(), rects(), rational())
    def test_rotation_equivariant(self, r1, r2, d):
        assert compatible(r1, r2) == compatible(r1.shifted(d, d), r2.shifted(d, d))


class TestOverlays:
    def test_narrow_overlays_wide(self):
        r1 = Rect.of(F(3, 8), F(5, 8), F(1, 8), F(7, 8))
        r2 = Rect.of(F(1, 8), F(7, 8), F(3, 8), F(5, 8))
        assert overlays(r1, r2)
        assert not overlays(r2, r1)

    def test_equal_widths_ambiguous(self):
        # meet in a rectangle, equal theta-widths: width comparison refuses
        r1 = Rect.of(0, F(1, 2), F(1, 8), F(7, 8))
        r2 = Rect.of(F(1, 4), F(3, 4), F(3, 8), F(5, 8))
        with pytest.raises(AmbiguousOverlay):
            overlays(r1, r2)

    @given(rects(), rects())
    @settings(max_examples=300)
    def test_crossing_widths_always_differ(self, r1, r2):
        """A crossing pins one theta-interval strictly inside the other."""
        if crossing(r1, r2):
            assert r1.theta.length != r2.theta.length

    def test_requires_crossing(self):
        r1 = Rect.of(0, F(1, 8), 0, F(1, 8))
        r2 = Rect.of(F(1, 2), F(5, 8), F(1, 2), F(5, 8))
        with pytest.raises(NotARectangleIntersection):
            overlays(r1, r2)

    def test_sigma_pair(self):
        # sphere-around-a-rectangle diagram: the tall collar overlays the
        # wide collar (strictly smaller theta-width), and that is the only
        # crossing pair among the six rectangles.
        from rectafold.examples import sigma_sphere

        rects = sigma_sphere()
        wide, tall = rects[0], rects[1]
        assert crossing(wide, tall)
        assert overlays(tall, wide)
        assert not overlays(wide, tall)
        crossing_pairs = [
            (i, j)
            for i in range(6)
            for j in range(i + 1, 6)
            if crossing(rects[i], rects[j])
        ]
        assert crossing_pairs == [(0, 1)]

    @given(rects(), rects())
    @settings(max_examples=300)
    def test_antisymmetric(self, r1, r2):
        if not crossing(r1, r2):
            return
        if r1.theta.length == r2.theta.length:
            return
        assert overlays(r1, r2) != overlays(r2, r1)


@given(intervals(), rational(), st.sampled_from(["closed", "open", "half_open"]), rational())
def test_rotation_equivariance_of_contains(i, p, openness, d):
    assert interval_contains(i, p, openness) == interval_contains(
        i.shifted(d), mod1(p + d), openness
    )
