"""Elementary and macro move application, inversion, classification and
decomposition tests."""

import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rectafold.circle import Interval, Rect
from rectafold.examples import sigma_signs, sigma_sphere, unknot_link
from rectafold.link import min_gap, tube
from rectafold.moves import (
    INVERSE_KIND,
    Move,
    MoveIllegal,
    UnclassifiableLeap,
    apply_move,
    bubble_create_move,
    bubble_reduce_move,
    classify_sign,
    decompose_gen_compression,
    decompose_wrinkle,
    extend_orientation,
    family_flype_move,
    find_moves,
    replay,
    wrinkle_move,
)
from rectafold.reeb import R_I, bubble_chain, core, disc, deform
from rectafold.surface import (
    SurfaceDiagram,
    boundary,
    connected_components,
    euler_characteristic,
    orient,
    validate_surface,
)

from move_corpus import GENERATORS, cases

F = Fraction

KINDS = sorted(GENERATORS)


def _gen_compression_k(m):
    axis, r0 = m.aux
    if axis == "vertical":
        return sum(1 for r in m.removed if r != r0 and r.theta == r0.theta)
    return sum(1 for r in m.removed if r != r0 and r.phi == r0.phi)


class TestApplyInverse:
    @pytest.mark.parametrize("kind", KINDS)
    def test_round_trip_is_identity(self, kind):
        for d, eps, m in cases(kind, 25, seed=11):
            nd, neps, inv = apply_move(d, eps, m)
            assert inv.kind == INVERSE_KIND[m.kind]
            back, beps, inv2 = apply_move(nd, neps, inv)
            assert set(back.rects) == set(d.rects)
            assert beps == eps
            assert inv2.kind == m.kind
            assert set(inv2.removed) == set(m.removed)

    @pytest.mark.parametrize("kind", KINDS)
    def test_result_is_valid_oriented_diagram(self, kind):
        for d, eps, m in cases(kind, 10, seed=12):
            nd, neps, _ = apply_move(d, eps, m)
            validate_surface(nd.rects)
            got = orient(nd)
            for comp in connected_components(nd):
                flip = got[comp.rects[0]] * neps[comp.rects[0]]
                assert all(got[r] == flip * neps[r] for r in comp.rects)

    def test_removed_rect_missing_rejected(self):
        d, eps, m = cases("Flype", 1, seed=13)[0]
        stranger = Rect.of(0, F(1, 128), 0, F(1, 128))
        bad = replace(m, removed=m.removed[:3] + (stranger,))
        with pytest.raises(MoveIllegal):
            apply_move(d, eps, bad)


class TestEulerDelta:
    """Each move kind changes the Euler characteristic by a fixed amount."""

    @pytest.mark.parametrize(
        "kind,delta",
        [("BubbleCreate", 0), ("Flype", 0), ("WrinkleReduce", 0),
         ("Compression", 2), ("SphereRemove", -2)],
    )
    def test_fixed_delta(self, kind, delta):
        for d, eps, m in cases(kind, 25, seed=21):
            nd, _, _ = apply_move(d, eps, m)
            assert euler_characteristic(nd) - euler_characteristic(d) == delta

    def test_gen_compression_delta_counts_companions(self):
        seen = set()
        for d, eps, m in cases("GenCompression", 25, seed=22):
            k = _gen_compression_k(m)
            seen.add(k)
            nd, _, _ = apply_move(d, eps, m)
            assert euler_characteristic(nd) - euler_characteristic(d) == 2 * k
        assert 1 in seen


class TestBoundaryPreserved:
    @pytest.mark.parametrize("kind", ["BubbleCreate", "Flype"])
    def test_boundary_unchanged(self, kind):
        for d, eps, m in cases(kind, 25, seed=31):
            nd, _, _ = apply_move(d, eps, m)
            assert boundary(nd) == boundary(d)


class TestBubble:
    def test_create_then_reduce_restores(self):
        r = Rect.of(0, F(1, 2), 0, F(1, 2))
        d = SurfaceDiagram((r,))
        eps = {r: 1}
        m = bubble_create_move(d, eps, r, F(1, 8), F(1, 4), "vertical")
        nd, neps, inv = apply_move(d, eps, m)
        assert len(nd.rects) == 3
        m2 = bubble_reduce_move(nd, neps, nd.rects)
        back, beps, _ = apply_move(nd, neps, m2)
        assert set(back.rects) == {r} and beps == eps

    def test_creation_sign_follows_orientation_and_axis(self):
        # vertical split of a positive rectangle is positive, horizontal
        # split negative; both flip with the orientation
        r = Rect.of(0, F(1, 2), 0, F(1, 2))
        d = SurfaceDiagram((r,))
        for e in (1, -1):
            eps = {r: e}
            mv = bubble_create_move(d, eps, r, F(1, 8), F(1, 4), "vertical")
            mh = bubble_create_move(d, eps, r, F(1, 8), F(1, 4), "horizontal")
            assert classify_sign(d, eps, mv) == e
            assert classify_sign(d, eps, mh) == -e

    def test_reduce_sign_is_negated_creation_sign(self):
        for d, eps, m in cases("BubbleCreate", 25, seed=41):
            nd, neps, inv = apply_move(d, eps, m)
            assert inv.sign == -m.sign

    def test_unmergeable_triple_rejected(self):
        rects = sigma_sphere()
        d = validate_surface(rects)
        eps = sigma_signs(rects)
        with pytest.raises(MoveIllegal):
            bubble_reduce_move(d, eps, rects[:3])

    def test_middle_rectangle_orientation_enforced(self):
        r = Rect.of(0, F(1, 2), 0, F(1, 2))
        d = SurfaceDiagram((r,))
        eps = {r: 1}
        m = bubble_create_move(d, eps, r, F(1, 8), F(1, 4), "vertical")
        flipped = replace(
            m, added=tuple((a, 1) for a, _ in m.added)
        )
        with pytest.raises(MoveIllegal):
            apply_move(d, eps, flipped)


class TestFlype:
    def test_label_swap_rejected(self):
        d, eps, m = cases("Flype", 1, seed=51)[0]
        swapped = replace(m, removed=tuple(reversed(m.removed)))
        with pytest.raises(MoveIllegal) as ei:
            apply_move(d, eps, swapped)
        assert "overlay" in ei.value.clause

    def test_orientation_mismatch_rejected(self):
        d, eps, m = cases("Flype", 1, seed=52)[0]
        bad_eps = {r: -e if r == m.removed[0] else e for r, e in eps.items()}
        with pytest.raises(MoveIllegal):
            apply_move(d, bad_eps, m)

    def test_sign_is_orientation_of_overlaying_rectangle(self):
        for d, eps, m in cases("Flype", 25, seed=53):
            assert m.sign == (1 if eps[m.removed[0]] == -1 else -1)

    def test_inverse_is_a_flype_on_the_primed_side(self):
        for d, eps, m in cases("Flype", 10, seed=54):
            nd, neps, inv = apply_move(d, eps, m)
            assert inv.kind == "Flype"
            assert set(inv.removed) == set(m.added_rects())
            back, beps, _ = apply_move(nd, neps, inv)
            assert set(back.rects) == set(d.rects) and beps == eps

    @given(st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_double_flype_is_identity(self, seed):
        from move_corpus import flype_case

        d, eps, m = flype_case(random.Random(seed))
        nd, neps, inv = apply_move(d, eps, m)
        back, beps, _ = apply_move(nd, neps, inv)
        assert set(back.rects) == set(d.rects) and beps == eps


class TestCompression:
    def test_planted_quad_round_trip(self):
        for d, eps, m in cases("Compression", 25, seed=61):
            nd, neps, inv = apply_move(d, eps, m)
            assert inv.kind == "CompressionInverse"
            assert len(nd.rects) == len(d.rects) - 2
            back, beps, _ = apply_move(nd, neps, inv)
            assert set(back.rects) == set(d.rects) and beps == eps

    def test_sign_antisymmetry_under_leap(self):
        for d, eps, m in cases("Compression", 25, seed=62):
            if m.sign is None:
                continue
            nd, neps, inv = apply_move(d, eps, m)
            assert classify_sign(nd, neps, inv) == -m.sign

    def test_added_pair_must_match_pattern(self):
        d, eps, m = cases("Compression", 1, seed=63)[0]
        r1 = m.removed[0]
        wrong = Rect(Interval(r1.theta1, r1.theta2), m.added[0][0].phi)
        bad = replace(m, added=((wrong, m.added[0][1]), m.added[1]))
        with pytest.raises(MoveIllegal):
            apply_move(d, eps, bad)


class TestSphere:
    def test_remove_then_insert(self):
        for d, eps, m in cases("SphereRemove", 25, seed=71):
            nd, neps, inv = apply_move(d, eps, m)
            assert inv.kind == "SphereInsert"
            assert len(connected_components(nd)) == len(connected_components(d)) - 1
            back, beps, _ = apply_move(nd, neps, inv)
            assert set(back.rects) == set(d.rects) and beps == eps

    def test_sign_must_be_supplied(self):
        d, eps, m = cases("SphereRemove", 1, seed=72)[0]
        with pytest.raises(UnclassifiableLeap):
            classify_sign(d, eps, replace(m, sign=None))

    def test_partial_component_rejected(self):
        d, eps, m = cases("SphereRemove", 1, seed=73)[0]
        bad = replace(m, removed=m.removed[:3])
        with pytest.raises(MoveIllegal):
            apply_move(d, eps, bad)

    def test_non_sphere_component_rejected(self):
        td = tube(unknot_link(), F(1, 16))
        d = validate_surface(td.rects)
        m = Move("SphereRemove", tuple(d.rects), (), sign=1)
        with pytest.raises(MoveIllegal):
            apply_move(d, td.eps, m)


class TestSigmaSites:
    def test_bubble_reduction_sites_and_signs(self):
        rects = sigma_sphere()
        d = validate_surface(rects)
        eps = orient(d, seed=(rects[0], 1))
        ms = find_moves(d, eps, kinds=("BubbleReduce",))
        assert len(ms) == 2
        assert {m.sign for m in ms} == {-1}
        flipped = orient(d, seed=(rects[0], -1))
        ms = find_moves(d, flipped, kinds=("BubbleReduce",))
        assert {m.sign for m in ms} == {1}

    def test_six_wrinkle_sites(self):
        rects = sigma_sphere()
        d = validate_surface(rects)
        eps = orient(d, seed=(rects[0], 1))
        ms = find_moves(d, eps, kinds=("WrinkleReduce",))
        assert len(ms) == 6

    def test_empty_diagram_has_no_moves(self):
        d = SurfaceDiagram(())
        assert find_moves(d, {}) == []

    def test_unknown_kind_rejected(self):
        d = SurfaceDiagram(())
        with pytest.raises(ValueError):
            find_moves(d, {}, kinds=("Teleport",))


class TestLayerMergeChain:
    """The deformed nested-layer disc merges back to the next-shallower
    disc through four positive bubble reductions."""

    @pytest.mark.parametrize("K", [1, 2, 3])
    def test_chain_restores_shallower_disc(self, K):
        d0, e0, script = bubble_chain(K)
        assert len(script) == 4
        assert [m.sign for m in script] == [1, 1, 1, 1]
        cur_d, cur_eps = d0, e0
        want_boundary = boundary(cur_d)
        for m in script:
            cur_d, cur_eps, _ = apply_move(cur_d, cur_eps, m)
            assert boundary(cur_d) == want_boundary
        dk, ek = disc(K - 1)
        assert set(cur_d.rects) == set(dk.rects)
        assert cur_eps == ek

    def test_first_merge_is_the_only_findable_reduction(self):
        d, eps = disc(3)
        dd = deform(d, eps, 1)
        ms = find_moves(dd.diagram, dd.eps, kinds=("BubbleReduce",))
        assert len(ms) == 1
        assert ms[0].added[0][0] == R_I


class TestWrinkleDecomposition:
    def test_script_shape_and_replay(self):
        for d, eps, m in cases("WrinkleReduce", 20, seed=81):
            steps = decompose_wrinkle(d, eps, m)
            kinds = [s.kind for s in steps]
            mcount = len(m.removed) - 1
            assert kinds.count("Flype") == (mcount - 2) // 2
            assert kinds.count("BubbleReduce") == 1
            assert kinds[-1] == "BubbleReduce"
            rd, reps = replay(d, eps, steps)
            nd, neps, _ = apply_move(d, eps, m)
            assert set(rd.rects) == set(nd.rects)
            assert reps == neps

    def test_step_signs_agree_with_macro_sign(self):
        for d, eps, m in cases("WrinkleReduce", 20, seed=82):
            if m.sign is None:
                continue
            steps = decompose_wrinkle(d, eps, m)
            assert all(s.sign in (m.sign, None) for s in steps)

    def test_wrong_kind_rejected(self):
        d, eps, m = cases("GenCompression", 1, seed=83)[0]
        with pytest.raises(MoveIllegal):
            decompose_wrinkle(d, eps, m)


class TestGenCompressionDecomposition:
    def test_contains_exactly_k_compressions(self):
        for d, eps, m in cases("GenCompression", 20, seed=91):
            k = _gen_compression_k(m)
            steps = decompose_gen_compression(d, eps, m)
            kinds = [s.kind for s in steps]
            assert kinds.count("Compression") == k
            rd, reps = replay(d, eps, steps)
            nd, neps, _ = apply_move(d, eps, m)
            assert set(rd.rects) == set(nd.rects)
            assert reps == neps

    def test_tube_band_site(self):
        td = tube(unknot_link(), F(1, 16))
        d = validate_surface(td.rects)
        r0 = next(r for r, e in td.eps.items() if e == -1)
        m = wrinkle_move(d, td.eps, r0, "vertical")
        assert m.kind == "GenCompression"
        assert _gen_compression_k(m) == 1
        steps = decompose_gen_compression(d, td.eps, m)
        assert [s.kind for s in steps] == ["Compression", "BubbleReduce"]


class TestFamilyBuilder:
    def test_overlaying_orientations_oppose(self):
        # in the standard family the two crossing rectangles always carry
        # opposite orientations
        for d, eps, m in cases("Flype", 25, seed=101):
            assert eps[m.removed[0]] == -eps[m.removed[3]]

    def test_aux_band_swaps_on_inverse(self):
        d, eps, m = cases("Flype", 1, seed=102)[0]
        _, _, inv = apply_move(d, eps, m)
        assert inv.aux == (m.aux[1], m.aux[0])
