"""Surface diagram validation, orientation, Euler characteristic and
classification tests."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rectafold.circle import Rect
from rectafold.examples import (
    nonorientable_chain,
    sigma_sphere,
    sigma_signs,
    unknot_link,
)
from rectafold.link import min_gap, tube
from rectafold.reeb import disc
from rectafold.surface import (
    DeltaTooLarge,
    DuplicateRect,
    IncompatiblePair,
    NonOrientable,
    SurfaceDiagram,
    boundary,
    boundary_link,
    classify,
    connected_components,
    euler_characteristic,
    orient,
    perturb,
    theta_phi_sets,
    validate_surface,
)

from oracles import oracle_euler, oracle_orientable
from test_link import random_link

F = Fraction


def random_tube(seed: int, n: int | None = None):
    rng = random.Random(seed)
    d = random_link(rng, n or rng.randint(2, 6))
    td = tube(d, min_gap(d) / rng.choice([3, 4, 5]))
    return validate_surface(td.rects), td.eps


tubes = st.builds(random_tube, st.integers(0, 10**6))


class TestValidate:
    def test_sigma_valid(self):
        validate_surface(sigma_sphere())

    def test_reeb_k3_valid(self):
        d, _ = disc(3)
        assert len(d.rects) == 25
        validate_surface(d.rects)

    def test_duplicate(self):
        r = Rect.of(0, F(1, 2), 0, F(1, 2))
        with pytest.raises(DuplicateRect):
            validate_surface([r, r])

    def test_incompatible(self):
        with pytest.raises(IncompatiblePair):
            validate_surface(
                [Rect.of(0, F(1, 2), 0, F(1, 2)), Rect.of(F(1, 4), F(3, 4), F(1, 4), F(3, 4))]
            )


class TestBoundary:
    def test_single_rect(self):
        r = Rect.of(0, F(1, 2), 0, F(1, 2))
        d = SurfaceDiagram((r,))
        assert boundary(d) == r.corners()

    @given(tubes)
    @settings(max_examples=30)
    def test_tube_closed(self, td):
        d, _ = td
        assert boundary(d) == frozenset()

    def test_reeb_boundary_is_square_unknot(self):
        # the innermost layer leaves exactly the four corners of its two
        # theta-companion rectangles unmatched: a square unknot diagram
        from rectafold.link import components

        for K in (1, 2, 3):
            d, _ = disc(K)
            bl = boundary_link(d)
            assert bl is not None
            e4 = F(1, 2 ** (K + 4))
            b, c = F(5, 16) + e4, F(11, 16) - e4
            a, dd = F(3, 16) - e4, F(13, 16) + e4
            assert bl.vertices == {(b, a), (b, dd), (c, a), (c, dd)}
            assert len(components(bl)) == 1


class TestOrient:
    def test_sigma_orientation(self):
        rects = sigma_sphere()
        d = validate_surface(rects)
        want = sigma_signs(rects)
        eps = orient(d, seed=(rects[0], 1))
        assert eps == want
        assert oracle_orientable(rects) is not None

    def test_seed_flips(self):
        rects = sigma_sphere()
        d = validate_surface(rects)
        eps = orient(d, seed=(rects[0], -1))
        assert eps == {r: -s for r, s in sigma_signs(rects).items()}

    def test_single_rect(self):
        r = Rect.of(0, F(1, 2), 0, F(1, 2))
        assert orient(SurfaceDiagram((r,))) == {r: 1}
        assert orient(SurfaceDiagram((r,)), seed=(r, -1)) == {r: -1}

    def test_twisted_band_nonorientable(self):
        rects = nonorientable_chain()
        d = validate_surface(rects)
        assert oracle_orientable(rects) is None
        with pytest.raises(NonOrientable) as ei:
            orient(d)
        cycle = ei.value.cycle
        assert len(cycle) % 2 == 1
        assert set(cycle) <= set(rects)

    def test_reeb_matches_published_signs(self):
        from rectafold.reeb import rect_by_index, sign_by_index

        d, eps = disc(3)
        got = orient(d, seed=(rect_by_index(0), 1))
        assert got == eps
        for i in range(25):
            assert got[rect_by_index(i)] == sign_by_index(i)

    @given(tubes)
    @settings(max_examples=30)
    def test_tube_orientation_matches_construction(self, td):
        d, eps = td
        got = orient(d)
        for comp in connected_components(d):
            flip = got[comp.rects[0]] * eps[comp.rects[0]]
            assert all(got[r] == flip * eps[r] for r in comp.rects)


class TestThetaPhiSets:
    def test_single_positive_rect(self):
        r = Rect.of(F(1, 8), F(3, 8), F(1, 2), F(3, 4))
        s = theta_phi_sets(SurfaceDiagram((r,)), {r: 1})
        assert s.ThetaPlus == {F(1, 8)} and s.ThetaMinus == {F(3, 8)}
        assert s.PhiPlus == {F(3, 4)} and s.PhiMinus == {F(1, 2)}

    def test_reeb_accumulation_sets(self):
        K = 3
        d, eps = disc(K)
        s = theta_phi_sets(d, eps)
        want_minus = {
            x
            for k in range(4, K + 4)
            for x in (F(3, 16) - F(1, 2**k), F(11, 16) - F(1, 2**k))
        }
        want_plus = {
            x
            for k in range(4, K + 4)
            for x in (F(5, 16) + F(1, 2**k), F(13, 16) + F(1, 2**k))
        }
        # a finite truncation additionally exposes one coordinate at the
        # next (boundary) scale near each accumulation line
        e4 = F(1, 2 ** (K + 4))
        assert s.ThetaMinus == want_minus | {F(11, 16) - e4}
        assert s.PhiMinus == want_minus | {F(3, 16) - e4}
        assert s.ThetaPlus == want_plus | {F(5, 16) + e4}
        assert s.PhiPlus == want_plus | {F(13, 16) + e4}

    @given(tubes)
    @settings(max_examples=30)
    def test_disjoint_split_for_oriented(self, td):
        d, eps = td
        s = theta_phi_sets(d, eps)
        assert s.ThetaPlus | s.ThetaMinus == s.Theta
        assert not (s.ThetaPlus & s.ThetaMinus)
        assert s.PhiPlus | s.PhiMinus == s.Phi
        assert not (s.PhiPlus & s.PhiMinus)


class TestEuler:
    def test_sigma_sphere(self):
        d = validate_surface(sigma_sphere())
        assert oracle_euler(d.rects) == 2
        assert euler_characteristic(d) == 2

    def test_tube_unknot_torus(self):
        td = tube(unknot_link(), F(1, 16))
        d = validate_surface(td.rects)
        assert oracle_euler(d.rects) == 0
        assert euler_characteristic(d) == 0

    def test_reeb_disc(self):
        for K in (1, 2, 3):
            d, _ = disc(K)
            assert oracle_euler(d.rects) == 1
            assert euler_characteristic(d) == 1

    def test_single_rect_disc(self):
        d = SurfaceDiagram((Rect.of(0, F(1, 2), 0, F(1, 2)),))
        assert euler_characteristic(d) == 1

    @given(tubes)
    @settings(max_examples=30)
    def test_matches_oracle(self, td):
        d, _ = td
        assert euler_characteristic(d) == oracle_euler(d.rects)

    @given(tubes, st.integers(1, 100))
    @settings(max_examples=30)
    def test_invariant_under_perturb_and_rotation(self, td, k):
        d, eps = td
        chi = euler_characteristic(d)
        shift = F(k, 101)
        rot = SurfaceDiagram(tuple(r.shifted(shift, shift) for r in d.rects))
        assert euler_characteristic(rot) == chi
        pd, _ = perturb(d, eps, F(1, 10**4))
        assert euler_characteristic(pd) == chi


class TestClassify:
    def test_sigma_is_sphere(self):
        cl = classify(validate_surface(sigma_sphere()))
        assert len(cl) == 1
        assert (cl[0].chi, cl[0].orientable, cl[0].boundary_curves) == (2, True, 0)
        assert cl[0].name == "sphere"

    def test_tube_unknot_is_torus(self):
        cl = classify(validate_surface(tube(unknot_link(), F(1, 16)).rects))
        assert len(cl) == 1
        assert cl[0].name == "torus"

    def test_two_component_tube_two_tori(self):
        from rectafold.link import validate_link

        d = validate_link(
            [(0, 0), (0, F(1, 8)), (F(1, 8), 0), (F(1, 8), F(1, 8)),
             (F(1, 2), F(1, 2)), (F(1, 2), F(5, 8)),
             (F(5, 8), F(1, 2)), (F(5, 8), F(5, 8))]
        )
        cl = classify(validate_surface(tube(d, F(1, 32)).rects))
        assert [c.name for c in cl] == ["torus", "torus"]

    def test_reeb_is_disc(self):
        cl = classify(disc(1)[0])
        assert len(cl) == 1
        assert cl[0].name == "disc"

    @given(tubes)
    @settings(max_examples=30)
    def test_random_tubes_are_tori(self, td):
        d, _ = td
        from rectafold.link import components

        for c in classify(d):
            assert c.name == "torus"


class TestPerturb:
    def test_identity_at_zero(self):
        d, eps = disc(1)
        pd, peps = perturb(d, eps, 0)
        assert pd == d and peps == eps

    def test_round_trip(self):
        d, eps = random_tube(7)
        pd, peps = perturb(d, eps, F(1, 10**3))
        back, beps = perturb(pd, peps, -F(1, 10**3))
        assert back == d and beps == eps

    def test_too_large(self):
        d, eps = random_tube(7)
        with pytest.raises(DeltaTooLarge):
            perturb(d, eps, F(1, 2))

    def test_tube_family(self):
        # growing the tube radius is exactly the positive deformation of
        # the thinner tube's orientation
        R = unknot_link()
        s, t = F(1, 32), F(1, 16)
        thin = tube(R, s)
        fat = tube(R, t)
        d = validate_surface(thin.rects)
        pd, _ = perturb(d, thin.eps, t - s)
        assert set(pd.rects) == set(fat.rects)

    @given(tubes)
    @settings(max_examples=30)
    def test_preserves_validity_and_boundary(self, td):
        d, eps = td
        pd, peps = perturb(d, eps, F(1, 10**4))
        validate_surface(pd.rects)
        assert boundary(pd) == frozenset()
        got = orient(pd)
        for comp in connected_components(pd):
            flip = got[comp.rects[0]] * peps[comp.rects[0]]
            assert all(got[r] == flip * peps[r] for r in comp.rects)


class TestComponents:
    def test_sigma_connected(self):
        assert len(connected_components(validate_surface(sigma_sphere()))) == 1

    def test_disjoint_pieces(self):
        d = validate_surface(
            [Rect.of(0, F(1, 16), 0, F(1, 16)),
             Rect.of(F(1, 2), F(9, 16), F(1, 2), F(9, 16))]
        )
        assert len(connected_components(d)) == 2
