"""Typed elementary and macro moves on oriented surface diagrams.

A Move records the rectangles it removes, the rectangles it adds (with
their signs), auxiliary anchors where the defining conditions need them,
and its sign.  `apply` checks every clause of the relevant definition and
returns the transformed oriented diagram together with the inverse move.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .circle import (
    Interval,
    Rect,
    compatible,
    crossing,
    interval_contains,
    mod1,
    overlays,
    refinement_grid,
)
from .surface import (
    SurfaceDiagram,
    _sign_constraints,
    boundary,
    classify,
    connected_components,
    perturb,
    validate_surface,
)

F = Fraction


class MoveIllegal(ValueError):
    def __init__(self, clause: str):
        self.clause = clause
        super().__init__(clause)


class PreconditionFailed(MoveIllegal):
    pass


class UnclassifiableLeap(ValueError):
    pass


class AmbiguousRegion(ValueError):
    pass


INVERSE_KIND = {
    "BubbleCreate": "BubbleReduce",
    "BubbleReduce": "BubbleCreate",
    "Flype": "Flype",
    "SphereRemove": "SphereInsert",
    "SphereInsert": "SphereRemove",
    "Compression": "CompressionInverse",
    "CompressionInverse": "Compression",
    "WrinkleReduce": "WrinkleCreate",
    "WrinkleCreate": "WrinkleReduce",
    "GenCompression": "GenCompressionInverse",
    "GenCompressionInverse": "GenCompression",
}


@dataclass(frozen=True)
class Move:
    kind: str
    removed: tuple  # Rects, in label order where the definition is labelled
    added: tuple  # (Rect, sign) pairs, in label order
    aux: tuple = ()  # extra anchors, kind specific
    sign: int | None = None

    def added_rects(self) -> tuple:
        return tuple(r for r, _ in self.added)


@dataclass(frozen=True)
class MoveScript:
    moves: tuple

    def __iter__(self):
        return iter(self.moves)

    def __len__(self):
        return len(self.moves)


# ---------------------------------------------------------------------------
# region rasterization helpers


def _grid(values):
    """Sorted distinct circle points; the cyclic gaps between consecutive
    ones are the 1-cells of the induced subdivision."""
    return sorted({mod1(v) for v in values})


def _gap_mid(pts, i):
    a = pts[i]
    b = pts[(i + 1) % len(pts)]
    return mod1(a + ((b - a) % 1 if a != b else F(1)) / 2)


def _all_coords(rect_lists):
    ts, ps = set(), set()
    for rects in rect_lists:
        for r in rects:
            ts.update((r.theta1, r.theta2))
            ps.update((r.phi1, r.phi2))
    return _grid(ts), _grid(ps)


class _RegionGrid:
    """Membership tables for rectangle unions on the subdivision induced by
    the given rectangles.  Samples along each axis alternate the grid point
    and the following gap midpoint, so membership of any union of grid
    rectangles is constant at each sample and determined by it."""

    def __init__(self, rect_lists):
        self.tpts, self.ppts = _all_coords(rect_lists)
        self.tvals = []
        for i in range(len(self.tpts)):
            self.tvals += [self.tpts[i], _gap_mid(self.tpts, i)]
        self.pvals = []
        for i in range(len(self.ppts)):
            self.pvals += [self.ppts[i], _gap_mid(self.ppts, i)]
        self._tindex = {v: i for i, v in enumerate(self.tpts)}
        self._pindex = {v: i for i, v in enumerate(self.ppts)}
        self._t1d = {}
        self._p1d = {}

    @staticmethod
    def _arc_mask(index, lo, hi):
        # samples are in cyclic order (point, gap, point, gap, ...), so a
        # closed arc between two grid points covers a cyclic index range
        n = 2 * len(index)
        m = [False] * n
        i = 2 * index[lo]
        end = 2 * index[hi]
        while True:
            m[i] = True
            if i == end:
                return m
            i = (i + 1) % n

    def _masks(self, r: Rect):
        if r not in self._t1d:
            self._t1d[r] = self._arc_mask(self._tindex, r.theta1, r.theta2)
            self._p1d[r] = self._arc_mask(self._pindex, r.phi1, r.phi2)
        return self._t1d[r], self._p1d[r]

    def union_mask(self, rects):
        nt, np_ = len(self.tvals), len(self.pvals)
        mask = [[False] * np_ for _ in range(nt)]
        for r in rects:
            tm, pm = self._masks(r)
            for i in range(nt):
                if tm[i]:
                    row = mask[i]
                    for j in range(np_):
                        if pm[j]:
                            row[j] = True
        return mask

    def _neighbors(self, i, n):
        # even index = grid point (touches both flanking gap cells),
        # odd index = gap midpoint (interior to its cell)
        if i % 2 == 1:
            return (i,)
        return ((i - 1) % n, i, (i + 1) % n)

    def interior_mask(self, mask):
        nt, np_ = len(self.tvals), len(self.pvals)
        out = [[False] * np_ for _ in range(nt)]
        for i in range(nt):
            ti = self._neighbors(i, nt)
            for j in range(np_):
                if not mask[i][j]:
                    continue
                pj = self._neighbors(j, np_)
                out[i][j] = all(mask[a][b] for a in ti for b in pj)
        return out


def _unions_equal(rects_a, rects_b) -> bool:
    """Exact point-set equality of two closed rectangle unions."""
    g = _RegionGrid([rects_a, rects_b])
    return g.union_mask(rects_a) == g.union_mask(rects_b)


def _boundary_subset(inner: Rect, outer) -> bool:
    """True iff the boundary of `inner` lies in the boundary of the union
    of `outer`."""
    g = _RegionGrid([[inner], outer])
    im = g.union_mask([inner])
    iint = g.interior_mask(im)
    om = g.union_mask(outer)
    oint = g.interior_mask(om)
    for i in range(len(g.tvals)):
        for j in range(len(g.pvals)):
            if im[i][j] and not iint[i][j]:
                if not (om[i][j] and not oint[i][j]):
                    return False
    return True


def rects_from_cells(tpts, ppts, occ) -> list[Rect]:
    """Decompose an occupancy pattern over the gap-cell grid into maximal
    rectangles with disjoint interiors (greedy corner carving)."""
    nt, np_ = len(tpts), len(ppts)
    occ = dict(occ)
    out = []
    while any(occ.values()):
        corner = None
        for (i, j), v in sorted(occ.items()):
            if v and not occ.get(((i - 1) % nt, j)) and not occ.get((i, (j - 1) % np_)):
                corner = (i, j)
                break
        if corner is None:
            raise AmbiguousRegion("no rectangle corner cell in region")
        i, j = corner
        w = 1
        while w < nt and occ.get(((i + w) % nt, j)):
            w += 1
        if w == nt:
            raise AmbiguousRegion("region wraps a full circle")
        h = 1
        while h < np_ and all(occ.get(((i + a) % nt, (j + h) % np_)) for a in range(w)):
            # rows must match the footprint exactly, otherwise stop
            if occ.get(((i - 1) % nt, (j + h) % np_)) or occ.get(
                ((i + w) % nt, (j + h) % np_)
            ):
                break
            h += 1
        if h == np_:
            raise AmbiguousRegion("region wraps a full circle")
        for a in range(w):
            for b in range(h):
                occ[((i + a) % nt, (j + b) % np_)] = False
        out.append(
            Rect(
                Interval(tpts[i], tpts[(i + w) % nt]),
                Interval(ppts[j], ppts[(j + h) % np_]),
            )
        )
    return out


# ---------------------------------------------------------------------------
# orientation bookkeeping


def _mirror_theta(r: Rect) -> Rect:
    return Rect(Interval(mod1(-r.theta2), mod1(-r.theta1)), r.phi)


def _mirror_phi(r: Rect) -> Rect:
    return Rect(r.theta, Interval(mod1(-r.phi2), mod1(-r.phi1)))


def check_orientation(d: SurfaceDiagram, eps: dict) -> None:
    for a, b, parity in _sign_constraints(d):
        if eps[a] * parity != eps[b]:
            raise MoveIllegal(f"orientation constraint violated between {a} and {b}")


def extend_orientation(d: SurfaceDiagram, fixed: dict) -> dict:
    """Propagate the signs in `fixed` over the constraint graph of d;
    unconstrained components default to +1 on their smallest rectangle."""
    adj = defaultdict(list)
    for a, b, parity in _sign_constraints(d):
        adj[a].append((b, parity))
        adj[b].append((a, parity))
    eps = dict(fixed)
    for r in eps:
        if r not in d.rects:
            raise MoveIllegal(f"fixed rectangle {r} not in diagram")
    queue = sorted(eps)
    for start in list(queue) + list(d.rects):
        if start not in eps:
            eps[start] = 1
            queue = [start]
        else:
            queue = [start]
        while queue:
            r = queue.pop()
            for s, parity in adj[r]:
                want = eps[r] * parity
                if s not in eps:
                    eps[s] = want
                    queue.append(s)
                elif eps[s] != want:
                    raise MoveIllegal(
                        f"orientation constraint violated between {r} and {s}"
                    )
    return eps


# ---------------------------------------------------------------------------
# kind checkers


def _strict_between(i: Interval, x) -> bool:
    return interval_contains(i, x, "open")


def _check_bubble(d, eps, m, creating):
    if creating:
        (r,) = m.removed
        trio = m.added_rects()
        trio_eps = dict(m.added)
        sign_of = lambda s: eps[s] if s in eps else trio_eps[s]
        er = eps[r]
    else:
        trio = m.removed
        ((r, er),) = m.added
        sign_of = lambda s: eps[s]
    if len(trio) != 3:
        raise MoveIllegal("bubble: expected three rectangles on the split side")
    # try the vertical form (cut annulus [ta;tb] x S^1), then horizontal
    for transpose in (False, True):
        if transpose:
            R = r.transposed()
            T = [s.transposed() for s in trio]
        else:
            R = r
            T = list(trio)
        sides = [s for s in T if s.phi == R.phi]
        mids = [s for s in T if (s.phi1, s.phi2) == (R.phi2, R.phi1)]
        if len(sides) != 2 or len(mids) != 1:
            continue
        r3 = mids[0]
        ta, tb = r3.theta1, r3.theta2
        r1 = next((s for s in sides if (s.theta1, s.theta2) == (R.theta1, ta)), None)
        r2 = next((s for s in sides if (s.theta1, s.theta2) == (tb, R.theta2)), None)
        if r1 is None or r2 is None:
            continue
        pa = (ta - R.theta1) % 1
        pb = (tb - R.theta1) % 1
        if not 0 < pa < pb < R.theta.length:
            raise MoveIllegal("bubble: cut lines not strictly inside the rectangle")
        delta = -1 if transpose else 1
        o1 = sign_of(trio[T.index(r1)])
        o2 = sign_of(trio[T.index(r2)])
        o3 = sign_of(trio[T.index(r3)])
        if not (er == o1 == o2):
            raise MoveIllegal("bubble: eps(r) = eps(r1) = eps(r2) violated")
        if o3 != -er:
            raise MoveIllegal("bubble: eps(r3) must oppose eps(r)")
        create_sign = 1 if er == delta else -1
        return create_sign if creating else -create_sign
    raise MoveIllegal("bubble: rectangles do not form a symmetric difference with an annulus")


def _check_flype(d, eps, m):
    if len(m.removed) != 4 or len(m.added) != 4:
        raise MoveIllegal("flype: needs four labelled rectangles on each side")
    r1, r2, r3, r4 = m.removed
    prim = m.added_rects()
    prim_eps = dict(m.added)
    if len(m.aux) != 2:
        raise MoveIllegal("flype: anchors must supply the two pivot rectangles")
    r_star, r_star_p = m.aux
    r1p, r2p, r3p, r4p = prim
    if not (crossing(r1, r4) and overlays(r1, r4)):
        raise MoveIllegal("flype: r1 must overlay r4")
    if not (crossing(r4p, r1p) and overlays(r4p, r1p)):
        raise MoveIllegal("flype: r4' must overlay r1'")
    for i, (a, b) in enumerate(((r1, r2), (r2, r3), (r3, r4))):
        if not (a.corners() & b.corners()):
            raise MoveIllegal(f"flype: r{i+1} and r{i+2} share no vertex")
    for i, (a, b) in enumerate(((r1p, r2p), (r2p, r3p), (r3p, r4p))):
        if not (a.corners() & b.corners()):
            raise MoveIllegal(f"flype: r{i+1}' and r{i+2}' share no vertex")
    if not _boundary_subset(r_star, [r1, r2, r3, r4]):
        raise MoveIllegal("flype: boundary of r* not inside boundary of the union")
    if not _boundary_subset(r_star_p, [r1p, r2p, r3p, r4p]):
        raise MoveIllegal("flype: boundary of r*' not inside boundary of the union")
    if not _unions_equal([r1, r_star, r3], [r1p, r_star_p, r3p]):
        raise MoveIllegal("flype: r1 u r* u r3 differs from r1' u r*' u r3'")
    if not _unions_equal([r4, r_star, r2], [r4p, r_star_p, r2p]):
        raise MoveIllegal("flype: r4 u r* u r2 differs from r4' u r*' u r2'")
    for ri, rip in zip(m.removed, prim):
        if eps[ri] != prim_eps[rip]:
            raise MoveIllegal("flype: eps(r_i) = eps'(r_i') violated")
    return 1 if eps[r1] == -1 else -1


def _component_hull(coords, other) -> bool:
    """True iff all of `coords` lie strictly inside one cyclic gap of
    `other` (vacuously true when `other` is empty)."""
    other = sorted(other)
    if not other:
        return True
    coords = sorted(coords)
    for a, b in zip(other, other[1:] + other[:1]):
        gap = Interval(a, b) if a != b else None
        if gap is None:
            return all(c != a for c in coords)
        if all(interval_contains(gap, c, "open") for c in coords):
            return True
    return False


def _check_sphere(d, eps, m, removing):
    comp_rects = m.removed if removing else m.added_rects()
    rest = [r for r in d.rects if r not in comp_rects] if removing else list(d.rects)
    if removing and m.added:
        raise MoveIllegal("sphere removal adds nothing")
    if not removing and m.removed:
        raise MoveIllegal("sphere insertion removes nothing")
    sub = validate_surface(comp_rects)
    if len(connected_components(sub)) != 1:
        raise MoveIllegal("sphere: removed rectangles are not connected")
    (cl,) = classify(sub)
    if not (cl.chi == 2 and cl.orientable and cl.boundary_curves == 0):
        raise MoveIllegal("sphere: removed component does not classify as a sphere")
    ts = {x for r in comp_rects for x in (r.theta1, r.theta2)}
    ps = {x for r in comp_rects for x in (r.phi1, r.phi2)}
    ots = {x for r in rest for x in (r.theta1, r.theta2)}
    ops = {x for r in rest for x in (r.phi1, r.phi2)}
    if ts & ots or ps & ops:
        raise MoveIllegal("sphere: component shares occupied lines with the rest")
    if not (_component_hull(ts, ots) and _component_hull(ps, ops)):
        raise MoveIllegal("sphere: component coordinates interleave with the rest")
    # footprint box must be free of the remaining rectangles
    if rest and ots:
        hull_t = _hull_interval(ts, ots)
        hull_p = _hull_interval(ps, ops)
        box = Rect(hull_t, hull_p)
        for r in rest:
            inter_t = any(
                interval_contains(box.theta, x, "closed")
                and interval_contains(r.theta, x, "closed")
                for x in refinement_grid(
                    [box.theta1, box.theta2, r.theta1, r.theta2]
                )
            )
            inter_p = any(
                interval_contains(box.phi, x, "closed")
                and interval_contains(r.phi, x, "closed")
                for x in refinement_grid([box.phi1, box.phi2, r.phi1, r.phi2])
            )
            if inter_t and inter_p:
                raise MoveIllegal("sphere: a remaining rectangle meets the bounding box")
    return m.sign


def _hull_interval(coords, other) -> Interval:
    """Smallest arc containing `coords` within its separating gap of
    `other`."""
    other = sorted(other)
    for a, b in zip(other, other[1:] + other[:1]):
        gap = Interval(a, b) if a != b else None
        if gap is not None and all(
            interval_contains(gap, c, "open") for c in coords
        ):
            pos = sorted(((c - a) % 1, c) for c in coords)
            return Interval(pos[0][1], pos[-1][1])
    raise MoveIllegal("sphere: no separating gap")


def _compression_pattern(quad):
    """Recover (theta1..4, phi1..4) from the four labelled rectangles of an
    ordinary compression, or raise."""
    r1, r2, r3, r4 = quad
    if r2.theta != r3.theta:
        raise MoveIllegal("compression: r2, r3 must share their theta-interval")
    if r1.phi != r4.phi:
        raise MoveIllegal("compression: r1, r4 must share their phi-interval")
    t1, t2 = r1.theta1, r1.theta2
    t3, t4 = r4.theta1, r4.theta2
    p1, p2 = r2.phi1, r2.phi2
    p3, p4 = r3.phi1, r3.phi2
    if (r2.theta1, r2.theta2) != (t2, t3):
        raise MoveIllegal("compression: r2 theta-interval must be [theta2;theta3]")
    if (r1.phi1, r1.phi2) != (p2, p3):
        raise MoveIllegal("compression: r1 phi-interval must be [phi2;phi3]")
    # cyclic order theta1 < theta2 < theta3 < theta4 and same for phi
    for a, b, c, dd in ((t1, t2, t3, t4), (p1, p2, p3, p4)):
        x2, x3, x4 = (b - a) % 1, (c - a) % 1, (dd - a) % 1
        if not 0 < x2 < x3 < x4:
            raise MoveIllegal("compression: coordinates not in cyclic order")
    return (t1, t2, t3, t4), (p1, p2, p3, p4)


def _check_compression(d, eps, m, forward):
    if forward:
        quad = m.removed
        pair = m.added_rects()
        pair_eps = dict(m.added)
        quad_eps = {r: eps[r] for r in quad}
    else:
        quad = m.added_rects()
        pair = m.removed
        quad_eps = dict(m.added)
        pair_eps = {r: eps[r] for r in pair}
    if len(quad) != 4 or len(pair) != 2:
        raise MoveIllegal("compression: needs four and two labelled rectangles")
    (t1, t2, t3, t4), (p1, p2, p3, p4) = _compression_pattern(quad)
    want_rp = Rect.of(t1, t4, p2, p3)
    want_rpp = Rect.of(t2, t3, p1, p4)
    if tuple(pair) != (want_rp, want_rpp):
        raise MoveIllegal("compression: added pair must be [t1;t4]x[p2;p3], [t2;t3]x[p1;p4]")
    r1, r2, r3, r4 = quad
    if not (quad_eps[r1] == quad_eps[r4] == pair_eps[want_rp]):
        raise MoveIllegal("compression: eps(r') must equal eps(r1) = eps(r4)")
    if not (quad_eps[r2] == quad_eps[r3] == pair_eps[want_rpp]):
        raise MoveIllegal("compression: eps(r'') must equal eps(r2) = eps(r3)")
    # the middle window must be vertex free in the ambient diagram (minus
    # the rectangles being replaced, which have corners on its boundary)
    window_t = Interval(t2, t3)
    window_p = Interval(p2, p3)
    for r in d.rects:
        for c in r.corners():
            if _strict_between(window_t, c[0]) and _strict_between(window_p, c[1]):
                raise MoveIllegal("compression: a diagram vertex lies in the open window")
    return m.sign


def _wrinkle_site(d: SurfaceDiagram, r0: Rect, axis: str):
    """Validate the macro-move preconditions at r0 and collect the side
    rectangles r1..rm.  Returns (involved, companions)."""
    if axis == "horizontal":
        dT = SurfaceDiagram(tuple(r.transposed() for r in d.rects))
        inv, comp = _wrinkle_site(dT, r0.transposed(), "vertical")
        return [r.transposed() for r in inv], [r.transposed() for r in comp]
    if boundary(d):
        raise PreconditionFailed("wrinkle: diagram has nonempty boundary")
    t1, t2 = r0.theta1, r0.theta2
    band = Interval(t1, t2)
    for x in d.occupied_thetas():
        if _strict_between(band, x):
            raise PreconditionFailed("wrinkle: an occupied meridian crosses the band")
    involved = []
    companions = []
    for r in d.rects:
        if r == r0:
            continue
        if {r.theta1, r.theta2} & {t1, t2}:
            involved.append(r)
            if r.theta == r0.theta:
                companions.append(r)
    return involved, companions


def wrinkle_region(d: SurfaceDiagram, r0: Rect, axis: str = "vertical") -> list[Rect]:
    """The closure of the mod-2 region swept by the band annulus and the
    rectangles attached to its two boundary meridians, decomposed into
    maximal rectangles with disjoint interiors."""
    if axis == "horizontal":
        dT = SurfaceDiagram(tuple(r.transposed() for r in d.rects))
        return [r.transposed() for r in wrinkle_region(dT, r0.transposed(), "vertical")]
    involved, _ = _wrinkle_site(d, r0, "vertical")
    rects = [r0] + involved
    tpts, ppts = _all_coords([rects])
    tindex = {v: i for i, v in enumerate(tpts)}
    pindex = {v: j for j, v in enumerate(ppts)}

    def gap_cells(index, lo, hi):
        # gap cell i sits between grid points i and i+1; an arc between two
        # grid points covers the cyclic run of cells from its lo to its hi
        n = len(index)
        mask = [False] * n
        i = index[lo]
        while i != index[hi]:
            mask[i] = True
            i = (i + 1) % n
        return mask

    band_t = gap_cells(tindex, r0.theta1, r0.theta2)
    parity = [[int(b)] * len(ppts) for b in band_t]
    for r in rects:
        tm = gap_cells(tindex, r.theta1, r.theta2)
        pm = gap_cells(pindex, r.phi1, r.phi2)
        for i in range(len(tpts)):
            if tm[i]:
                row = parity[i]
                for j in range(len(ppts)):
                    if pm[j]:
                        row[j] += 1
    occ = {
        (i, j): parity[i][j] % 2 == 1
        for i in range(len(tpts))
        for j in range(len(ppts))
    }
    return rects_from_cells(tpts, ppts, occ)


def _check_wrinkle_like(d, eps, m, kind):
    """WrinkleReduce and GenCompression share their skeleton; they differ
    in the companion count and in which complementary rectangles are
    forbidden."""
    axis, r0 = m.aux
    involved, companions = _wrinkle_site(d, r0, axis)
    if kind == "WrinkleReduce":
        if companions:
            raise PreconditionFailed("wrinkle: band rectangle has a companion")
        comp_rect = Rect(
            Interval(r0.theta2, r0.theta1), Interval(r0.phi2, r0.phi1)
        ) if axis == "vertical" else Rect(
            Interval(r0.theta2, r0.theta1), Interval(r0.phi2, r0.phi1)
        )
        if comp_rect in d.rects:
            raise PreconditionFailed("wrinkle: complementary rectangle present")
    else:  # GenCompression
        if not companions:
            raise PreconditionFailed("compression: band rectangle has no companion")
        if axis == "vertical":
            bad = [
                r
                for r in d.rects
                if r.theta == Interval(r0.theta2, r0.theta1)
            ]
        else:
            bad = [r for r in d.rects if r.phi == Interval(r0.phi2, r0.phi1)]
        if bad:
            raise PreconditionFailed(
                "compression: a complementary-band rectangle is present"
            )
    want_removed = {r0} | set(involved)
    if set(m.removed) != want_removed:
        raise MoveIllegal("wrinkle: removed set must be the band and its side rectangles")
    region = wrinkle_region(d, r0, axis)
    if set(m.added_rects()) != set(region):
        raise MoveIllegal("wrinkle: added set must be the parity region decomposition")
    mcount = len(involved)
    k = len(companions)
    want = mcount - 1 - 2 * k if kind == "GenCompression" else mcount - 1
    if len(region) != want:
        raise AmbiguousRegion(
            f"wrinkle region has {len(region)} rectangles, expected {want}"
        )
    return m.sign


# ---------------------------------------------------------------------------
# apply / classify


def _forward_kind(kind):
    return {
        "WrinkleCreate": "WrinkleReduce",
        "CompressionInverse": "Compression",
        "GenCompressionInverse": "GenCompression",
        "SphereInsert": "SphereRemove",
    }.get(kind)


def _swap(d: SurfaceDiagram, eps: dict, m: Move):
    removed = set(m.removed)
    if not removed <= set(d.rects):
        raise MoveIllegal("removed rectangles not all present in the diagram")
    added = m.added_rects()
    if any(r in d.rects for r in added):
        raise MoveIllegal("added rectangle already present in the diagram")
    if len(set(added)) != len(added):
        raise MoveIllegal("resulting diagram invalid: duplicate added rectangle")
    kept = tuple(r for r in d.rects if r not in removed)
    # kept pairs were already pairwise compatible in d, so only pairs that
    # involve an added rectangle need checking
    for i, r1 in enumerate(added):
        for r2 in kept + added[i + 1 :]:
            if not compatible(r1, r2):
                raise MoveIllegal(
                    f"resulting diagram invalid: incompatible pair {r1}, {r2}"
                )
    nd = SurfaceDiagram(tuple(sorted(kept + added)))
    neps = {r: s for r, s in eps.items() if r not in removed}
    neps.update(dict(m.added))
    check_orientation(nd, neps)
    return nd, neps


def apply_move(d: SurfaceDiagram, eps: dict, m: Move):
    """Validate every clause of m's definition on (d, eps), perform it and
    return (diagram, eps, inverse move)."""
    if m.kind in ("BubbleCreate", "BubbleReduce"):
        sign = _check_bubble(d, eps, m, creating=m.kind == "BubbleCreate")
    elif m.kind == "Flype":
        sign = _check_flype(d, eps, m)
    elif m.kind in ("SphereRemove", "SphereInsert"):
        sign = _check_sphere(d, eps, m, removing=m.kind == "SphereRemove")
    elif m.kind in ("Compression", "CompressionInverse"):
        sign = _check_compression(d, eps, m, forward=m.kind == "Compression")
    elif m.kind in ("WrinkleReduce", "GenCompression"):
        sign = _check_wrinkle_like(d, eps, m, m.kind)
    elif m.kind in ("WrinkleCreate", "GenCompressionInverse"):
        nd, neps = _swap(d, eps, m)
        back = Move(
            _forward_kind(m.kind),
            removed=m.added_rects(),
            added=tuple((r, eps[r]) for r in m.removed),
            aux=m.aux,
            sign=None if m.sign is None else -m.sign,
        )
        _check_wrinkle_like(nd, neps, back, back.kind)
        return nd, neps, replace(back, sign=None if m.sign is None else -m.sign)
    else:
        raise MoveIllegal(f"unknown move kind {m.kind}")
    if m.sign is not None and sign is not None and m.sign != sign:
        raise MoveIllegal(f"declared sign {m.sign} contradicts classification {sign}")
    nd, neps = _swap(d, eps, m)
    inv = Move(
        INVERSE_KIND[m.kind],
        removed=m.added_rects(),
        added=tuple((r, eps[r]) for r in m.removed),
        aux=tuple(reversed(m.aux)) if m.kind == "Flype" else m.aux,
        sign=None if sign is None else -sign,
    )
    if m.kind == "Flype":
        # the inverse flype relabels: primed side becomes r1..r4 in reversed
        # role order (r4' overlays r1', so r4' plays the new r1)
        inv_sign = 1 if dict(m.added)[m.added[3][0]] == -1 else -1
        inv = Move(
            "Flype",
            removed=tuple(reversed(m.added_rects())),
            added=tuple((r, eps[r]) for r in reversed(m.removed)),
            aux=(m.aux[1], m.aux[0]),
            sign=inv_sign,
        )
    return nd, neps, inv


def _leap_delta(rects):
    coords = sorted(
        {x for r in rects for x in (r.theta1, r.theta2)}
        | {x for r in rects for x in (r.phi1, r.phi2)}
    )
    gaps = [(b - a) % 1 for a, b in zip(coords, coords[1:] + coords[:1]) if a != b]
    gaps = [g for g in gaps if g > 0]
    return (min(gaps) if gaps else F(1)) / 4


def leap_sign(removed_eps: dict, added_eps: dict) -> int:
    """Combinatorial leap test: the side whose positive push collides with
    the other is the lower one; the move is positive iff the removed side
    is lower."""
    D = SurfaceDiagram(tuple(removed_eps))
    Dp = SurfaceDiagram(tuple(added_eps))
    delta = _leap_delta(list(removed_eps) + list(added_eps))
    pushD, _ = perturb(D, removed_eps, delta)
    pushDp, _ = perturb(Dp, added_eps, delta)
    d_hits = any(not compatible(x, y) for x in pushD.rects for y in Dp.rects)
    dp_hits = any(not compatible(x, y) for x in pushDp.rects for y in D.rects)
    if d_hits and not dp_hits:
        return 1
    if dp_hits and not d_hits:
        return -1
    raise UnclassifiableLeap(f"push tests agree (D hits: {d_hits})")


def classify_sign(d: SurfaceDiagram, eps: dict, m: Move) -> int:
    """Definitional sign for bubble moves and flypes; leap test otherwise."""
    if m.kind in ("BubbleCreate", "BubbleReduce"):
        return _check_bubble(d, eps, m, creating=m.kind == "BubbleCreate")
    if m.kind == "Flype":
        return _check_flype(d, eps, m)
    if m.kind in ("SphereRemove", "SphereInsert"):
        if m.sign is None:
            raise UnclassifiableLeap("sphere moves carry an externally chosen sign")
        return m.sign
    removed_eps = {r: eps[r] for r in m.removed}
    added_eps = dict(m.added)
    return leap_sign(removed_eps, added_eps)


# ---------------------------------------------------------------------------
# move builders


def bubble_create_move(d, eps, r: Rect, cut_lo, cut_hi, axis: str = "vertical") -> Move:
    """Split r along the annulus between the two cut lines."""
    cut_lo, cut_hi = mod1(cut_lo), mod1(cut_hi)
    if axis == "vertical":
        r1 = Rect(Interval(r.theta1, cut_lo), r.phi)
        r2 = Rect(Interval(cut_hi, r.theta2), r.phi)
        r3 = Rect(Interval(cut_lo, cut_hi), Interval(r.phi2, r.phi1))
    else:
        r1 = Rect(r.theta, Interval(r.phi1, cut_lo))
        r2 = Rect(r.theta, Interval(cut_hi, r.phi2))
        r3 = Rect(Interval(r.theta2, r.theta1), Interval(cut_lo, cut_hi))
    e = eps[r]
    return Move("BubbleCreate", (r,), ((r1, e), (r2, e), (r3, -e)))


def bubble_reduce_move(d, eps, trio) -> Move:
    """Merge a side/side/complement triple back into one rectangle."""
    trio = tuple(trio)
    for transpose in (False, True):
        T = [s.transposed() for s in trio] if transpose else list(trio)
        for mid_i in range(3):
            r3 = T[mid_i]
            sides = [T[j] for j in range(3) if j != mid_i]
            for s1, s2 in (sides, sides[::-1]):
                if s1.phi != s2.phi:
                    continue
                if (s1.phi1, s1.phi2) != (r3.phi2, r3.phi1):
                    continue
                if s1.theta2 != r3.theta1 or s2.theta1 != r3.theta2:
                    continue
                if s1.theta1 == s2.theta2:
                    continue
                merged = Rect(Interval(s1.theta1, s2.theta2), s1.phi)
                if transpose:
                    merged = merged.transposed()
                e = eps[trio[0] if T[0] is not r3 else trio[1]]
                return Move("BubbleReduce", trio, ((merged, e),))
    raise MoveIllegal("bubble: triple does not merge into one rectangle")


def _corner_map(d: SurfaceDiagram):
    """corner point -> list of (rect, corner name)."""
    out = defaultdict(list)
    for r in d.rects:
        out[r.bl].append((r, "bl"))
        out[r.br].append((r, "br"))
        out[r.tl].append((r, "tl"))
        out[r.tr].append((r, "tr"))
    return out


def _rect_with_corner(cmap, pt, name, exclude=()):
    for r, nm in cmap.get(pt, ()):
        if nm == name and r not in exclude:
            return r
    return None


def family_flype_move(d, eps, f1, f2, f3, f4) -> Move:
    """The flype whose chain is f1 = [a;t1]x[b;p1], f2 = [t1;t2]x[p1;p2],
    f3 = [t2;c]x[dd;p1], f4 = [g;t2]x[h;dd] with f1 overlaying f4; the
    primed side is forced by the region-equality conditions."""
    a, t1 = f1.theta1, f1.theta2
    t2, c = f3.theta1, f3.theta2
    g = f4.theta1
    b, p1 = f1.phi1, f1.phi2
    p2 = f2.phi2
    dd, h = f3.phi1, f4.phi1
    r1p = Rect.of(a, c, dd, p1)
    r2p = Rect.of(g, a, h, dd)
    r3p = Rect.of(a, t1, b, h)
    r4p = Rect.of(t1, t2, h, p2)
    r_star = Rect.of(t1, t2, dd, p1)
    r_star_p = Rect.of(a, t1, h, dd)
    return Move(
        "Flype",
        (f1, f2, f3, f4),
        ((r1p, eps[f1]), (r2p, eps[f2]), (r3p, eps[f3]), (r4p, eps[f4])),
        aux=(r_star, r_star_p),
    )


def _conjugated(rect_fn, d, eps):
    nd = SurfaceDiagram(tuple(rect_fn(r) for r in d.rects))
    neps = {rect_fn(r): s for r, s in eps.items()}
    return nd, neps


def _conjugate_move(m: Move, rect_fn) -> Move:
    return Move(
        m.kind,
        tuple(rect_fn(r) for r in m.removed),
        tuple((rect_fn(r), s) for r, s in m.added),
        aux=tuple(rect_fn(r) for r in m.aux),
        sign=m.sign,
    )


_SYMMETRIES = (
    (lambda r: r, lambda r: r),
    (_mirror_theta, _mirror_theta),
    (_mirror_phi, _mirror_phi),
    (lambda r: _mirror_theta(_mirror_phi(r)), lambda r: _mirror_theta(_mirror_phi(r))),
    (Rect.transposed, Rect.transposed),
    (lambda r: _mirror_theta(r.transposed()), lambda r: _mirror_theta(r).transposed()),
    (lambda r: _mirror_phi(r.transposed()), lambda r: _mirror_phi(r).transposed()),
    (
        lambda r: _mirror_theta(_mirror_phi(r.transposed())),
        lambda r: _mirror_theta(_mirror_phi(r)).transposed(),
    ),
)


def _try_move(d, eps, m):
    try:
        return apply_move(d, eps, m)
    except (ValueError, KeyError):
        return None


def _family_chains(d):
    """Chains (f1, f2, f3, f4) matching the standard flype shape, for the
    diagram as given (callers conjugate by symmetries)."""
    cmap = _corner_map(d)
    out = []
    for f2 in d.rects:
        f1 = _rect_with_corner(cmap, f2.bl, "tr", (f2,))
        f3 = _rect_with_corner(cmap, f2.br, "tl", (f2,))
        if f1 is None or f3 is None:
            continue
        f4 = _rect_with_corner(cmap, f3.bl, "tr", (f2, f1, f3))
        if f4 is None or len({f1, f2, f3, f4}) != 4:
            continue
        try:
            if not (crossing(f1, f4) and overlays(f1, f4)):
                continue
        except ValueError:
            continue
        out.append((f1, f2, f3, f4))
    return out


def _flype_relabel(m: Move) -> Move:
    """Same flype site with the chain read in the opposite order (the
    labelling with r1 overlaying r4 is the valid one)."""
    return Move(
        "Flype",
        tuple(reversed(m.removed)),
        tuple(reversed(m.added)),
        aux=m.aux,
        sign=None,
    )


def flype_sites(d, eps):
    """All flype moves whose chain matches the standard shape in some
    symmetry of the torus."""
    seen = set()
    moves = []
    for fwd, back in _SYMMETRIES:
        cd, ceps = _conjugated(fwd, d, eps)
        for chain in _family_chains(cd):
            try:
                cm = family_flype_move(cd, ceps, *chain)
            except ValueError:
                continue
            base = _conjugate_move(cm, back)
            key = (frozenset(base.removed), frozenset(base.added_rects()))
            if key in seen:
                continue
            for m in (base, _flype_relabel(base)):
                res = _try_move(d, eps, m)
                if res is not None:
                    seen.add(key)
                    moves.append(replace(m, sign=_check_flype(d, eps, m)))
                    break
    return moves


def _bubble_reduce_sites(d, eps):
    moves = []
    by_phi = defaultdict(list)
    by_theta = defaultdict(list)
    for r in d.rects:
        by_phi[(r.phi1, r.phi2)].append(r)
        by_theta[(r.theta1, r.theta2)].append(r)
    seen = set()
    for group, transpose in ((by_phi, False), (by_theta, True)):
        for rs in group.values():
            for s1 in rs:
                for s2 in rs:
                    if s1 is s2:
                        continue
                    if not transpose:
                        if s1.theta2 == s2.theta1 or s1.theta1 == s2.theta2:
                            continue
                        mid = Rect(
                            Interval(s1.theta2, s2.theta1),
                            Interval(s1.phi2, s1.phi1),
                        )
                    else:
                        if s1.phi2 == s2.phi1 or s1.phi1 == s2.phi2:
                            continue
                        mid = Rect(
                            Interval(s1.theta2, s1.theta1),
                            Interval(s1.phi2, s2.phi1),
                        )
                    if mid not in d.rects:
                        continue
                    trio = (s1, s2, mid)
                    key = frozenset(trio)
                    if key in seen:
                        continue
                    seen.add(key)
                    try:
                        m = bubble_reduce_move(d, eps, trio)
                    except MoveIllegal:
                        continue
                    res = _try_move(d, eps, m)
                    if res is not None:
                        moves.append(replace(m, sign=classify_sign(d, eps, m)))
    return moves


def _bubble_create_sites(d, eps):
    """Creations anchored at circular midpoints of the free bands inside
    each rectangle (a bounded, canonical choice of cut lines)."""
    from .circle import circular_midpoint

    moves = []
    for r in d.rects:
        for axis in ("vertical", "horizontal"):
            iv = r.theta if axis == "vertical" else r.phi
            occ = sorted(
                d.occupied_thetas() if axis == "vertical" else d.occupied_phis()
            )
            inside = sorted(
                ((x - iv.lo) % 1, x) for x in occ if interval_contains(iv, x, "open")
            )
            stops = [iv.lo] + [x for _, x in inside] + [iv.hi]
            for lo, hi in zip(stops, stops[1:]):
                if lo == hi:
                    continue
                width = (hi - lo) % 1
                cut_lo = mod1(lo + width / 3)
                cut_hi = mod1(lo + 2 * width / 3)
                m = bubble_create_move(d, eps, r, cut_lo, cut_hi, axis)
                res = _try_move(d, eps, m)
                if res is not None:
                    moves.append(replace(m, sign=classify_sign(d, eps, m)))
    return moves


def _compression_sites(d, eps):
    moves = []
    by_theta = defaultdict(list)
    for r in d.rects:
        by_theta[(r.theta1, r.theta2)].append(r)
    seen = set()
    for rs in by_theta.values():
        for r2 in rs:
            for r3 in rs:
                if r2 is r3:
                    continue
                p2, p3 = r2.phi2, r3.phi1
                if p2 == p3:
                    continue
                t2, t3 = r2.theta1, r2.theta2
                cands1 = [
                    r
                    for r in d.rects
                    if r.theta2 == t2 and (r.phi1, r.phi2) == (p2, p3)
                ]
                cands4 = [
                    r
                    for r in d.rects
                    if r.theta1 == t3 and (r.phi1, r.phi2) == (p2, p3)
                ]
                for r1 in cands1:
                    for r4 in cands4:
                        if len({r1, r2, r3, r4}) != 4:
                            continue
                        key = (r1, r2, r3, r4)
                        if key in seen:
                            continue
                        seen.add(key)
                        rp = Rect(Interval(r1.theta1, r4.theta2), r1.phi)
                        rpp = Rect(r2.theta, Interval(r2.phi1, r3.phi2))
                        m = Move(
                            "Compression",
                            (r1, r2, r3, r4),
                            ((rp, eps[r1]), (rpp, eps[r2])),
                        )
                        res = _try_move(d, eps, m)
                        if res is not None:
                            try:
                                sign = classify_sign(d, eps, m)
                            except UnclassifiableLeap:
                                sign = None
                            moves.append(replace(m, sign=sign))
    return moves


def _compression_inverse_sites(d, eps):
    moves = []
    for rp in d.rects:
        for rpp in d.rects:
            if rp is rpp:
                continue
            try:
                if not (crossing(rp, rpp) and overlays(rpp, rp)):
                    continue
            except ValueError:
                continue
            t1, t4 = rp.theta1, rp.theta2
            t2, t3 = rpp.theta1, rpp.theta2
            p1, p4 = rpp.phi1, rpp.phi2
            p2, p3 = rp.phi1, rp.phi2
            quad = (
                Rect.of(t1, t2, p2, p3),
                Rect.of(t2, t3, p1, p2),
                Rect.of(t2, t3, p3, p4),
                Rect.of(t3, t4, p2, p3),
            )
            m = Move(
                "CompressionInverse",
                (rp, rpp),
                tuple(
                    (q, e)
                    for q, e in zip(quad, (eps[rp], eps[rpp], eps[rpp], eps[rp]))
                ),
            )
            res = _try_move(d, eps, m)
            if res is not None:
                try:
                    sign = classify_sign(d, eps, m)
                except UnclassifiableLeap:
                    sign = None
                moves.append(replace(m, sign=sign))
    return moves


def wrinkle_move(d, eps, r0: Rect, axis: str) -> Move:
    """Build the macro move (WrinkleReduce or GenCompression) at r0."""
    involved, companions = _wrinkle_site(d, r0, axis)
    kind = "GenCompression" if companions else "WrinkleReduce"
    region = wrinkle_region(d, r0, axis)
    removed = (r0,) + tuple(involved)
    kept = {r: eps[r] for r in d.rects if r not in set(removed)}
    nd = SurfaceDiagram(tuple(kept) + tuple(region))
    neps = extend_orientation(nd, kept)
    return Move(kind, removed, tuple((r, neps[r]) for r in region), aux=(axis, r0))


def _macro_sites(d, eps, kind):
    moves = []
    for r0 in d.rects:
        for axis in ("vertical", "horizontal"):
            try:
                m = wrinkle_move(d, eps, r0, axis)
            except (ValueError, KeyError):
                continue
            if m.kind != kind:
                continue
            res = _try_move(d, eps, m)
            if res is not None:
                try:
                    sign = classify_sign(d, eps, m)
                except UnclassifiableLeap:
                    sign = None
                moves.append(replace(m, sign=sign))
    return moves


def _sphere_remove_sites(d, eps):
    moves = []
    comps = connected_components(d)
    if len(comps) < 2:
        return moves
    for comp in comps:
        m = Move("SphereRemove", tuple(comp.rects), ())
        res = _try_move(d, eps, m)
        if res is not None:
            moves.append(m)
    return moves


ALL_FINDABLE = (
    "BubbleCreate",
    "BubbleReduce",
    "Flype",
    "Compression",
    "CompressionInverse",
    "WrinkleReduce",
    "GenCompression",
    "SphereRemove",
)


def find_moves(d: SurfaceDiagram, eps: dict, kinds=None) -> list:
    """Enumerate legal move sites of the requested kinds, anchored at the
    diagram's own rectangles and lines."""
    kinds = tuple(kinds) if kinds is not None else ALL_FINDABLE
    out = []
    for kind in kinds:
        if kind == "BubbleCreate":
            out.extend(_bubble_create_sites(d, eps))
        elif kind == "BubbleReduce":
            out.extend(_bubble_reduce_sites(d, eps))
        elif kind == "Flype":
            out.extend(flype_sites(d, eps))
        elif kind == "Compression":
            out.extend(_compression_sites(d, eps))
        elif kind == "CompressionInverse":
            out.extend(_compression_inverse_sites(d, eps))
        elif kind in ("WrinkleReduce", "GenCompression"):
            out.extend(_macro_sites(d, eps, kind))
        elif kind == "SphereRemove":
            out.extend(_sphere_remove_sites(d, eps))
        else:
            raise ValueError(f"cannot enumerate sites of kind {kind}")
    return out


# ---------------------------------------------------------------------------
# macro move decompositions


def _transpose_move(m: Move) -> Move:
    """Conjugate a labelled move by the theta/phi swap, fixing up label
    order where the definitions are axis-sensitive."""
    T = Rect.transposed
    if m.kind == "Flype":
        return Move(
            "Flype",
            tuple(T(r) for r in reversed(m.removed)),
            tuple((T(r), s) for r, s in reversed(m.added)),
            aux=(T(m.aux[0]), T(m.aux[1])),
        )
    if m.kind in ("Compression", "CompressionInverse"):
        perm = (1, 0, 3, 2)
        if m.kind == "Compression":
            rem = tuple(T(m.removed[i]) for i in perm)
            add = ((T(m.added[1][0]), m.added[1][1]), (T(m.added[0][0]), m.added[0][1]))
        else:
            rem = (T(m.removed[1]), T(m.removed[0]))
            add = tuple((T(m.added[i][0]), m.added[i][1]) for i in perm)
        return Move(m.kind, rem, add)
    aux = m.aux
    if aux and aux[0] in ("vertical", "horizontal"):
        aux = ("horizontal" if aux[0] == "vertical" else "vertical", T(aux[1]))
    else:
        aux = tuple(T(r) for r in aux)
    return Move(
        m.kind,
        tuple(T(r) for r in m.removed),
        tuple((T(r), s) for r, s in m.added),
        aux=aux,
        sign=m.sign,
    )


def _relabel_compression(m: Move) -> Move:
    """Recover the canonical (r1, r2, r3, r4) labelling from the sets."""
    rects = list(m.removed)
    pair = None
    for i in range(4):
        for j in range(i + 1, 4):
            if rects[i].theta == rects[j].theta:
                pair = (rects[i], rects[j])
    if pair is None:
        raise MoveIllegal("compression: no theta-companion pair among the four")
    t2, t3 = pair[0].theta1, pair[0].theta2
    others = [r for r in rects if r not in pair]
    r1 = next((r for r in others if r.theta2 == t2), None)
    r4 = next((r for r in others if r.theta1 == t3), None)
    if r1 is None or r4 is None:
        raise MoveIllegal("compression: side rectangles do not abut the pair")
    r2 = next((r for r in pair if r.phi2 == r1.phi1), None)
    r3 = next((r for r in pair if r.phi1 == r1.phi2), None)
    if r2 is None or r3 is None or r2 is r3:
        raise MoveIllegal("compression: companion pair does not frame the window")
    added = dict(m.added)
    rp = next((r for r in added if r.phi == r1.phi), None)
    rpp = next((r for r in added if r.theta == r2.theta), None)
    if rp is None or rpp is None or rp is rpp:
        raise MoveIllegal("compression: added pair does not match the pattern")
    return Move(
        m.kind,
        (r1, r2, r3, r4),
        ((rp, added[rp]), (rpp, added[rpp])),
        aux=m.aux,
        sign=m.sign,
    )


def _decompose_steps(d, eps, r0, axis):
    """Elementary scripts for wrinkle reductions and generalized
    compressions: peel chains at the band until a bubble reduction ends it."""
    if axis == "horizontal":
        cd, ceps = _conjugated(Rect.transposed, d, eps)
        steps = _decompose_steps(cd, ceps, r0.transposed(), "vertical")
        return [_transpose_move(s) for s in steps]
    script = []
    cur_d, cur_eps, cur_r0 = d, eps, r0
    guard = 0
    while True:
        guard += 1
        if guard > 1000:
            raise AmbiguousRegion("wrinkle decomposition does not terminate")
        involved, companions = _wrinkle_site(cur_d, cur_r0, "vertical")
        if len(involved) == 2 and not companions:
            region = wrinkle_region(cur_d, cur_r0, "vertical")
            if len(region) != 1:
                raise AmbiguousRegion("base case region is not one rectangle")
            m = Move(
                "BubbleReduce",
                (cur_r0,) + tuple(involved),
                ((region[0], -cur_eps[cur_r0]),),
            )
            script.append(m)
            return script
        step = _peel_step(cur_d, cur_eps, cur_r0)
        if step is None:
            raise AmbiguousRegion("no chain matches at the wrinkle band")
        m, new_r0 = step
        cur_d, cur_eps, _ = apply_move(cur_d, cur_eps, m)
        script.append(m)
        cur_r0 = new_r0


def _peel_step(d, eps, r0):
    """One induction step at the band: an ordinary compression when the
    chain closes onto a companion, otherwise a flype; tried in all four
    reflections of the torus."""
    for fwd, back in (
        (lambda r: r, lambda r: r),
        (_mirror_theta, _mirror_theta),
        (_mirror_phi, _mirror_phi),
        (
            lambda r: _mirror_theta(_mirror_phi(r)),
            lambda r: _mirror_theta(_mirror_phi(r)),
        ),
    ):
        cd, ceps = _conjugated(fwd, d, eps)
        cr0 = fwd(r0)
        cmap = _corner_map(cd)
        c1 = _rect_with_corner(cmap, cr0.bl, "tr", (cr0,))
        c2 = _rect_with_corner(cmap, cr0.br, "tl", (cr0,))
        if c1 is None or c2 is None:
            continue
        c3 = _rect_with_corner(cmap, c1.br, "tl", (cr0, c1, c2))
        c4 = _rect_with_corner(cmap, c2.bl, "tr", (cr0, c1, c2))
        if c3 is not None and c3 is c4:
            # companion below the band: ordinary compression merges them
            quad = (c1, c3, cr0, c2)
            rp = Rect(Interval(c1.theta1, c2.theta2), c1.phi)
            rpp = Rect(cr0.theta, Interval(c3.phi1, cr0.phi2))
            m = Move(
                "Compression",
                quad,
                ((rp, ceps[c1]), (rpp, ceps[c3])),
            )
            if _try_move(cd, ceps, m) is not None:
                mb = _relabel_compression(_conjugate_move(m, back))
                return replace(mb, sign=None), back(rpp)
        for chain in (
            (c1, cr0, c2, c4),  # r1 overlays r4
        ):
            f1, f2, f3, f4 = chain
            if f4 is None:
                continue
            try:
                if not (crossing(f1, f4) and overlays(f1, f4)):
                    continue
                m = family_flype_move(cd, ceps, f1, f2, f3, f4)
            except ValueError:
                continue
            if _try_move(cd, ceps, m) is not None:
                new_band = m.added_rects()[3]
                return _conjugate_move(m, back), back(new_band)
    return None


def _with_signs(d, eps, steps):
    out = []
    for m in steps:
        try:
            m = replace(m, sign=classify_sign(d, eps, m))
        except UnclassifiableLeap:
            pass
        d, eps, _ = apply_move(d, eps, m)
        out.append(m)
    return tuple(out)


def decompose_wrinkle(d: SurfaceDiagram, eps: dict, m: Move) -> MoveScript:
    """(m-2)/2 flypes followed by one bubble reduction replaying the
    wrinkle reduction."""
    if m.kind != "WrinkleReduce":
        raise MoveIllegal("decompose_wrinkle expects a WrinkleReduce move")
    axis, r0 = m.aux
    return MoveScript(_with_signs(d, eps, _decompose_steps(d, eps, r0, axis)))


def decompose_gen_compression(d: SurfaceDiagram, eps: dict, m: Move) -> MoveScript:
    """Flypes, one ordinary compression per companion, and a final bubble
    reduction replaying the generalized compression."""
    if m.kind != "GenCompression":
        raise MoveIllegal("decompose_gen_compression expects a GenCompression move")
    axis, r0 = m.aux
    return MoveScript(_with_signs(d, eps, _decompose_steps(d, eps, r0, axis)))


def replay(d: SurfaceDiagram, eps: dict, script: MoveScript):
    for m in script:
        d, eps, _ = apply_move(d, eps, m)
    return d, eps
