"""Packs of rectangles, their corner arcs, and diagrams of foliations.

A pack is a one-parameter family of rectangles r(t) = [theta1(t); theta2(t)]
x [phi1(t); phi2(t)] with theta1, phi2 strictly increasing and theta2, phi1
strictly decreasing (for a positive pack; a negative pack runs the family
backwards).  The four corner trajectories are "sloped arcs" -- graphs of
strictly monotone functions -- and any three of them determine the fourth.
Corner arcs are piecewise linear with rational breakpoints, so every check
here is exact.

A foliation diagram is a finite collection of packs that are pairwise almost
compatible, whose last rectangles can be carried onto the first ones minus a
tube by positive flypes and bubble moves, and whose last rectangles contain
no closed sub-diagram.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

from .circle import (
    Interval,
    Rect,
    compatible,
    interval_intersect,
    mod1,
    rational,
    rect_intersection,
)
from .link import LinkDiagram, tube
from .surface import SurfaceDiagram, validate_surface


class ArcMismatch(ValueError):
    """Raised when sloped arcs cannot be assembled into a pack."""


class ConditionFailed(ValueError):
    """A foliation diagram condition is violated.

    code is 1, 2, 3 (the defining conditions) or "arc-identity".
    """

    def __init__(self, code, witness=None):
        self.code = code
        self.witness = witness
        super().__init__(f"foliation condition {code} failed: {witness}")


class ReconstructionAmbiguous(ValueError):
    """Raised when the maximal packs in an arc union are not well defined."""

    def __init__(self, site, reason=""):
        self.site = site
        self.reason = reason
        super().__init__(f"{reason or 'ambiguous reconstruction'} at {site}")


def _floor(q) -> int:
    return q.numerator // q.denominator


def _sign(q) -> int:
    return (q > 0) - (q < 0)


def _prune_collinear(pts):
    """Drop interior breakpoints lying on the segment through their
    neighbors."""
    pts = list(pts)
    out = [pts[0]]
    for prev, cur, nxt in zip(pts, pts[1:], pts[2:]):
        if (cur[0] - prev[0]) * (nxt[1] - cur[1]) != (cur[1] - prev[1]) * (
            nxt[0] - cur[0]
        ):
            out.append(cur)
    out.append(pts[-1])
    return tuple(out)


@dataclass(frozen=True, order=True)
class SlopedArc:
    """An oriented piecewise-linear graph of a strictly monotone function.

    Breakpoints are stored as rational lifts to the plane: consecutive
    points are strictly monotone in both coordinates (with a fixed
    direction per coordinate), and the total travel in each coordinate is
    below one, so the mod-1 image is a simple arc on the torus.  The lift
    is normalized so that the initial point lies in [0,1)^2.
    """

    breakpoints: tuple  # of (theta, phi) rational lifts

    def __init__(self, breakpoints):
        pts = [(rational(t), rational(p)) for t, p in breakpoints]
        if len(pts) < 2:
            raise ValueError("a sloped arc needs at least two breakpoints")
        dt = _sign(pts[1][0] - pts[0][0])
        dp = _sign(pts[1][1] - pts[0][1])
        for (t0, p0), (t1, p1) in zip(pts, pts[1:]):
            if _sign(t1 - t0) != dt or _sign(p1 - p0) != dp or dt == 0 or dp == 0:
                raise ValueError(
                    f"breakpoints not strictly monotone in both coordinates "
                    f"near ({t0},{p0})"
                )
        if abs(pts[-1][0] - pts[0][0]) >= 1 or abs(pts[-1][1] - pts[0][1]) >= 1:
            raise ValueError("arc travels a full turn in some coordinate")
        st = _floor(pts[0][0])
        sp = _floor(pts[0][1])
        pts = tuple((t - st, p - sp) for t, p in pts)
        object.__setattr__(self, "breakpoints", pts)

    @property
    def dir_theta(self) -> int:
        return _sign(self.breakpoints[1][0] - self.breakpoints[0][0])

    @property
    def dir_phi(self) -> int:
        return _sign(self.breakpoints[1][1] - self.breakpoints[0][1])

    @property
    def slope_sign(self) -> int:
        """+1 for an increasing graph, -1 for a decreasing one."""
        return self.dir_theta * self.dir_phi

    @property
    def start(self):
        t, p = self.breakpoints[0]
        return (mod1(t), mod1(p))

    @property
    def end(self):
        t, p = self.breakpoints[-1]
        return (mod1(t), mod1(p))

    def reversed(self) -> "SlopedArc":
        return SlopedArc(tuple(reversed(self.breakpoints)))

    def pruned(self) -> "SlopedArc":
        return SlopedArc(_prune_collinear(self.breakpoints))

    def theta_domain(self) -> Interval:
        """The theta-projection of the arc as a circle arc (CCW)."""
        a = mod1(self.breakpoints[0][0])
        b = mod1(self.breakpoints[-1][0])
        return Interval(a, b) if self.dir_theta > 0 else Interval(b, a)

    def segments(self):
        return tuple(zip(self.breakpoints, self.breakpoints[1:]))

    def __repr__(self) -> str:
        pts = ",".join(f"({t},{p})" for t, p in self.breakpoints)
        return f"SlopedArc[{pts}]"


def _interp(pairs, a):
    """Value of the monotone PL correspondence at parameter a (exact)."""
    for (a0, b0), (a1, b1) in zip(pairs, pairs[1:]):
        lo, hi = (a0, a1) if a0 <= a1 else (a1, a0)
        if lo <= a <= hi:
            return b0 + (a - a0) * (b1 - b0) / (a1 - a0)
    raise ArcMismatch(f"parameter {a} outside correspondence range")


def _compose(c1, c2):
    """Compose monotone correspondences A->B and B->C into A->C.

    Both are breakpoint pair lists in pack order; their B-ranges must
    coincide (same endpoints, same direction).
    """
    b1 = [b for _, b in c1]
    b2 = [b for b, _ in c2]
    if b1[0] != b2[0] or b1[-1] != b2[-1]:
        raise ArcMismatch(
            f"corner arcs disagree on a shared coordinate range: "
            f"[{b1[0]};{b1[-1]}] vs [{b2[0]};{b2[-1]}]"
        )
    d = _sign(b1[-1] - b1[0])
    if _sign(b2[-1] - b2[0]) != d:
        raise ArcMismatch("corner arcs traverse a shared coordinate oppositely")
    merged = sorted(set(b1) | set(b2))
    if d < 0:
        merged.reverse()
    return [(_interp([(b, a) for a, b in c1], b), _interp(c2, b)) for b in merged]


# corner role -> (theta coordinate, phi coordinate) of the family
_ROLE_COORDS = {
    "bl": ("t1", "p1"),
    "br": ("t2", "p1"),
    "tl": ("t1", "p2"),
    "tr": ("t2", "p2"),
}


def _corner(r: Rect, role: str):
    return {"bl": r.bl, "br": r.br, "tl": r.tl, "tr": r.tr}[role]


def _contains_arc(a: Interval, b: Interval) -> bool:
    return (b.lo - a.lo) % 1 + b.length <= a.length


def _bounding_interval(a: Interval, b: Interval) -> Interval:
    """The minimal circle arc containing two overlapping arcs."""
    if _contains_arc(a, b):
        return a
    if _contains_arc(b, a):
        return b
    sa = (b.lo - a.lo) % 1 <= a.length  # b starts inside a
    sb = (a.lo - b.lo) % 1 <= b.length
    if sa and sb:
        raise ArcMismatch("first and last rectangles span a full circle")
    if sa:
        return Interval(a.lo, b.hi)
    if sb:
        return Interval(b.lo, a.hi)
    raise ArcMismatch("coordinate arcs of first and last rectangles are disjoint")


def _never_equal_mod1(xs, ys):
    """None if the PL functions xs, ys (same grid) never agree mod 1;
    otherwise the grid index of a witness."""
    prev = None
    for i, (x, y) in enumerate(zip(xs, ys)):
        d = y - x
        if d % 1 == 0:
            return i
        if prev is not None:
            lo, hi = (prev, d) if prev <= d else (d, prev)
            if _floor(lo) + 1 < hi:
                return i
        prev = d
    return None


def _validated_family(first: Rect, last: Rect, roles: dict):
    """Build the four coordinate functions of the family from the given
    corner arcs (a dict role -> SlopedArc with three entries).

    Returns (cols, sign) where cols maps "t1"/"t2"/"p1"/"p2" to the list
    of lift values on the common parameter grid (pack order, first to
    last) and sign is +1 when theta1 increases along the family.
    Raises ArcMismatch when the proposition hypotheses fail.
    """
    if first == last:
        raise ArcMismatch("first and last rectangles coincide")
    if not compatible(first, last) or rect_intersection(first, last).kind != "rect":
        raise ArcMismatch(
            "first and last rectangles must be compatible with a rectangle "
            "intersection"
        )
    hull = Rect(
        _bounding_interval(first.theta, last.theta),
        _bounding_interval(first.phi, last.phi),
    )
    for role, arc in roles.items():
        if arc.start != _corner(first, role) or arc.end != _corner(last, role):
            raise ArcMismatch(
                f"{role} arc endpoints {arc.start}->{arc.end} do not match the "
                f"rectangle corners {_corner(first, role)}->{_corner(last, role)}"
            )
        for t, p in arc.breakpoints:
            if not hull.contains((mod1(t), mod1(p))):
                raise ArcMismatch(
                    f"{role} arc leaves the bounding rectangle {hull} at "
                    f"({mod1(t)},{mod1(p)})"
                )
    # propagate correspondences from theta1 through the arc edges
    edges = []
    for role, arc in roles.items():
        ct, cp = _ROLE_COORDS[role]
        pairs = list(arc.breakpoints)
        edges.append((ct, cp, pairs))
        edges.append((cp, ct, [(p, t) for t, p in pairs]))
    chains = {"t1": None}  # None encodes the identity
    frontier = ["t1"]
    while frontier:
        src = frontier.pop()
        for a, b, pairs in edges:
            if a == src and b not in chains:
                chains[b] = pairs if chains[src] is None else _compose(chains[src], pairs)
                frontier.append(b)
    if set(chains) != {"t1", "t2", "p1", "p2"}:
        raise ArcMismatch("the three corner arcs do not connect all coordinates")
    grid = set()
    for c in chains.values():
        if c is not None:
            grid.update(a for a, _ in c)
    grid.add(rational(_corner(first, "bl")[0]))
    grid = sorted(grid)
    sign = 1
    ref = next(c for c in chains.values() if c is not None)
    if _sign(ref[-1][0] - ref[0][0]) < 0:
        grid.reverse()
        sign = -1
    # the reference chain starts from t1, so its direction is the pack sign
    cols = {"t1": grid}
    for key in ("t2", "p1", "p2"):
        c = chains[key]
        cols[key] = [_interp(c, u) for u in grid]
    want = {"t1": sign, "t2": -sign, "p1": -sign, "p2": sign}
    for key, vals in cols.items():
        for v0, v1 in zip(vals, vals[1:]):
            if _sign(v1 - v0) != want[key]:
                raise ArcMismatch(
                    f"coordinate {key} is not strictly monotone in the "
                    f"required direction"
                )
    row0 = {k: mod1(cols[k][0]) for k in cols}
    rowN = {k: mod1(cols[k][-1]) for k in cols}
    if (row0["t1"], row0["p1"]) != first.bl or (row0["t2"], row0["p2"]) != first.tr:
        raise ArcMismatch("family does not start at the first rectangle")
    if (rowN["t1"], rowN["p1"]) != last.bl or (rowN["t2"], rowN["p2"]) != last.tr:
        raise ArcMismatch("family does not end at the last rectangle")
    for a, b in (("t1", "t2"), ("p1", "p2")):
        i = _never_equal_mod1(cols[a], cols[b])
        if i is not None:
            raise ArcMismatch(f"family degenerates: {a} meets {b} near grid row {i}")
    return cols, sign


def _col_arc(cols, role) -> SlopedArc:
    ct, cp = _ROLE_COORDS[role]
    return SlopedArc(_prune_collinear(list(zip(cols[ct], cols[cp]))))


@dataclass(frozen=True)
class Pack:
    """A pack of rectangles, stored by its first and last rectangles and
    the bl/br/tl corner arcs (the tr arc is derived).

    sign is +1 when theta1 strictly increases from first to last (the
    rectangles of the family are positively oriented) and -1 otherwise.
    Construction validates the family and canonicalizes the arcs.
    """

    first: Rect
    last: Rect
    bl: SlopedArc
    br: SlopedArc
    tl: SlopedArc
    sign: int

    def __post_init__(self):
        cols, s = _validated_family(
            self.first, self.last, {"bl": self.bl, "br": self.br, "tl": self.tl}
        )
        if s != self.sign:
            raise ArcMismatch(f"pack sign {self.sign} contradicts arc directions")
        object.__setattr__(self, "_cols", cols)
        for role in ("bl", "br", "tl"):
            object.__setattr__(self, role, _col_arc(cols, role))

    @property
    def tr(self) -> SlopedArc:
        arc = getattr(self, "_tr", None)
        if arc is None:
            arc = _col_arc(self._cols, "tr")
            object.__setattr__(self, "_tr", arc)
        return arc

    def params(self) -> tuple:
        """The canonical parameter values of the family breakpoints."""
        u = self._cols["t1"]
        span = u[-1] - u[0]
        return tuple((x - u[0]) / span for x in u)

    def __repr__(self) -> str:
        s = "+" if self.sign > 0 else "-"
        return f"Pack({s}, {self.first} -> {self.last})"


def corner_arcs(p: Pack) -> dict:
    """All four corner arcs of a pack, keyed bl/br/tl/tr."""
    return {"bl": p.bl, "br": p.br, "tl": p.tl, "tr": p.tr}


def pack_from_three_arcs(r1: Rect, r2: Rect, a1, a2, a3) -> Pack:
    """The unique pack with first rectangle r1, last rectangle r2 and the
    three given corner arcs; the fourth arc is synthesized.

    Arc roles are inferred from their endpoints (each must run from a
    corner of r1 to the matching corner of r2).
    """
    roles = {}
    for arc in (a1, a2, a3):
        hits = [
            role
            for role in _ROLE_COORDS
            if arc.start == _corner(r1, role) and arc.end == _corner(r2, role)
        ]
        if not hits:
            raise ArcMismatch(
                f"arc {arc.start}->{arc.end} matches no corner pair of "
                f"{r1} -> {r2}"
            )
        role = hits[0]
        if role in roles:
            raise ArcMismatch(f"two arcs claim the {role} corner")
        roles[role] = arc
    cols, sign = _validated_family(r1, r2, roles)
    return Pack(
        r1, r2, _col_arc(cols, "bl"), _col_arc(cols, "br"), _col_arc(cols, "tl"), sign
    )


def sample(p: Pack, t) -> Rect:
    """The rectangle of the family at canonical parameter t in [0, 1]
    (linear in the theta-coordinate of the bl arc)."""
    t = rational(t)
    if not 0 <= t <= 1:
        raise ValueError(f"parameter {t} outside [0, 1]")
    u = p._cols["t1"]
    x = u[0] + t * (u[-1] - u[0])
    vals = {
        key: _interp(list(zip(u, p._cols[key])), x) for key in ("t2", "p1", "p2")
    }
    return Rect(
        Interval(mod1(x), mod1(vals["t2"])),
        Interval(mod1(vals["p1"]), mod1(vals["p2"])),
    )


# ---------------------------------------------------------------------------
# pack-pack compatibility


def _graph_points(arc: SlopedArc):
    """Breakpoints reordered so the theta-lift increases."""
    pts = arc.breakpoints
    return pts if arc.dir_theta > 0 else tuple(reversed(pts))


def _arc_union_violation(a: SlopedArc, b: SlopedArc):
    """None when a and b are disjoint or their union is a sloped arc with
    agreeing orientations; otherwise a witness tuple."""
    ga, gb = _graph_points(a), _graph_points(b)
    da, db = a.theta_domain(), b.theta_domain()
    pieces = interval_intersect(da, db)
    meets = []
    for kind, val in pieces:
        if kind == "point":
            xa = ga[0][0] + (val - ga[0][0]) % 1
            xb = gb[0][0] + (val - gb[0][0]) % 1
            if (_interp(ga, xa) - _interp(gb, xb)) % 1 == 0:
                meets.append(("pt", (val, mod1(_interp(ga, xa)))))
            continue
        # interval piece: compare the two PL functions over it exactly
        xa0 = ga[0][0] + (val.lo - ga[0][0]) % 1
        xb0 = gb[0][0] + (val.lo - gb[0][0]) % 1
        length = val.length
        offsets = {mpq(0), length}
        for pts, x0 in ((ga, xa0), (gb, xb0)):
            for x, _ in pts:
                if x0 < x < x0 + length:
                    offsets.add(x - x0)
        offsets = sorted(offsets)
        diffs = [_interp(ga, xa0 + o) - _interp(gb, xb0 + o) for o in offsets]
        zero = [d % 1 == 0 for d in diffs]
        crossing = False
        for d0, d1 in zip(diffs, diffs[1:]):
            lo, hi = (d0, d1) if d0 <= d1 else (d1, d0)
            if _floor(lo) + 1 < hi:
                crossing = True
        if all(zero) and len(set(diffs)) == 1:
            meets.append(("seg", val))
        elif not any(zero) and not crossing:
            pass
        elif not crossing and not any(zero[1:-1]) and (zero[0] or zero[-1]):
            # touch only at overlap boundary points
            if zero[0]:
                meets.append(("pt", (val.lo, mod1(_interp(ga, xa0)))))
            if zero[-1]:
                meets.append(("pt", (val.hi, mod1(_interp(ga, xa0 + length)))))
        else:
            return ("arcs cross", a, b, val)
    if not meets:
        return None
    if len(meets) > 1:
        return ("arcs meet in several components", a, b, meets)
    kind, val = meets[0]
    if kind == "seg":
        if a.dir_theta != b.dir_theta:
            return ("orientations disagree on a shared subarc", a, b, val)
        return None
    pt = val
    head_to_tail = (pt == a.end and pt == b.start) or (pt == b.end and pt == a.start)
    if not head_to_tail:
        return ("arcs touch away from matching endpoints", a, b, pt)
    if a.slope_sign != b.slope_sign:
        return ("slopes disagree at the junction", a, b, pt)
    if da.length + db.length >= 1:
        return ("union winds a full turn", a, b, pt)
    return None


@dataclass(frozen=True)
class PackRelation:
    kind: str  # "compatible" | "almost_compatible" | "incompatible"
    witness: tuple | None = None


def _sample_grid(p: Pack, density: int):
    ts = list(p.params())
    if density > 1:
        fine = []
        for t0, t1 in zip(ts, ts[1:]):
            for j in range(density):
                fine.append(t0 + (t1 - t0) * mpq(j, density))
        fine.append(ts[-1])
        ts = fine
    return [sample(p, t) for t in ts]


def packs_compatible(p: Pack, q: Pack, density: int = 1) -> PackRelation:
    """Compatibility verdict for two packs.

    Rectangle compatibility is certified on the common breakpoint grids of
    both families (refined `density` times); corner-arc interactions are
    checked exactly.  The verdict is almost_compatible when the only
    failures pair the first rectangle of one pack with the last of the
    other.
    """
    almost = False
    rp = _sample_grid(p, density)
    rq = _sample_grid(q, density)
    for a in rp:
        for b in rq:
            if compatible(a, b):
                continue
            if (a == p.first and b == q.last) or (a == p.last and b == q.first):
                almost = True
                continue
            return PackRelation("incompatible", ("rectangles", a, b))
    for ra in corner_arcs(p).values():
        for rb in corner_arcs(q).values():
            w = _arc_union_violation(ra, rb)
            if w is not None:
                return PackRelation("incompatible", w)
    return PackRelation("almost_compatible" if almost else "compatible")


# ---------------------------------------------------------------------------
# foliation diagrams


@dataclass(frozen=True)
class FoliationDiagram:
    packs: tuple  # of Pack
    link: LinkDiagram
    epsilon_tube: Fraction
    certificate: tuple  # MoveScript

    def __post_init__(self):
        object.__setattr__(self, "epsilon_tube", rational(self.epsilon_tube))
        object.__setattr__(self, "packs", tuple(self.packs))


def pi_min_max(f: FoliationDiagram):
    """((Pi_min, eps), (Pi_max, eps)): the first and last rectangles of all
    packs as oriented surface diagrams."""
    d_min = validate_surface(tuple(p.first for p in f.packs))
    d_max = validate_surface(tuple(p.last for p in f.packs))
    eps_min = {p.first: p.sign for p in f.packs}
    eps_max = {p.last: p.sign for p in f.packs}
    return (d_min, eps_min), (d_max, eps_max)


def _vertex_components(d: SurfaceDiagram):
    """Components of the diagram under shared-corner adjacency."""
    by_vertex: dict = {}
    for r in d.rects:
        for c in r.corners():
            by_vertex.setdefault(c, []).append(r)
    comps = []
    seen: set = set()
    for start in d.rects:
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        queue = [start]
        while queue:
            r = queue.pop()
            for c in r.corners():
                for s in by_vertex[c]:
                    if s not in seen:
                        seen.add(s)
                        comp.add(s)
                        queue.append(s)
        comps.append(comp)
    return comps


def _canonical_segment(p0, p1):
    """Shift a lift segment so its theta-smaller endpoint lies in [0,1)^2
    and order the endpoints by theta."""
    if p0[0] > p1[0]:
        p0, p1 = p1, p0
    st, sp = _floor(p0[0]), _floor(p0[1])
    return ((p0[0] - st, p0[1] - sp), (p1[0] - st, p1[1] - sp))


def _on_segment(seg, pt):
    """The lift of the torus point pt strictly inside the segment, or None."""
    (x0, y0), (x1, y1) = seg
    th, ph = pt
    k = _floor(x0 - th) + 1
    while th + k < x1:
        x = th + k
        if x > x0:
            y = y0 + (x - x0) * (y1 - y0) / (x1 - x0)
            if (y - ph) % 1 == 0:
                return (x, y)
        k += 1
    return None


def _split_segments(arcs, points) -> frozenset:
    """Canonical segment set of a union of arcs, split at the given torus
    points."""
    out = set()
    for arc in arcs:
        for p0, p1 in arc.segments():
            seg = _canonical_segment(p0, p1)
            cuts = [seg[0]]
            inner = []
            for pt in points:
                hit = _on_segment(seg, pt)
                if hit is not None:
                    inner.append((hit[0], hit[1]))
            for x, y in sorted(set(inner)):
                cuts.append((x, y))
            cuts.append(seg[1])
            for a, b in zip(cuts, cuts[1:]):
                out.add(_canonical_segment(a, b))
    return frozenset(out)


def _arc_points(arcs) -> set:
    pts = set()
    for arc in arcs:
        for t, p in arc.breakpoints:
            pts.add((mod1(t), mod1(p)))
    return pts


def _unions_coincide(arcs_a, arcs_b):
    """None when the two arc unions are equal as subsets of the torus;
    otherwise a witness segment."""
    pts = _arc_points(arcs_a) | _arc_points(arcs_b)
    sa = _split_segments(arcs_a, pts)
    sb = _split_segments(arcs_b, pts)
    diff = sa ^ sb
    if diff:
        return next(iter(diff))
    return None


@dataclass(frozen=True)
class FoliationReport:
    packs: int
    certificate_moves: int
    pi_min: SurfaceDiagram
    pi_max: SurfaceDiagram


def validate_foliation(f: FoliationDiagram, density: int = 1) -> FoliationReport:
    """Check the three defining conditions and the corner-arc identities.

    1: pairwise almost-compatibility of the packs; 3: every shared-vertex
    component of Pi_max has a free vertex (no closed sub-diagram); 2: the
    certificate replays Pi_max onto Pi_min minus the tube by positive
    flypes and bubble moves; finally the unions of tr and bl arcs (and of
    tl and br arcs) must coincide.
    """
    from .moves import MoveIllegal, apply_move
    from .surface import boundary

    if not f.packs:
        raise ConditionFailed(2, "no packs, so the tube cannot be covered")
    packs = f.packs
    for i, p in enumerate(packs):
        for q in packs[i + 1 :]:
            rel = packs_compatible(p, q, density)
            if rel.kind == "incompatible":
                raise ConditionFailed(1, (p, q, rel.witness))
    try:
        (d_min, eps_min), (d_max, eps_max) = pi_min_max(f)
    except ValueError as e:
        raise ConditionFailed(1, str(e))
    inc = {}
    for r in d_max.rects:
        for c in r.corners():
            inc[c] = inc.get(c, 0) + 1
    for comp in _vertex_components(d_max):
        if not any(inc[c] == 1 for r in comp for c in r.corners()):
            raise ConditionFailed(3, tuple(sorted(comp)))
    # replay the certificate from Pi_max
    d, eps = d_max, eps_max
    for m in f.certificate:
        if m.kind not in ("Flype", "BubbleCreate", "BubbleReduce"):
            raise ConditionFailed(2, f"certificate move kind {m.kind} not allowed")
        if m.sign != 1:
            raise ConditionFailed(2, f"certificate move is not positive: {m}")
        try:
            d, eps, _ = apply_move(d, eps, m)
        except MoveIllegal as e:
            raise ConditionFailed(2, f"certificate does not replay: {e}")
    om = tube(f.link, f.epsilon_tube)
    want = set(d.rects) | set(om.rects)
    if set(d.rects) & set(om.rects) or want != set(d_min.rects):
        raise ConditionFailed(
            2,
            (
                "certificate result plus tube differs from Pi_min",
                tuple(sorted(want ^ set(d_min.rects))),
            ),
        )
    final_eps = dict(eps)
    final_eps.update(om.eps)
    for p in packs:
        if final_eps[p.first] != p.sign:
            raise ConditionFailed(2, f"orientation mismatch on {p.first}")
    w = _unions_coincide([p.tr for p in packs], [p.bl for p in packs])
    if w is not None:
        raise ConditionFailed("arc-identity", ("tr/bl", w))
    w = _unions_coincide([p.tl for p in packs], [p.br for p in packs])
    if w is not None:
        raise ConditionFailed("arc-identity", ("tl/br", w))
    # flypes and bubbles preserve free vertices and the tube is closed, so
    # an accepted certificate forces equal boundaries
    assert boundary(d_min) == boundary(d_max)
    return FoliationReport(
        packs=len(packs),
        certificate_moves=len(f.certificate),
        pi_min=d_min,
        pi_max=d_max,
    )


# ---------------------------------------------------------------------------
# reconstruction of reduced diagrams from corner-arc unions


def foliation_arcs(f: FoliationDiagram) -> tuple:
    """The union of the bl and br corner arcs of all packs, merged into
    maximal pairwise disjoint oriented sloped arcs (the reduced diagram's
    defining curve collection)."""
    arcs = [p.bl for p in f.packs] + [p.br for p in f.packs]
    return merge_arcs(arcs)


def merge_arcs(arcs) -> tuple:
    """Merge arcs overlapping or meeting end-to-end into maximal sloped
    arcs, preserving orientation."""
    pts = _arc_points(arcs)
    oriented: dict = {}
    for arc in arcs:
        for seg in _split_segments([arc], pts):
            d = oriented.setdefault(seg, arc.dir_theta)
            if d != arc.dir_theta:
                raise ValueError(f"inconsistent orientations on segment {seg}")
    by_end: dict = {}
    for seg in oriented:
        for p in seg:
            by_end.setdefault((mod1(p[0]), mod1(p[1])), []).append(seg)
    for p, segs in by_end.items():
        if len(segs) > 2:
            raise ValueError(f"more than two segments meet at {p}")
    out = []
    seen: set = set()
    for start in sorted(oriented):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        for idx, step in ((0, -1), (1, 1)):
            cur = chain[0] if step < 0 else chain[-1]
            while True:
                endpt = (mod1(cur[idx][0]), mod1(cur[idx][1]))
                nxts = [s for s in by_end[endpt] if s not in seen]
                if not nxts:
                    break
                cur = nxts[0]
                seen.add(cur)
                if step < 0:
                    chain.insert(0, cur)
                else:
                    chain.append(cur)
        # assemble lift breakpoints along the chain (theta-ascending)
        pts_out = [chain[0][0]]
        for prev, seg in zip(chain, chain[1:]):
            if (mod1(prev[1][0]), mod1(prev[1][1])) != (
                mod1(seg[0][0]),
                mod1(seg[0][1]),
            ):
                raise ValueError(f"segments {prev} and {seg} do not chain")
        for seg in chain:
            base = pts_out[-1]
            dt = seg[1][0] - seg[0][0]
            dp = seg[1][1] - seg[0][1]
            pts_out.append((base[0] + dt, base[1] + dp))
        d = oriented[chain[0]]
        if d < 0:
            pts_out.reverse()
        out.append(SlopedArc(_prune_collinear(pts_out)))
    return tuple(out)


class _Comp:
    """A component of the arc union, indexed as a monotone graph."""

    def __init__(self, arc: SlopedArc):
        self.arc = arc
        self.g = _graph_points(arc)  # theta-ascending lifts
        self.dir_theta = arc.dir_theta
        self.slope = arc.slope_sign
        self.x0 = self.g[0][0]
        self.x1 = self.g[-1][0]

    def lift_theta(self, th):
        """The theta-lift of a circle value inside the domain, or None."""
        x = self.x0 + (th - self.x0) % 1
        return x if x <= self.x1 else None

    def phi_at(self, x):
        return _interp(self.g, x)

    def lift_phi(self, ph):
        y0 = self.g[0][1]
        y1 = self.g[-1][1]
        lo, hi = (y0, y1) if y0 <= y1 else (y1, y0)
        y = lo + (ph - lo) % 1
        return y if y <= hi else None

    def theta_at_phi(self, y):
        return _interp([(p, t) for t, p in self.g], y)

    def segment_slope(self, x, direction):
        """Slope of the segment at theta-lift x toward the given theta
        direction; None at the domain end."""
        if direction > 0:
            for (a0, b0), (a1, b1) in zip(self.g, self.g[1:]):
                if a0 <= x < a1:
                    return (b1 - b0) / (a1 - a0)
            return None
        for (a0, b0), (a1, b1) in zip(self.g, self.g[1:]):
            if a0 < x <= a1:
                return (b1 - b0) / (a1 - a0)
        return None

    def next_break(self, x, direction):
        """Theta-distance from x to the next breakpoint or end in the
        given direction (0 at the end)."""
        if direction > 0:
            cands = [a for a, _ in self.g if a > x]
            return (min(cands) - x) if cands else mpq(0)
        cands = [a for a, _ in self.g if a < x]
        return (x - max(cands)) if cands else mpq(0)


def _points_at_theta(comps, th):
    """(component, theta-lift, phi mod 1) for every point of the union on
    the meridian theta = th."""
    out = []
    for c in comps:
        x = c.lift_theta(th)
        if x is not None:
            out.append((c, x, mod1(c.phi_at(x))))
    return out


def _points_at_phi(comps, ph):
    """(component, theta-lift, theta mod 1) for every point of the union on
    the line phi = ph."""
    out = []
    for c in comps:
        y = c.lift_phi(ph)
        if y is not None:
            x = c.theta_at_phi(y)
            out.append((c, x, mod1(x)))
    return out


def _comp_at_point(comps, pt):
    for c in comps:
        x = c.lift_theta(pt[0])
        if x is not None and (c.phi_at(x) - pt[1]) % 1 == 0:
            return c, x
    return None, None


_ROLE_SLOPES = {"bl": -1, "br": 1, "tl": 1, "tr": -1}


def _trace(state, direction):
    """Follow the family from the given corner configuration in the given
    pack-order direction; returns the visited coordinate rows (excluding
    the start), outermost last."""
    comps, pos, coords, s = state
    rows = []
    c1, c2, p1, p2 = coords
    x_bl, x_tl, x_br, x_tr = pos
    sigma = s * direction  # actual theta1 motion sign
    while True:
        m_bl = comps["bl"].segment_slope(x_bl, sigma)
        m_tl = comps["tl"].segment_slope(x_tl, sigma)
        # theta2 moves opposite to theta1
        m_br = comps["br"].segment_slope(x_br, -sigma)
        m_tr = comps["tr"].segment_slope(x_tr, -sigma)
        if None in (m_bl, m_tl, m_br, m_tr):
            break
        # rates per unit of signed theta1 motion
        r_p1 = m_bl
        r_t2 = m_bl / m_br  # negative: theta2 runs against theta1
        r_p2 = m_tl
        if r_p2 != r_t2 * m_tr:
            break  # the tr trajectory leaves its component
        limits = [
            comps["bl"].next_break(x_bl, sigma),
            comps["tl"].next_break(x_tl, sigma),
            comps["br"].next_break(x_br, -sigma) / abs(r_t2),
            comps["tr"].next_break(x_tr, -sigma) / abs(r_t2),
        ]
        delta = min(limits)
        if delta == 0:
            break
        # stop before the rectangle degenerates (spurious configurations)
        len_t = (c2 - c1) % 1
        len_p = (p2 - p1) % 1
        degenerate = False
        for ln, rate in ((len_t, r_t2 - 1), (len_p, r_p2 - r_p1)):
            after = ln + sigma * rate * delta
            if after <= 0 or after >= 1:
                degenerate = True
        if degenerate:
            break
        c1 += sigma * delta
        c2 += sigma * delta * r_t2
        p1 += sigma * delta * r_p1
        p2 += sigma * delta * r_p2
        x_bl += sigma * delta
        x_tl += sigma * delta
        x_br += sigma * delta * r_t2
        x_tr += sigma * delta * r_t2
        rows.append((c1, c2, p1, p2))
    return rows


_HORIZ = {"bl": "br", "br": "bl", "tl": "tr", "tr": "tl"}
_VERT = {"bl": "tl", "tl": "bl", "br": "tr", "tr": "br"}
_DIAG = {"bl": "tr", "tr": "bl", "br": "tl", "tl": "br"}


def _resolve_seed(comps, c, v, role):
    """Corner configurations (role -> (comp, theta-lift, point)) with the
    point v of component c in the given corner role."""
    th, ph = v
    if c.slope != _ROLE_SLOPES[role]:
        return []
    x_seed = c.lift_theta(th)
    configs = []
    for ch, xh, thh in _points_at_phi(comps, ph):
        if ch.slope != _ROLE_SLOPES[_HORIZ[role]] or thh == th:
            continue
        for cv, xv, phv in _points_at_theta(comps, th):
            if cv.slope != _ROLE_SLOPES[_VERT[role]] or phv == ph:
                continue
            # the diagonal corner is then fully determined
            diag_pt = (thh, phv)
            cd, xd = _comp_at_point(comps, diag_pt)
            if cd is None or cd.slope != _ROLE_SLOPES[_DIAG[role]]:
                continue
            configs.append(
                {
                    role: (c, x_seed, (th, ph)),
                    _HORIZ[role]: (ch, xh, (thh, ph)),
                    _VERT[role]: (cv, xv, (th, phv)),
                    _DIAG[role]: (cd, xd, diag_pt),
                }
            )
    return configs


def _config_state(corners):
    """Convert a role -> (comp, lift, point) map into a trace state, or
    None when the component orientations are inconsistent."""
    comps = {role: corners[role][0] for role in corners}
    s = comps["bl"].dir_theta
    if (
        comps["tl"].dir_theta != s
        or comps["br"].dir_theta != -s
        or comps["tr"].dir_theta != -s
    ):
        return None
    t1, p1 = corners["bl"][2]
    t2 = corners["br"][2][0]
    p2 = corners["tl"][2][1]
    pos = (
        corners["bl"][1],
        corners["tl"][1],
        corners["br"][1],
        corners["tr"][1],
    )
    return comps, pos, (t1, t2, p1, p2), s


def _rows_to_pack(rows, sign) -> Pack:
    first = Rect(
        Interval(mod1(rows[0][0]), mod1(rows[0][1])),
        Interval(mod1(rows[0][2]), mod1(rows[0][3])),
    )
    last = Rect(
        Interval(mod1(rows[-1][0]), mod1(rows[-1][1])),
        Interval(mod1(rows[-1][2]), mod1(rows[-1][3])),
    )
    bl = SlopedArc(_prune_collinear([(r[0], r[2]) for r in rows]))
    br = SlopedArc(_prune_collinear([(r[1], r[2]) for r in rows]))
    tl = SlopedArc(_prune_collinear([(r[0], r[3]) for r in rows]))
    return Pack(first, last, bl, br, tl, sign)


def _cut_positions(p: Pack, points) -> list:
    """Interior theta1-lift positions where a corner trajectory of the
    pack passes through one of the given torus points."""
    cols = p._cols
    u = cols["t1"]
    lo, hi = (u[0], u[-1]) if u[0] < u[-1] else (u[-1], u[0])
    cuts = set()
    for ct, cp in _ROLE_COORDS.values():
        pairs = list(zip(cols[ct], cols[cp]))
        c_lo, c_hi = (
            (cols[ct][0], cols[ct][-1])
            if cols[ct][0] < cols[ct][-1]
            else (cols[ct][-1], cols[ct][0])
        )
        back = list(zip(cols[ct], u))
        for v in points:
            base = c_lo + (rational(v[0]) - c_lo) % 1
            for x in (base, base - 1):
                if not c_lo <= x <= c_hi:
                    continue
                if (_interp(pairs, x) - v[1]) % 1 != 0:
                    continue
                x1 = _interp(back, x)
                if lo < x1 < hi:
                    cuts.add(x1)
    return sorted(cuts)


def _sub_packs(p: Pack, cuts) -> list:
    """The restrictions of the family to the parameter intervals between
    consecutive cut positions (theta1 lifts strictly inside the family)."""
    if not cuts:
        return []
    cols = p._cols
    u = cols["t1"]
    xs = sorted(set(u) | set(cuts), reverse=u[0] > u[-1])
    rows = [
        (
            x,
            _interp(list(zip(u, cols["t2"])), x),
            _interp(list(zip(u, cols["p1"])), x),
            _interp(list(zip(u, cols["p2"])), x),
        )
        for x in xs
    ]
    bounds = [0] + sorted(xs.index(c) for c in cuts) + [len(xs) - 1]
    out = []
    for i, j in zip(bounds, bounds[1:]):
        try:
            out.append(_rows_to_pack(rows[i : j + 1], p.sign))
        except ArcMismatch:
            continue
    return out


def reconstruct_reduced(arcs) -> tuple:
    """The packs of the reduced foliation diagram whose corner arcs form
    the given union of pairwise disjoint oriented sloped arcs.

    Maximal families are traced along arc concatenations, split wherever
    another family's end rectangle has a corner on one of their corner
    trajectories, and the unique pairwise compatible collection whose bl
    and br arcs tile the union exactly once is returned.  Raises
    ReconstructionAmbiguous when no such collection exists, when several
    do, or when the result is not reduced.
    """
    comps = [_Comp(a) for a in arcs]
    candidates: set = set()
    for c in comps:
        for t, p in c.arc.breakpoints:
            v = (mod1(t), mod1(p))
            for role in _ROLE_SLOPES:
                for corners in _resolve_seed(comps, c, v, role):
                    state = _config_state(corners)
                    if state is None:
                        continue
                    back = _trace(state, -1)
                    fwd = _trace(state, 1)
                    rows = list(reversed(back)) + [state[2]] + fwd
                    if len(rows) < 2:
                        continue
                    try:
                        candidates.add(_rows_to_pack(rows, state[3]))
                    except ArcMismatch:
                        # coincidental corner alignment, not a pack
                        continue
    # A junction of two corner arcs with equal slopes is invisible to the
    # trace, so a maximal family may run straight through the end of a
    # genuine one (its corner arcs re-use arcs that belong to two distinct
    # packs).  Every such junction is a corner of an end rectangle of some
    # maximal family, so one round of splitting there restores the
    # concealed packs.
    points = set()
    for p in candidates:
        points.update(p.first.corners())
        points.update(p.last.corners())
    new = set()
    for p in candidates:
        new.update(_sub_packs(p, _cut_positions(p, points)))
    candidates |= new
    # Select the genuine collection: its bl and br arcs tile the union
    # exactly once and its packs are pairwise (almost) compatible.
    pts = _arc_points(arcs)
    for p in candidates:
        pts |= _arc_points((p.bl, p.br))
    universe = _split_segments(arcs, pts)
    cand = sorted(candidates, key=repr)
    cand_segs = [_split_segments((p.bl, p.br), pts) for p in cand]
    order = sorted(universe)
    relation = {}

    def ok(i, j, reduced):
        p, q = cand[i], cand[j]
        if reduced and (p.first == q.last or q.first == p.last):
            return False  # end-to-end chains only occur in non-reduced diagrams
        key = (i, j) if i < j else (j, i)
        if key not in relation:
            relation[key] = packs_compatible(p, q).kind
        return relation[key] != "incompatible"

    def solve(reduced):
        solutions = []

        def cover(done, chosen, avail):
            if len(solutions) > 1:
                return
            remaining = [s for s in order if s not in done]
            if not remaining:
                solutions.append(frozenset(chosen))
                return
            target = remaining[0]
            for i in avail:
                if (
                    target in cand_segs[i]
                    and not (cand_segs[i] & done)
                    and all(ok(i, j, reduced) for j in chosen)
                ):
                    cover(done | cand_segs[i], chosen + [i], avail - {i})

        cover(frozenset(), [], set(range(len(cand))))
        return solutions

    solutions = solve(reduced=True)
    if not solutions:
        if solve(reduced=False):
            raise ReconstructionAmbiguous(None, "diagram is not reduced")
        raise ReconstructionAmbiguous(None, "no pack collection tiles the arc union")
    if len(set(solutions)) > 1:
        raise ReconstructionAmbiguous(None, "several pack collections tile the arc union")
    result = [cand[i] for i in sorted(solutions[0])]
    return tuple(result)
