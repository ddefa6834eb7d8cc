"""Rectangular diagrams of surfaces and quasi-surfaces.

A surface diagram is a finite set of pairwise compatible rectangles on the
torus.  Each rectangle spans a disc tile inside the three-sphere, viewed as
the join of a theta-circle and a phi-circle; a corner (theta, phi) spans the
join arc between the two circle points.  The induced CW structure (occupied
line points as 0-cells, corner arcs as 1-cells, tiles as 2-cells) drives the
Euler characteristic and topology classification here.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .circle import Interval, Rect, compatible, rational, rect_intersection
from .link import LinkDiagram, LineCountViolation, components as link_components


class DuplicateRect(ValueError):
    pass


class IncompatiblePair(ValueError):
    def __init__(self, r1: Rect, r2: Rect, kind: str):
        self.r1 = r1
        self.r2 = r2
        self.kind = kind
        super().__init__(f"incompatible pair {r1}, {r2} (intersection kind {kind})")


class NonOrientable(ValueError):
    """Carries an odd cycle of rectangles witnessing the sign conflict."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__(f"odd sign-constraint cycle of length {len(self.cycle)}")


class DeltaTooLarge(ValueError):
    pass


class NotOriented(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceDiagram:
    rects: tuple  # sorted tuple of Rect

    def __post_init__(self):
        object.__setattr__(self, "rects", tuple(sorted(self.rects)))

    def __iter__(self):
        return iter(self.rects)

    def __len__(self):
        return len(self.rects)

    def __contains__(self, r):
        return r in self.rects

    def vertices(self) -> frozenset:
        out = set()
        for r in self.rects:
            out |= r.corners()
        return frozenset(out)

    def occupied_thetas(self) -> frozenset:
        return frozenset(x for r in self.rects for x in (r.theta1, r.theta2))

    def occupied_phis(self) -> frozenset:
        return frozenset(x for r in self.rects for x in (r.phi1, r.phi2))


def validate_surface(rects) -> SurfaceDiagram:
    """Check pairwise compatibility and absence of duplicates."""
    rs = sorted(rects)
    for i, r in enumerate(rs):
        if i and rs[i - 1] == r:
            raise DuplicateRect(repr(r))
    for i, r1 in enumerate(rs):
        for r2 in rs[i + 1 :]:
            if not compatible(r1, r2):
                raise IncompatiblePair(r1, r2, rect_intersection(r1, r2).kind)
    return SurfaceDiagram(tuple(rs))


def vertex_incidence(d: SurfaceDiagram) -> dict:
    """Map vertex -> list of rectangles having it as a corner."""
    inc = defaultdict(list)
    for r in d.rects:
        for c in r.corners():
            inc[c].append(r)
    return dict(inc)


def boundary(d: SurfaceDiagram) -> frozenset:
    """The free vertices: corners belonging to exactly one rectangle."""
    return frozenset(v for v, rs in vertex_incidence(d).items() if len(rs) == 1)


def boundary_link(d: SurfaceDiagram) -> LinkDiagram | None:
    """The boundary as a link diagram, or None if the free vertices violate
    the two-per-line condition (quasi-surface boundary)."""
    try:
        return LinkDiagram(boundary(d))
    except LineCountViolation:
        return None


def _sign_constraints(d: SurfaceDiagram):
    """Yield (r1, r2, parity) with parity +1 for equal signs, -1 for
    opposite, from the per-line side groups.

    On each occupied meridian, all rectangles whose left side lies on it
    share a sign, all whose right side lies on it share the other; same for
    longitudes with bottom/top sides.
    """
    for lo_of, hi_of in (
        (lambda r: r.theta1, lambda r: r.theta2),
        (lambda r: r.phi1, lambda r: r.phi2),
    ):
        groups = defaultdict(lambda: ([], []))
        for r in d.rects:
            groups[lo_of(r)][0].append(r)
            groups[hi_of(r)][1].append(r)
        for minus, plus in groups.values():
            for side in (minus, plus):
                for a, b in zip(side, side[1:]):
                    yield a, b, 1
            if minus and plus:
                yield minus[0], plus[0], -1


def orient(d: SurfaceDiagram, seed: tuple | None = None) -> dict:
    """Return a sign function eps: Rect -> {+1,-1} satisfying every side
    constraint, or raise NonOrientable with an odd constraint cycle.

    The constraint graph is two-colored per connected piece; `seed`
    (rect, sign) pins the color of one piece, all others default to +1 on
    their smallest rectangle.
    """
    adj = defaultdict(list)
    for a, b, parity in _sign_constraints(d):
        adj[a].append((b, parity))
        adj[b].append((a, parity))
    eps: dict = {}
    parent: dict = {}
    for start in d.rects:
        if start in eps:
            continue
        eps[start] = 1
        parent[start] = None
        queue = [start]
        while queue:
            r = queue.pop()
            for s, parity in adj[r]:
                want = eps[r] * parity
                if s not in eps:
                    eps[s] = want
                    parent[s] = r
                    queue.append(s)
                elif eps[s] != want:
                    yield_cycle = _constraint_cycle(parent, r, s)
                    raise NonOrientable(yield_cycle)
    if seed is not None:
        r0, sign = seed
        if r0 not in eps:
            raise KeyError(f"seed rectangle {r0} not in diagram")
        if eps[r0] != sign:
            flip = _component_of(adj, r0)
            for r in flip:
                eps[r] = -eps[r]
    return eps


def _constraint_cycle(parent, r, s):
    """Tree paths from r and s to their common ancestor, joined into the
    odd cycle that witnesses non-orientability."""
    anc_r = []
    x = r
    while x is not None:
        anc_r.append(x)
        x = parent[x]
    anc_s = []
    x = s
    seen = set(anc_r)
    while x not in seen:
        anc_s.append(x)
        x = parent[x]
    meet = x
    path_r = anc_r[: anc_r.index(meet) + 1]
    return path_r[::-1] + anc_s[::-1]  # meet .. r, s .. (child of meet)


def _component_of(adj, r0):
    out = {r0}
    queue = [r0]
    while queue:
        r = queue.pop()
        for s, _ in adj[r]:
            if s not in out:
                out.add(s)
                queue.append(s)
    return out


@dataclass(frozen=True)
class ThetaPhiSets:
    Theta: frozenset
    Phi: frozenset
    ThetaPlus: frozenset
    ThetaMinus: frozenset
    PhiPlus: frozenset
    PhiMinus: frozenset


def theta_phi_sets(d: SurfaceDiagram, eps: dict) -> ThetaPhiSets:
    """The signed coordinate sets of an oriented diagram.

    Theta+ collects left sides of positive and right sides of negative
    rectangles; Theta- the opposite; Phi+ collects top sides of positive and
    bottom sides of negative rectangles; Phi- the opposite.
    """
    tp, tm, pp, pm = set(), set(), set(), set()
    for r in d.rects:
        e = eps[r]
        (tp if e == 1 else tm).add(r.theta1)
        (tm if e == 1 else tp).add(r.theta2)
        (pp if e == 1 else pm).add(r.phi2)
        (pm if e == 1 else pp).add(r.phi1)
    return ThetaPhiSets(
        Theta=d.occupied_thetas(),
        Phi=d.occupied_phis(),
        ThetaPlus=frozenset(tp),
        ThetaMinus=frozenset(tm),
        PhiPlus=frozenset(pp),
        PhiMinus=frozenset(pm),
    )


def euler_characteristic(d: SurfaceDiagram) -> int:
    """chi = #rects - #vertices + #occupied lines.

    This is the cell count of the tile CW structure: the occupied line
    points on the two core circles are the 0-cells, the corner arcs the
    1-cells, the tiles the 2-cells — valid with or without boundary
    (a single rectangle gives 1 - 4 + 4 = 1, a disc).
    """
    lines = len(d.occupied_thetas()) + len(d.occupied_phis())
    return len(d.rects) - len(d.vertices()) + lines


def connected_components(d: SurfaceDiagram) -> list[SurfaceDiagram]:
    """Components under tile adjacency: two tiles meet iff they share a
    corner or have sides on a common occupied line (their closures then
    share a core-circle point)."""
    adj = defaultdict(set)
    by_theta = defaultdict(list)
    by_phi = defaultdict(list)
    for r in d.rects:
        by_theta[r.theta1].append(r)
        by_theta[r.theta2].append(r)
        by_phi[r.phi1].append(r)
        by_phi[r.phi2].append(r)
    for group in list(by_theta.values()) + list(by_phi.values()):
        for a, b in zip(group, group[1:]):
            adj[a].add(b)
            adj[b].add(a)
    comps = []
    seen: set = set()
    for start in d.rects:
        if start in seen:
            continue
        comp = {start}
        queue = [start]
        seen.add(start)
        while queue:
            r = queue.pop()
            for s in adj[r]:
                if s not in seen:
                    seen.add(s)
                    comp.add(s)
                    queue.append(s)
        comps.append(SurfaceDiagram(tuple(sorted(comp))))
    return comps


@dataclass(frozen=True)
class Classification:
    chi: int
    orientable: bool
    boundary_curves: int | None
    genus: int | None

    @property
    def name(self) -> str:
        if self.boundary_curves is None or self.genus is None:
            return "unclassified"
        b = self.boundary_curves
        if self.orientable:
            g = self.genus
            base = {0: "sphere", 1: "torus"}.get(g, f"genus-{g} surface")
            if b == 0:
                return base
            if (g, b) == (0, 1):
                return "disc"
            if (g, b) == (0, 2):
                return "annulus"
            return f"{base} with {b} boundary curves"
        k = self.genus
        base = {1: "projective plane", 2: "Klein bottle"}.get(
            k, f"crosscap-{k} surface"
        )
        return base if b == 0 else f"{base} with {b} boundary curves"


def classify(d: SurfaceDiagram) -> list[Classification]:
    """Per connected component: Euler characteristic, orientability,
    boundary curve count and genus (crosscap number when non-orientable)."""
    out = []
    for comp in connected_components(d):
        chi = euler_characteristic(comp)
        try:
            orient(comp)
            orientable = True
        except NonOrientable:
            orientable = False
        bl = boundary_link(comp)
        if bl is None:
            curves: int | None = None if boundary(comp) else 0
        else:
            curves = len(link_components(bl))
        genus: int | None = None
        if curves is not None:
            # orientable: chi = 2 - 2g - b; non-orientable: chi = 2 - k - b
            if orientable:
                g2 = 2 - chi - curves
                genus = g2 // 2 if g2 % 2 == 0 and g2 >= 0 else None
            else:
                k = 2 - chi - curves
                genus = k if k >= 1 else None
        out.append(Classification(chi, orientable, curves, genus))
    return out


def line_signs(d: SurfaceDiagram, eps: dict):
    """Per-line perturbation directions of an oriented diagram.

    Returns (theta_sign, phi_sign): maps from occupied coordinate to +1
    (the line lies in Theta+/Phi+) or -1.  Orientation consistency makes
    each line belong to exactly one of the two signed sets.
    """
    s = theta_phi_sets(d, eps)
    if s.ThetaPlus & s.ThetaMinus or s.PhiPlus & s.PhiMinus:
        raise NotOriented("signed coordinate sets overlap; eps is inconsistent")
    theta_sign = {v: 1 for v in s.ThetaPlus}
    theta_sign.update({v: -1 for v in s.ThetaMinus})
    phi_sign = {v: 1 for v in s.PhiPlus}
    phi_sign.update({v: -1 for v in s.PhiMinus})
    return theta_sign, phi_sign


def _min_cyclic_gap(values) -> Fraction:
    vals = sorted(values)
    if len(vals) <= 1:
        return Fraction(1)
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    gaps.append(vals[0] + 1 - vals[-1])
    return min(gaps)


def perturb(d: SurfaceDiagram, eps: dict, delta) -> tuple:
    """Apply the positive deformation that shifts every Theta+/Phi+ line by
    +delta and every Theta-/Phi- line by -delta.

    Returns (diagram, eps) with the inherited orientation.  Requires
    2*|delta| below the minimal gap between consecutive occupied lines so
    the cyclic order of lines (hence all predicates) is preserved;
    negative delta undoes the positive shift.
    """
    delta = rational(delta)
    if delta == 0:
        return d, dict(eps)
    theta_sign, phi_sign = line_signs(d, eps)
    # the shifted lines must keep their cyclic order: every consecutive gap
    # g between lines a < b must survive the relative shift
    for signs in (theta_sign, phi_sign):
        vals = sorted(signs)
        for a, b in zip(vals, vals[1:] + vals[:1]):
            g = (b - a) % 1 if a != b else Fraction(1)
            if g + (signs[b] - signs[a]) * delta <= 0:
                raise DeltaTooLarge(
                    f"delta={delta} collapses the gap between lines {a} and {b}"
                )
    new_rects = []
    new_eps = {}
    for r in d.rects:
        nr = Rect(
            Interval(
                r.theta1 + theta_sign[r.theta1] * delta,
                r.theta2 + theta_sign[r.theta2] * delta,
            ),
            Interval(
                r.phi1 + phi_sign[r.phi1] * delta,
                r.phi2 + phi_sign[r.phi2] * delta,
            ),
        )
        new_rects.append(nr)
        new_eps[nr] = eps[r]
    return SurfaceDiagram(tuple(new_rects)), new_eps
