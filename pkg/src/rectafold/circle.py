"""Exact rational arithmetic on the circle Q/Z and rectangles in the torus.

Points on the circle are `fractions.Fraction` values canonicalized to [0, 1).
Oriented arcs go counterclockwise from `lo` to `hi`; since endpoints are
required to differ, the CCW length of an arc always lies in (0, 1).

All predicates here are exact: no floating point is used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq
from typing import Iterable, Union

Rational = Union[int, str, Fraction]


class AmbiguousOverlay(ValueError):
    """Raised when two crossing rectangles have equal theta-widths."""


class NotARectangleIntersection(ValueError):
    """Raised when `overlays` is asked about a pair whose intersection is not
    a single vertex-free rectangle."""


def rational(x: Rational) -> mpq:
    """Exact rational from an int, a "p/q" string, a Fraction or an mpq.

    Any numbers.Rational is accepted; numerator and denominator are forced
    to plain ints so that Fractions built on top of gmpy2 integers (for
    example Fraction(some_mpq, 2)) cannot leak through.
    """
    if isinstance(x, mpq):
        return x
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, int):
        return mpq(x)
    return mpq(int(x.numerator), int(x.denominator))


def mod1(x: Rational) -> mpq:
    """Canonical representative of x in Q/Z as an exact rational in [0, 1).

    gmpy2's mpq is used as the canonical type: it is hash- and
    equality-compatible with fractions.Fraction but several times faster.
    """
    x = rational(x)
    if 0 <= x < 1:
        return x
    return x % 1


def frac_str(x: Rational) -> str:
    """Serialize a rational as "p/q" with q >= 1 (so 0 -> "0/1")."""
    x = rational(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, order=True)
class Interval:
    """Closed oriented arc [lo; hi] on the circle, CCW from lo to hi."""

    lo: Fraction
    hi: Fraction

    def __init__(self, lo: Rational, hi: Rational):
        lo = mod1(lo)
        hi = mod1(hi)
        if lo == hi:
            raise ValueError(f"degenerate interval [{lo}; {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        # Fraction hashing and arithmetic are slow; precompute both of the
        # values every predicate needs
        object.__setattr__(self, "_hash", hash((lo, hi)))
        object.__setattr__(self, "_length", (hi - lo) % 1)

    def __hash__(self) -> int:
        return self._hash

    @property
    def length(self) -> Fraction:
        return self._length

    def shifted(self, delta: Rational) -> "Interval":
        return Interval(self.lo + rational(delta), self.hi + rational(delta))

    def __repr__(self) -> str:
        return f"[{self.lo};{self.hi}]"


def interval_contains(i: Interval, p: Rational, openness: str = "closed") -> bool:
    """Membership of p in the arc i with the given endpoint convention.

    openness: "closed" includes both endpoints, "open" neither,
    "half_open" includes lo only.
    """
    pos = mod1(p) - i.lo
    if pos < 0:
        pos += 1
    length = i._length
    if openness == "closed":
        return pos <= length
    if openness == "open":
        return 0 < pos < length
    if openness == "half_open":
        return pos < length
    raise ValueError(f"unknown openness {openness!r}")


# An intersection piece is either ("point", p) or ("interval", Interval).
Piece = tuple


def interval_intersect(a: Interval, b: Interval) -> list[Piece]:
    """Exact decomposition of the closed-arc intersection a ∩ b.

    Two closed circle arcs meet in at most two maximal pieces; each piece is
    ("point", Fraction) or ("interval", Interval).  Computed by lifting b to
    the real line in three unit translates against a fixed lift of a.
    """
    a0, a1 = a.lo, a.lo + a.length
    blen = b.length
    pieces: list[Piece] = []
    seen = set()
    for shift in (-1, 0, 1):
        b0 = b.lo + shift
        b1 = b0 + blen
        lo = max(a0, b0)
        hi = min(a1, b1)
        if lo > hi:
            continue
        if lo == hi:
            key = ("point", mod1(lo))
        else:
            key = ("interval", Interval(lo, hi))
        if key not in seen:
            seen.add(key)
            pieces.append(key)
    # A point piece that is an endpoint of an interval piece is not maximal.
    ends = set()
    for kind, val in pieces:
        if kind == "interval":
            ends.add(val.lo)
            ends.add(val.hi)
    pieces = [p for p in pieces if not (p[0] == "point" and p[1] in ends)]
    return pieces


@dataclass(frozen=True, order=True)
class Rect:
    """Rectangle [theta.lo; theta.hi] x [phi.lo; phi.hi] on the torus."""

    theta: Interval
    phi: Interval

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.theta, self.phi)))

    def __hash__(self) -> int:
        return self._hash

    @staticmethod
    def of(t1: Rational, t2: Rational, p1: Rational, p2: Rational) -> "Rect":
        return Rect(Interval(t1, t2), Interval(p1, p2))

    @property
    def theta1(self) -> Fraction:
        return self.theta.lo

    @property
    def theta2(self) -> Fraction:
        return self.theta.hi

    @property
    def phi1(self) -> Fraction:
        return self.phi.lo

    @property
    def phi2(self) -> Fraction:
        return self.phi.hi

    @property
    def bl(self):
        return (self.theta.lo, self.phi.lo)

    @property
    def br(self):
        return (self.theta.hi, self.phi.lo)

    @property
    def tl(self):
        return (self.theta.lo, self.phi.hi)

    @property
    def tr(self):
        return (self.theta.hi, self.phi.hi)

    def corners(self) -> frozenset:
        c = getattr(self, "_corners", None)
        if c is None:
            c = frozenset((self.bl, self.br, self.tl, self.tr))
            object.__setattr__(self, "_corners", c)
        return c

    def contains(self, p, openness: str = "closed") -> bool:
        th, ph = p
        return interval_contains(self.theta, th, openness) and interval_contains(
            self.phi, ph, openness
        )

    def shifted(self, dtheta: Rational, dphi: Rational) -> "Rect":
        return Rect(self.theta.shifted(dtheta), self.phi.shifted(dphi))

    def transposed(self) -> "Rect":
        return Rect(self.phi, self.theta)

    def __repr__(self) -> str:
        return f"{self.theta}x{self.phi}"


@dataclass(frozen=True)
class RectIntersection:
    """Exact classification of the intersection of two rectangles.

    kind: "empty" | "vertices" | "rect" | "other".
    vertices: the isolated intersection points (kind "vertices").
    rect: the intersection rectangle (kind "rect").
    pieces: the raw (theta piece, phi piece) product decomposition.
    """

    kind: str
    vertices: frozenset = frozenset()
    rect: Rect | None = None
    pieces: tuple = ()


@lru_cache(maxsize=1 << 16)
def rect_intersection(r1: Rect, r2: Rect) -> RectIntersection:
    """Classify r1 ∩ r2 exactly.

    The intersection is the product of the arc intersections in each
    coordinate; it is a single rectangle iff both coordinate intersections
    are single intervals, and a set of isolated points iff both consist of
    points only.  Everything else is "other".
    """
    # cheap rejection: most random pairs are disjoint in some coordinate
    def arcs_disjoint(a: Interval, b: Interval) -> bool:
        return (b.lo - a.lo) % 1 > a.length and (a.lo - b.lo) % 1 > b.length

    if arcs_disjoint(r1.theta, r2.theta) or arcs_disjoint(r1.phi, r2.phi):
        return RectIntersection("empty")
    tps = interval_intersect(r1.theta, r2.theta)
    pps = interval_intersect(r1.phi, r2.phi)
    if not tps or not pps:
        return RectIntersection("empty")
    pieces = tuple((tp, pp) for tp in tps for pp in pps)
    t_kinds = {k for k, _ in tps}
    p_kinds = {k for k, _ in pps}
    if t_kinds == {"point"} and p_kinds == {"point"}:
        verts = frozenset((tv, pv) for (_, tv) in tps for (_, pv) in pps)
        return RectIntersection("vertices", vertices=verts, pieces=pieces)
    if len(tps) == 1 and len(pps) == 1 and t_kinds == {"interval"} and p_kinds == {"interval"}:
        return RectIntersection("rect", rect=Rect(tps[0][1], pps[0][1]), pieces=pieces)
    return RectIntersection("other", pieces=pieces)


def intersection_contains(ri: RectIntersection, p) -> bool:
    """Pointwise membership in the region described by a RectIntersection."""
    th, ph = mod1(p[0]), mod1(p[1])
    for tp, pp in ri.pieces:
        tk, tv = tp
        pk, pv = pp
        t_ok = (th == tv) if tk == "point" else interval_contains(tv, th)
        p_ok = (ph == pv) if pk == "point" else interval_contains(pv, ph)
        if t_ok and p_ok:
            return True
    return False


@lru_cache(maxsize=1 << 16)
def compatible(r1: Rect, r2: Rect) -> bool:
    """Paper-style compatibility of two rectangles.

    True iff r1 ∩ r2 is empty, a subset of the common corner set, or a
    single rectangle containing no corner of either rectangle.  Equal
    rectangles are declared compatible; diagram validators forbid
    duplicates separately.
    """
    if r1 == r2:
        return True
    ri = rect_intersection(r1, r2)
    if ri.kind == "empty":
        return True
    if ri.kind == "vertices":
        common = r1.corners() & r2.corners()
        return ri.vertices <= common
    if ri.kind == "rect":
        assert ri.rect is not None
        for c in r1.corners() | r2.corners():
            if ri.rect.contains(c):
                return False
        return True
    return False


def crossing(r1: Rect, r2: Rect) -> bool:
    """True iff r1, r2 are compatible and meet in a vertex-free rectangle."""
    if r1 == r2:
        return False
    return compatible(r1, r2) and rect_intersection(r1, r2).kind == "rect"


def overlays(r1: Rect, r2: Rect) -> bool:
    """True iff r1 and r2 cross and r1 has strictly smaller theta-width.

    If the rectangles meet in a rectangle but have equal theta-widths the
    comparison is meaningless and AmbiguousOverlay is raised.  (A genuine
    crossing forces one theta-interval strictly inside the other's interior,
    so equal widths can only occur for non-crossing pairs.)
    """
    if r1 != r2 and rect_intersection(r1, r2).kind == "rect":
        w1 = r1.theta.length
        w2 = r2.theta.length
        if w1 == w2:
            raise AmbiguousOverlay(f"equal theta-widths {w1} for {r1}, {r2}")
    if not crossing(r1, r2):
        raise NotARectangleIntersection(f"{r1} and {r2} do not cross")
    return r1.theta.length < r2.theta.length


def circular_midpoint(i: Interval) -> Fraction:
    """Midpoint of the arc i, taken along the CCW direction."""
    return mod1(i.lo + i.length / 2)


def refinement_grid(values: Iterable[Rational]) -> list[Fraction]:
    """Sample points of the cell structure the given circle points induce:
    the points themselves plus a midpoint of every gap between cyclically
    consecutive ones."""
    pts = sorted({mod1(v) for v in values})
    if not pts:
        return [mpq(0)]
    samples = list(pts)
    for a, b in zip(pts, pts[1:] + [pts[0] + 1]):
        if a != b % 1:
            samples.append(mod1((a + b) / 2))
    return sorted(samples)
