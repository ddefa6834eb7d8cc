"""Rectangular diagrams of links and tube diagrams around them.

A link diagram is a finite set of points on the torus such that every
meridian {theta} x S^1 and every longitude S^1 x {phi} contains either no
vertex or exactly two.  The two involutions v (vertical partner, same
theta) and h (horizontal partner, same phi) generate the link components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .circle import Interval, Rect, mod1, rational

Vertex = tuple  # (Fraction, Fraction)


class LineCountViolation(ValueError):
    def __init__(self, axis: str, value: Fraction, count: int):
        self.axis = axis
        self.value = value
        self.count = count
        super().__init__(f"{axis}={value} carries {count} vertices (expected 0 or 2)")


class EmptyDiagram(ValueError):
    pass


class TubeTooFat(ValueError):
    pass


@dataclass(frozen=True)
class LinkDiagram:
    vertices: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        verts = frozenset((mod1(t), mod1(p)) for t, p in self.vertices)
        object.__setattr__(self, "vertices", verts)
        for axis, idx in (("theta", 0), ("phi", 1)):
            counts: dict = {}
            for v in verts:
                counts[v[idx]] = counts.get(v[idx], 0) + 1
            for val, c in counts.items():
                if c != 2:
                    raise LineCountViolation(axis, val, c)

    def vertical_partner(self, v: Vertex) -> Vertex:
        (w,) = [u for u in self.vertices if u[0] == v[0] and u != v]
        return w

    def horizontal_partner(self, v: Vertex) -> Vertex:
        (w,) = [u for u in self.vertices if u[1] == v[1] and u != v]
        return w

    def transposed(self) -> "LinkDiagram":
        return LinkDiagram(frozenset((p, t) for t, p in self.vertices))

    def shifted(self, dtheta, dphi) -> "LinkDiagram":
        return LinkDiagram(
            frozenset((mod1(t + rational(dtheta)), mod1(p + rational(dphi))) for t, p in self.vertices)
        )


def validate_link(vertices) -> LinkDiagram:
    return LinkDiagram(frozenset(tuple(v) for v in vertices))


def components(d: LinkDiagram) -> list[list[Vertex]]:
    """Orbits of the composition (vertical partner) o (horizontal partner),
    listed as cyclic vertex sequences alternating horizontal/vertical edges."""
    seen = set()
    out = []
    for start in sorted(d.vertices):
        if start in seen:
            continue
        cycle = []
        v = start
        while v not in seen:
            seen.add(v)
            cycle.append(v)
            w = d.horizontal_partner(v)
            if w not in seen:
                seen.add(w)
                cycle.append(w)
            v = d.vertical_partner(w)
        out.append(cycle)
    return out


def _cyclic_min_gap(values: set) -> Fraction:
    vals = sorted(values)
    if len(vals) == 1:
        # a single occupied line: its neighbor in the cyclic order is itself,
        # one full turn away
        return Fraction(1)
    gaps = [(b - a) for a, b in zip(vals, vals[1:])]
    gaps.append(vals[0] + 1 - vals[-1])
    return min(gaps)


def min_gap(d: LinkDiagram) -> Fraction:
    """Smallest distance between two neighboring occupied meridians or two
    neighboring occupied longitudes."""
    if not d.vertices:
        raise EmptyDiagram("min_gap of an empty diagram")
    thetas = {v[0] for v in d.vertices}
    phis = {v[1] for v in d.vertices}
    return min(_cyclic_min_gap(thetas), _cyclic_min_gap(phis))


@dataclass(frozen=True)
class TubeDiagram:
    base: LinkDiagram
    t: Fraction
    rects: tuple  # of Rect
    eps: dict  # Rect -> +1 / -1


def tube(d: LinkDiagram, t) -> TubeDiagram:
    """The tube diagram Omega_t(d): for each vertex v, one horizontal
    rectangle [theta_v+t; theta_h(v)-t] x [phi_v-t; phi_v+t] (sign +1) and
    one vertical rectangle [theta_v-t; theta_v+t] x [phi_v+t; phi_v(v)-t]
    (sign -1).  Requires 0 < t < min_gap/2."""
    t = rational(t)
    if not d.vertices:
        raise EmptyDiagram("tube of an empty diagram")
    if not 0 < t < min_gap(d) / 2:
        raise TubeTooFat(f"t={t} not in (0, {min_gap(d)}/2)")
    rects = []
    eps = {}
    for v in sorted(d.vertices):
        th, ph = v
        hp = d.horizontal_partner(v)
        vp = d.vertical_partner(v)
        horiz = Rect(Interval(th + t, hp[0] - t), Interval(ph - t, ph + t))
        vert = Rect(Interval(th - t, th + t), Interval(ph + t, vp[1] - t))
        for r, s in ((horiz, 1), (vert, -1)):
            if r not in eps:
                rects.append(r)
                eps[r] = s
    return TubeDiagram(d, t, tuple(rects), eps)
