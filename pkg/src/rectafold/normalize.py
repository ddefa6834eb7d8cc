"""Join triangulations of the three-sphere and diagram normalization.

A pair of finite circle subsets (X, Y), each with at least three points,
induces a triangulation T(X, Y) of S^3 = S^1 * S^1 whose 3-simplices are
the joins of consecutive gaps.  A closed diagram avoiding X and Y
coordinate-wise represents a normal surface exactly when every rectangle
contains a grid point of X x Y; rectangles whose open theta- or phi-span
misses the corresponding point set ("pre-thin" rectangles) obstruct
normality and are eliminated one at a time by the rewriting loop below,
each step strictly decreasing the rectangle count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .circle import Interval, Rect, interval_contains, mod1
from .moves import (
    Move,
    MoveIllegal,
    MoveScript,
    UnclassifiableLeap,
    apply_move,
    bubble_reduce_move,
    classify_sign,
    wrinkle_move,
)
from .surface import SurfaceDiagram, boundary, connected_components


class BoundaryNonEmpty(ValueError):
    """Normality only makes sense for closed diagrams."""


class NoPrethin(ValueError):
    """A normalization step was requested on a diagram with no pre-thin
    rectangle."""


class SignViolation(ValueError):
    """A normalization step contradicts the requested sign policy."""

    def __init__(self, step: int, move: Move):
        self.step = step
        self.move = move
        super().__init__(f"step {step} has sign {move.sign}: {move.kind}")


@dataclass(frozen=True)
class JoinTriangulation:
    """The triangulation T(X, Y) given by its two vertex sets."""

    X: frozenset
    Y: frozenset

    def __init__(self, X, Y):
        X = frozenset(mod1(x) for x in X)
        Y = frozenset(mod1(y) for y in Y)
        if len(X) < 3 or len(Y) < 3:
            raise ValueError("each vertex set needs at least three points")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)


@dataclass(frozen=True)
class ThinFlags:
    theta_thin: bool
    phi_thin: bool
    positively_prethin: bool
    negatively_prethin: bool

    @property
    def thin(self) -> bool:
        return self.theta_thin or self.phi_thin

    @property
    def prethin(self) -> bool:
        return self.positively_prethin or self.negatively_prethin


@dataclass(frozen=True)
class ThinReport:
    flags: dict  # Rect -> ThinFlags

    def thin_rects(self) -> list:
        return [r for r, f in self.flags.items() if f.thin]

    def prethin_rects(self) -> list:
        return [r for r, f in self.flags.items() if f.prethin]


def _meets_open(iv: Interval, points) -> bool:
    return any(interval_contains(iv, x, "open") for x in points)


def is_normal(d: SurfaceDiagram, T: JoinTriangulation) -> bool:
    """Whether the surface of d is normal with respect to T(X, Y): the
    diagram avoids X and Y coordinate-wise and every rectangle contains a
    grid point of X x Y."""
    if boundary(d):
        raise BoundaryNonEmpty("diagram has free vertices")
    if T.X & d.occupied_thetas() or T.Y & d.occupied_phis():
        return False
    for r in d.rects:
        if not _meets_open(r.theta, T.X) or not _meets_open(r.phi, T.Y):
            return False
    return True


def thin_report(d: SurfaceDiagram, eps: dict, T: JoinTriangulation) -> ThinReport:
    """Per-rectangle thinness and pre-thinness flags.

    A rectangle is theta-thin when its open theta-span misses both X and
    every occupied meridian of the diagram (other rectangles' sides at the
    span endpoints are allowed by openness); pre-thin only requires
    missing X.  The pre-thin sign couples the free axis with the
    rectangle's orientation: a free theta-span is positive for eps = +1,
    a free phi-span for eps = -1.
    """
    if boundary(d):
        raise BoundaryNonEmpty("diagram has free vertices")
    thetas = d.occupied_thetas()
    phis = d.occupied_phis()
    flags = {}
    for r in d.rects:
        t_free = not _meets_open(r.theta, T.X)
        p_free = not _meets_open(r.phi, T.Y)
        e = eps[r]
        flags[r] = ThinFlags(
            theta_thin=t_free and not _meets_open(r.theta, thetas),
            phi_thin=p_free and not _meets_open(r.phi, phis),
            positively_prethin=(t_free and e == 1) or (p_free and e == -1),
            negatively_prethin=(t_free and e == -1) or (p_free and e == 1),
        )
    return ThinReport(flags)


def _corner_key(r: Rect):
    return tuple(sorted(r.corners()))


def _mirror(r: Rect) -> Rect:
    return Rect(Interval(r.theta2, r.theta1), Interval(r.phi2, r.phi1))


def _classified(d, eps, m: Move) -> Move:
    try:
        return replace(m, sign=classify_sign(d, eps, m))
    except UnclassifiableLeap:
        return m


def _bubble_at(d, eps, r_opp: Rect) -> Move:
    """The bubble reduction removing the complementary-band rectangle
    r_opp, with its two side partners found deterministically."""
    others = sorted((s for s in d.rects if s != r_opp), key=_corner_key)
    for s1 in others:
        for s2 in others:
            if s1 == s2:
                continue
            try:
                return bubble_reduce_move(d, eps, (s1, s2, r_opp))
            except MoveIllegal:
                continue
    raise MoveIllegal("no side partners for the bubble reduction")


def normalization_step(d: SurfaceDiagram, eps: dict, T: JoinTriangulation,
                       prefer_sign: int = 1):
    """One Case-1/2/3 rewriting step at an innermost thin rectangle.

    Returns (move, new diagram, new orientation).  Thin rectangles are
    tried by increasing free-axis width, ties broken by corner order; for
    the chosen one, a trivial spherical component is removed first
    (Case 1), otherwise the companion census selects a generalized
    wrinkle reduction (Case 2), a bubble reduction, or a generalized
    compression (Case 3).  A candidate whose rewritten region would
    collide with a remote part of the diagram is skipped in favor of the
    next innermost one.  prefer_sign is used only where a removal is a
    sphere bounding balls on both sides, which makes the step sign a free
    choice.
    """
    rep = thin_report(d, eps, T)
    if not rep.prethin_rects():
        raise NoPrethin("no pre-thin rectangle")
    candidates = []
    for r, f in rep.flags.items():
        if f.theta_thin:
            candidates.append((r.theta.length, _corner_key(r), 0, r, "vertical"))
        if f.phi_thin:
            candidates.append((r.phi.length, _corner_key(r), 1, r, "horizontal"))
    # pre-thin without thin contradicts the innermost argument
    assert candidates, "pre-thin rectangle present but no thin rectangle"
    last_err = None
    for _, _, _, r, axis in sorted(candidates):
        try:
            if _mirror(r) in set(d.rects):
                # Case 1: r and its mirror share all four corners, so they
                # form a trivial spherical component
                comp = next(c for c in connected_components(d) if r in c.rects)
                assert set(comp.rects) == {r, _mirror(r)}
                m = Move("SphereRemove", (r, _mirror(r)), (), sign=prefer_sign)
            else:
                band = r.theta if axis == "vertical" else r.phi
                companions = [
                    s
                    for s in d.rects
                    if s != r
                    and (s.theta == r.theta if axis == "vertical" else s.phi == r.phi)
                ]
                flipped = Interval(band.hi, band.lo)
                if axis == "vertical":
                    opposite = [s for s in d.rects if s.theta == flipped]
                else:
                    opposite = [s for s in d.rects if s.phi == flipped]
                if not companions:
                    m = wrinkle_move(d, eps, r, axis)  # Case 2
                elif opposite:
                    r_opp = min(opposite, key=_corner_key)
                    m = _bubble_at(d, eps, r_opp)  # Case 3, bubble branch
                else:
                    m = wrinkle_move(d, eps, r, axis)  # Case 3, compression
            m = _classified(d, eps, m)
            nd, neps, _ = apply_move(d, eps, m)
            return m, nd, neps
        except MoveIllegal as e:
            last_err = e
    raise MoveIllegal(f"no thin rectangle admits a legal step: {last_err}")


def normalize(d: SurfaceDiagram, eps: dict, T: JoinTriangulation,
              sign_policy: str = "any"):
    """Iterate normalization steps to a fixpoint with no pre-thin
    rectangles.

    sign_policy is one of "any", "require_positive", "require_negative";
    under a required sign the run aborts with SignViolation at the first
    step that classifies otherwise.  Terminates because every step
    strictly decreases the rectangle count.
    """
    if sign_policy not in ("any", "require_positive", "require_negative"):
        raise ValueError(f"unknown sign policy {sign_policy!r}")
    want = {"require_positive": 1, "require_negative": -1}.get(sign_policy)
    script = []
    while True:
        rep = thin_report(d, eps, T)
        if not rep.prethin_rects():
            break
        before = len(d.rects)
        m, nd, neps = normalization_step(d, eps, T, prefer_sign=want or 1)
        if want is not None and m.sign != want:
            raise SignViolation(len(script), m)
        assert len(nd.rects) < before  # termination measure
        d, eps = nd, neps
        script.append(m)
    return d, MoveScript(tuple(script))
