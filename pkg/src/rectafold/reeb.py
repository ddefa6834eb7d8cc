"""The standard infinite-depth disc family, truncated at a finite depth K.

The diagram consists of a core rectangle r0 plus annular layers A_1, A_2,
... of eight rectangles each, accumulating on the four vertical/horizontal
lines through 3/16, 5/16, 11/16, 13/16 as the depth grows.  The truncation
D_K = {r0} u A_1 u ... u A_K is a disc with 8K+1 rectangles whose boundary
is a square unknot diagram.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .circle import Rect
from .surface import SurfaceDiagram

F = Fraction


def layer(k: int) -> tuple:
    """The eight rectangles of the k-th annular layer (k >= 1), indexed
    8k-7 .. 8k in the conventional numbering."""
    e3 = F(1, 2 ** (k + 3))
    e4 = F(1, 2 ** (k + 4))
    a, b = F(3, 16), F(5, 16)
    c, d = F(11, 16), F(13, 16)
    return (
        Rect.of(a - e3, b + e3, d + e3, a - e3),  # 8k-7
        Rect.of(c - e3, d + e3, d + e3, a - e3),  # 8k-6
        Rect.of(d + e3, a - e3, a - e3, b + e3),  # 8k-5
        Rect.of(d + e3, a - e3, c - e3, d + e3),  # 8k-4
        Rect.of(a - e3, b + e4, b + e3, c - e3),  # 8k-3
        Rect.of(c - e4, d + e3, b + e3, c - e3),  # 8k-2
        Rect.of(b + e4, c - e4, a - e4, b + e3),  # 8k-1
        Rect.of(b + e4, c - e4, c - e3, d + e4),  # 8k
    )


def core() -> Rect:
    return Rect.of(F(3, 8), F(5, 8), F(1, 8), F(7, 8))


def rect_by_index(i: int) -> Rect:
    """r_i in the conventional numbering: r_0 the core, r_{8k-7}..r_{8k}
    the k-th layer."""
    if i == 0:
        return core()
    k = (i + 7) // 8
    return layer(k)[(i + 7) % 8]


def sign_by_index(i: int) -> int:
    """-1 for indices 1,2,5,6 mod 8; +1 for 0,3,4,7 mod 8."""
    return -1 if i % 8 in (1, 2, 5, 6) else 1


def disc(K: int) -> tuple:
    """(SurfaceDiagram, eps) for the depth-K truncation D_K."""
    rects = [core()]
    eps = {core(): 1}
    for k in range(1, K + 1):
        for j, r in enumerate(layer(k)):
            rects.append(r)
            eps[r] = sign_by_index(8 * k - 7 + j)
    return SurfaceDiagram(tuple(rects)), eps


@dataclass(frozen=True)
class DeformedDisc:
    diagram: SurfaceDiagram
    eps: dict
    image_of: dict  # original Rect -> deformed Rect


def _deform_coord(x: F, t: int) -> F:
    """The time-t flow on coordinates: points 3/16 - 1/2^k, 5/16 + 1/2^k,
    11/16 - 1/2^k, 13/16 + 1/2^k (k >= 4) move to exponent k - t;
    everything else is fixed."""
    for base, direction in (
        (F(3, 16), -1),
        (F(5, 16), 1),
        (F(11, 16), -1),
        (F(13, 16), 1),
    ):
        d = (x - base) * direction
        num, den = d.numerator, d.denominator
        if num == 1 and den >= 16 and den & (den - 1) == 0:
            k = den.bit_length() - 1
            return base + direction * F(1, 2 ** (k - t))
    return x


def deform(d: SurfaceDiagram, eps: dict, t: int) -> DeformedDisc:
    """Apply the time-t coordinate flow to every rectangle.

    At t = 1 the flow carries layer k+1 onto layer k, so the image of a
    depth-K disc is layers 1..K-1 together with nine super-scale images of
    the core and the outermost layer; the four-move bubble chain carries
    it back to the depth-(K-1) disc.
    """
    new_rects = []
    new_eps = {}
    image = {}
    for r in d.rects:
        nr = Rect.of(
            _deform_coord(r.theta1, F(t)),
            _deform_coord(r.theta2, F(t)),
            _deform_coord(r.phi1, F(t)),
            _deform_coord(r.phi2, F(t)),
        )
        new_rects.append(nr)
        new_eps[nr] = eps[r]
        image[r] = nr
    return DeformedDisc(SurfaceDiagram(tuple(new_rects)), new_eps, image)


R_I = Rect.of(F(1, 16), F(15, 16), F(15, 16), F(1, 16))
R_II = Rect.of(F(15, 16), F(1, 16), F(9, 16), F(7, 16))
R_III = Rect.of(F(5, 8), F(3, 8), F(7, 16), F(9, 16))


def bubble_chain(K: int):
    """(start diagram, start eps, MoveScript) merging the super-scale
    images in the time-1 flow of a depth-K disc back pairwise, ending at
    the depth-(K-1) disc.  Each step is a positive bubble reduction."""
    from dataclasses import replace

    from .moves import MoveScript, apply_move, bubble_reduce_move, classify_sign

    d, eps = disc(K)
    dd = deform(d, eps, 1)
    f = lambda i: dd.image_of[rect_by_index(i)]
    cur_d, cur_eps = dd.diagram, dd.eps
    script = []
    merged = [R_I, R_II, R_III, core()]
    trios = [
        (f(0), f(1), f(2)),
        (R_I, f(3), f(4)),
        (R_II, f(5), f(6)),
        (R_III, f(7), f(8)),
    ]
    for trio, target in zip(trios, merged):
        m = bubble_reduce_move(cur_d, cur_eps, trio)
        assert m.added[0][0] == target
        m = replace(m, sign=classify_sign(cur_d, cur_eps, m))
        cur_d, cur_eps, _ = apply_move(cur_d, cur_eps, m)
        script.append(m)
    return dd.diagram, dd.eps, MoveScript(tuple(script))


def tube_layer() -> tuple:
    """The first layer with both scale offsets collapsed to zero: the eight
    rectangles of the tube of the square unknot at distance 1/16."""
    a, b = F(3, 16), F(5, 16)
    c, d = F(11, 16), F(13, 16)
    return (
        Rect.of(a, b, d, a),
        Rect.of(c, d, d, a),
        Rect.of(d, a, a, b),
        Rect.of(d, a, c, d),
        Rect.of(a, b, b, c),
        Rect.of(c, d, b, c),
        Rect.of(b, c, a, b),
        Rect.of(b, c, c, d),
    )


def reeb_foliation():
    """The foliation diagram of the depth-1 disc: nine packs running from
    the core rectangle and the tube of the square unknot (at distance
    1/16) out to the nine rectangles of the time-1 flow, certified by the
    four-move bubble chain.

    Every corner trajectory is a straight segment, so each pack is given
    by its endpoint rectangles and two-point corner arcs.
    """
    from .examples import unknot_link
    from .packs import FoliationDiagram, SlopedArc, pack_from_three_arcs

    def lift(a, x):
        d = (x - a) % 1
        return a + (d if d <= F(1, 2) else d - 1)

    def seg(p, q):
        return SlopedArc((p, (lift(p[0], q[0]), lift(p[1], q[1]))))

    def straight_pack(first, last):
        return pack_from_three_arcs(
            first,
            last,
            seg(first.bl, last.bl),
            seg(first.br, last.br),
            seg(first.tl, last.tl),
        )

    d, eps = disc(1)
    dd = deform(d, eps, 1)
    firsts = (core(),) + tube_layer()
    packs = tuple(
        straight_pack(firsts[i], dd.image_of[rect_by_index(i)]) for i in range(9)
    )
    _, _, script = bubble_chain(1)
    return FoliationDiagram(packs, unknot_link(), F(1, 16), script)
