"""Small builtin diagrams used in tests, docs and the CLI."""

from __future__ import annotations

from fractions import Fraction

from .circle import Rect, rational
from .link import LinkDiagram

F = Fraction


def sigma_sphere(r: Rect | None = None, margin=F(1, 32)) -> tuple:
    """Six rectangles forming a sphere around the rectangle r.

    Two large collars inflate r in one coordinate while shrinking it in the
    other; four thin strips close the complement up.  Returned in a fixed
    order: (wide, tall, left strip, right strip, bottom strip, top strip).
    """
    if r is None:
        r = Rect.of(F(3, 8), F(5, 8), F(3, 8), F(5, 8))
    e = rational(margin)
    t1, t2, p1, p2 = r.theta1, r.theta2, r.phi1, r.phi2
    return (
        Rect.of(t1 - e, t2 + e, p1 + e, p2 - e),
        Rect.of(t1 + e, t2 - e, p1 - e, p2 + e),
        Rect.of(t1 - e, t1 + e, p2 + e, p1 - e),
        Rect.of(t2 - e, t2 + e, p2 + e, p1 - e),
        Rect.of(t2 + e, t1 - e, p1 - e, p1 + e),
        Rect.of(t2 + e, t1 - e, p2 - e, p2 + e),
    )


def sigma_signs(rects) -> dict:
    """One of the two orientations of a sigma_sphere diagram: the wide
    collar and the two vertical strips carry +1, the rest -1."""
    r1, r2, r3, r4, r5, r6 = rects
    return {r1: 1, r2: -1, r3: 1, r4: 1, r5: -1, r6: -1}


def unknot_link() -> LinkDiagram:
    """Square four-vertex diagram of the unknot."""
    return LinkDiagram(
        frozenset(
            {
                (F(1, 4), F(1, 4)),
                (F(1, 4), F(3, 4)),
                (F(3, 4), F(1, 4)),
                (F(3, 4), F(3, 4)),
            }
        )
    )


def nonorientable_chain() -> tuple:
    """Five pairwise compatible rectangles (a twisted band pattern) whose
    side constraints form an odd cycle, so no sign assignment exists.

    Each rectangle's right side lies on the meridian carrying the next
    rectangle's left side, forcing five sign alternations around a 5-cycle.
    """
    return tuple(
        Rect.of(F(i, 5), F(i + 1, 5), F(2 * i, 10), F(2 * i + 1, 10))
        for i in range(5)
    )
