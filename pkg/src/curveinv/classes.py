"""Equivalence classes of singular configurations.

A configuration is a diagram plus the locus where the degenerate point sits
mid-move: a triangular face about to collapse (triple point) or a pair of
marked arc points about to touch (self-tangency).  The diagram itself stays
generic; classes are reconstructed combinatorially from the locus.

* triple point   -> ordered triple of the loop words between consecutive
                    visits, canonical under simultaneous conjugation and
                    cyclic rotation.
* direct tangency-> pair of unit-tangent lifts of the two loops at the
                    touch (fiber = whole turns), canonical under conjugation
                    and swap.
* inverse tangency-> same with lifts into the projectivized bundle; fibers
                    are counted in doubled half-turn units, so they are odd
                    integers on orientation preserving loops.

Canonical class strings are ``T:(w1;w2;w3)``, ``T+:(u1;u2)``, ``T-:(u1;u2)``
with fibered words printed as ``word|fiber``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .curves import (
    Arc,
    CurveDiagram,
    DiagramError,
    Face,
    LiftAccumulator,
    arc_qfrac,
    arc_range,
    arc_rotation,
    face_corners,
    find_face,
    visits,
    visits_of,
)
from .groups import (
    ClassTuple,
    FiberedWord,
    GroupWord,
    canonicalize_tuple,
    parse_fibered,
    parse_word,
)


@dataclass(frozen=True)
class Mark:
    """A marked interior point of an arc.

    ``cut`` splits the label letters; ``rot_before`` is the exact rotation in
    quarter units accumulated from the arc's source to the mark, whose frame
    is the curve's direction there.
    """

    arc: int
    cut: int
    rot_before: int


@dataclass(frozen=True)
class SingularConfig:
    kind: str                      # triple | direct | inverse
    diagram: CurveDiagram
    face: Optional[str] = None     # triple locus
    marks: Optional[tuple[Mark, Mark]] = None   # tangency locus
    sigma: int = 1                 # half-turn sense of an inverse contact


def mark_from_pre(d: CurveDiagram, arc: int, cut: int, pre: int) -> Mark:
    """Mark at label position ``cut`` with ``pre`` whole turns before it."""
    a = d.arcs[arc]
    j = a.src[1] if a.src is not None else 0
    return Mark(arc, cut, 4 * pre + ((-j) % 4))


def _split_label(a: Arc, cut: int) -> tuple[GroupWord, GroupWord]:
    model = a.label.model
    return (GroupWord(model, a.label.letters[:cut]),
            GroupWord(model, a.label.letters[cut:]))


def _loop_between_marks(d: CurveDiagram, m1: Mark, m2: Mark) -> tuple[GroupWord, int, int]:
    """Word, rotation and mirror of the curve piece from m1 forward to m2.

    Rotation is accumulated in the frame of m1, reading m2's frame as
    aligned; both marks may sit on the same arc (m1 before m2).
    """
    acc = LiftAccumulator(d.surface)
    a1 = d.arcs[m1.arc]
    if m1.arc == m2.arc and (m1.cut, m1.rot_before) < (m2.cut, m2.rot_before):
        mid = GroupWord(d.surface, a1.label.letters[m1.cut:m2.cut])
        acc.add(mid, m2.rot_before - m1.rot_before)
        return acc.word, acc.quarters, acc.mirror
    before1, after1 = _split_label(a1, m1.cut)
    # piece of the first arc past the mark, measured from the mark's frame
    rot_after = before1.char() * (arc_rotation(a1) - m1.rot_before)
    acc.add(after1, rot_after)
    k = d.next_index(m1.arc)
    while k != m2.arc:
        acc.add_arc(d.arcs[k])
        k = d.next_index(k)
    before2, _ = _split_label(d.arcs[m2.arc], m2.cut)
    acc.add(before2, m2.rot_before)
    return acc.word, acc.quarters, acc.mirror


def tangency_class(d: CurveDiagram, kind: str, m1: Mark, m2: Mark,
                   sigma: int = 1) -> ClassTuple:
    """T+ or T- class of the tangency about to happen at the two marks.

    The first loop runs from m1 forward to m2, the second the other way
    around.  Fibers are whole turns for a direct contact.  For an inverse
    contact each loop closes through an extra half turn whose sense is the
    configuration bit ``sigma``: fibers are (rotation +- 2*sigma)/2 in
    doubled half-turn units, odd on orientation preserving loops.
    """
    if kind not in ("direct", "inverse"):
        raise DiagramError(f"tangency kind must be direct or inverse, not {kind!r}")
    if sigma not in (1, -1):
        raise DiagramError("sigma must be +1 or -1")
    w1, s1, mir1 = _loop_between_marks(d, m1, m2)
    w2, s2, mir2 = _loop_between_marks(d, m2, m1)
    if s1 % 4 or s2 % 4:
        raise DiagramError(f"marks are not a {kind} tangency locus")
    if kind == "direct":
        pair = [FiberedWord(w1, s1 // 4), FiberedWord(w2, s2 // 4)]
    else:
        pair = [FiberedWord(w1, (s1 + 2 * sigma) // 2),
                FiberedWord(w2, (s2 - 2 * sigma) // 2)]
    return canonicalize_tuple(pair, "swap")


# ---------------------------------------------------------------------------
# triple classes


def _slide_label_off(labels: list[GroupWord], d: CurveDiagram, side: int) -> None:
    """Make side arc ``side`` label-trivial by sliding its head crossing back
    along the side band; neighbours absorb the label."""
    u = labels[side]
    if not u:
        return
    head = d.arcs[side].dst[0]
    nxt = d.next_index(side)
    labels[nxt] = u * labels[nxt]
    va, vb = visits_of(d, head)
    other = va if d.arcs[side].dst[1] != va.in_slot else vb
    if d.arcs[other.arc_in].dst[1] == d.arcs[side].dst[1]:
        other = vb if other is va else va
    labels[other.arc_in] = labels[other.arc_in] * u.inverse()
    labels[other.arc_out] = u * labels[other.arc_out]
    labels[side] = d.surface.identity()


def triple_loop_words(d: CurveDiagram, face: Face) -> tuple[GroupWord, GroupWord, GroupWord]:
    """Loop words of the collapsing triangle, in visit (traversal) order."""
    if len(face) != 3:
        raise DiagramError("triple locus must be a triangular face")
    sides = sorted(set(face.arcs()))
    if len(sides) != 3:
        raise DiagramError("degenerate triangle: repeated side arc")
    corners = {c for c, _ in face_corners(d, face)}
    if len(corners) != 3:
        raise DiagramError("degenerate triangle: repeated corner")

    labels = [a.label for a in d.arcs]
    for s in sides[:2]:
        _slide_label_off(labels, d, s)
    # slide the first two sides off; a vanishing triangle then has a trivial
    # third side
    if labels[sides[2]]:
        raise DiagramError("face does not bound a vanishing triangle "
                           "(side labels are not simultaneously trivial)")

    order = sorted(sides, key=lambda k: (k - d.basepoint) % len(d.arcs))
    words = []
    for i in range(3):
        here, nxt = order[i], order[(i + 1) % 3]
        word = d.surface.identity()
        k = d.next_index(here)
        while k != nxt:
            word = word * labels[k]
            k = d.next_index(k)
        words.append(word)
    return tuple(words)


def t_class(config: SingularConfig) -> ClassTuple:
    """T-class of a generic curve with a triple point."""
    if config.kind != "triple":
        raise DiagramError(f"t_class needs a triple locus, got {config.kind!r}")
    d = config.diagram
    words = triple_loop_words(d, find_face(d, config.face))
    return canonicalize_tuple(words, "cyclic")


def tplus_class(config: SingularConfig) -> ClassTuple:
    if config.kind != "direct":
        raise DiagramError(f"tplus_class needs a direct locus, got {config.kind!r}")
    return tangency_class(config.diagram, "direct", *config.marks)


def tminus_class(config: SingularConfig) -> ClassTuple:
    if config.kind != "inverse":
        raise DiagramError(f"tminus_class needs an inverse locus, got {config.kind!r}")
    return tangency_class(config.diagram, "inverse", *config.marks, sigma=config.sigma)


def class_of_event(event) -> ClassTuple:
    """The stored canonical class of a strata event."""
    return event.cls


# ---------------------------------------------------------------------------
# class strings


_PREFIX = {"triple": "T", "direct": "T+", "inverse": "T-"}


def class_string(stratum: str, cls: ClassTuple) -> str:
    body = ";".join(str(w) for w in cls.words)
    return f"{_PREFIX[stratum]}:({body})"


def parse_class_string(model, text: str) -> tuple[str, ClassTuple]:
    head, _, body = text.partition(":")
    stratum = {v: k for k, v in _PREFIX.items()}.get(head)
    if stratum is None or not body.startswith("(") or not body.endswith(")"):
        raise DiagramError(f"bad class string {text!r}")
    parts = body[1:-1].split(";")
    if stratum == "triple":
        if len(parts) != 3:
            raise DiagramError(f"triple class needs 3 words: {text!r}")
        words = [parse_word(model, p) for p in parts]
        return stratum, canonicalize_tuple(words, "cyclic")
    if len(parts) != 2:
        raise DiagramError(f"tangency class needs 2 words: {text!r}")
    words = [parse_fibered(model, p) for p in parts]
    return stratum, canonicalize_tuple(words, "swap")
