"""Perturbation moves on curve diagrams and the strata events they emit.

Move kinds:

* ``tangency-birth``  -- push two distinct arcs through a direct or inverse
                         self-tangency; creates two crossings bounding a lens.
* ``tangency-death``  -- collapse an empty lens face; kills its two crossings.
* ``triple``          -- slide one branch of a vanishing triangle across the
                         opposite corner; crossings survive, their order along
                         each strand swaps.
* ``kink-pair-birth`` -- create two adjacent opposite curls on one arc (one
                         inverse self-tangency of the fold with the strand).
* ``kink-pair-death`` -- cancel two adjacent opposite curls.
* ``kink-slide-step`` -- carry a small curl through the next crossing along
                         the curve; a packaged (tangency-birth, triple,
                         tangency-death) whose three events are emitted in
                         order.

Every ``apply`` is a pure function returning the rewritten diagram, the
emitted events and a realized inverse move; applying the inverse restores
the original diagram up to crossing renaming (exactly, for the primitive
moves).  Signs follow the coorientation: tangency crossings are positive
when the double-point count grows, triple crossings when the newborn
vanishing triangle has positive sign ``(-1)^q``.

All slot tables below are written in the birth's contact chart: segment 1
runs east through the contact, slot rays are counterclockwise, and the
chart of each new crossing is anchored with segment 1 entering at slot 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .classes import Mark, class_string, mark_from_pre, tangency_class, triple_loop_words
from .curves import (
    Arc,
    CurveDiagram,
    DiagramError,
    Face,
    LiftAccumulator,
    arc_qfrac,
    arc_rotation,
    canonical_key,
    face_corners,
    face_name,
    faces,
    find_face,
    require_valid,
    reverse_diagram,
    solve_turning,
    visits,
    visits_of,
)
from .groups import ClassTuple, GroupWord, canonicalize_tuple

MOVE_KINDS = ("tangency-birth", "tangency-death", "triple",
              "kink-pair-birth", "kink-pair-death", "kink-slide-step")


class MoveError(DiagramError):
    """Raised when a move's location is invalid in the given diagram."""


@dataclass(frozen=True)
class Move:
    kind: str
    # tangency-birth; rot1/rot2 override pre1/pre2 with exact quarter-turn
    # rotations from the arc source to the contact point
    tang_kind: Optional[str] = None
    arc1: Optional[int] = None
    cut1: int = 0
    pre1: int = 0
    rot1: Optional[int] = None
    arc2: Optional[int] = None
    cut2: int = 0
    pre2: int = 0
    rot2: Optional[int] = None
    side: str = "left"
    # tangency-death / triple
    face: Optional[str] = None
    # kink moves
    arc: Optional[int] = None
    cut: int = 0
    pre: int = 0
    rot: Optional[int] = None
    chi: int = 1
    c1: Optional[str] = None
    c2: Optional[str] = None
    crossing: Optional[str] = None
    direction: str = "forward"
    # internal composites (realized inverses of packaged moves)
    parts: Optional[tuple] = None


@dataclass(frozen=True)
class StrataEvent:
    stratum: str           # triple | direct | inverse
    sign: int
    cls: ClassTuple

    def __str__(self) -> str:
        return f"{self.stratum} {self.sign:+d} {class_string(self.stratum, self.cls)}"


@dataclass(frozen=True)
class ApplyResult:
    diagram: CurveDiagram
    events: tuple[StrataEvent, ...]
    inverse: Move


@dataclass(frozen=True)
class MovePath:
    initial: CurveDiagram
    moves: tuple[Move, ...]

    def run(self) -> tuple[CurveDiagram, tuple[StrataEvent, ...]]:
        return run_path(self.initial, self.moves)


def run_path(d: CurveDiagram, moves: Sequence[Move]):
    events: list[StrataEvent] = []
    for m in moves:
        res = apply_move(d, m)
        d = res.diagram
        events.extend(res.events)
    return d, tuple(events)


def inverse(m: Move, realized: Optional[ApplyResult] = None) -> Move:
    """Inverse move; for location-bearing kinds the realized result of the
    forward application carries the exact inverse."""
    if realized is not None:
        return realized.inverse
    if m.kind == "kink-pair-birth":
        return Move("kink-pair-death")   # locations resolved by apply
    if m.kind == "kink-slide-step":
        return Move("kink-slide-step", crossing=m.crossing,
                    direction="backward" if m.direction == "forward" else "forward")
    raise MoveError(f"inverse of {m.kind} needs the realized application")


# ---------------------------------------------------------------------------
# shared surgery helpers


def _fresh_names(d: CurveDiagram, n: int, prefix: str = "t") -> list[str]:
    used = set(d.crossings)
    out = []
    i = 0
    while len(out) < n:
        name = f"{prefix}{i}"
        if name not in used:
            used.add(name)
            out.append(name)
        i += 1
    return out


def _rebuild(d: CurveDiagram, pieces: dict[int, list[Arc]],
             crossings: tuple[str, ...]) -> tuple[CurveDiagram, dict[int, int]]:
    """Replace arcs[i] by pieces[i] (a run of consecutive arcs); returns the
    new diagram plus a map old-index -> index of the first piece."""
    arcs: list[Arc] = []
    index_map: dict[int, int] = {}
    for i, a in enumerate(d.arcs):
        index_map[i] = len(arcs)
        arcs.extend(pieces.get(i, [a]))
    bp = index_map.get(d.basepoint, 0)
    return CurveDiagram(d.surface, crossings, tuple(arcs), bp), index_map


def _split_word(w: GroupWord, cut: int) -> tuple[GroupWord, GroupWord]:
    return (GroupWord(w.model, w.letters[:cut]), GroupWord(w.model, w.letters[cut:]))


def _tail_rotation(a: Arc, head_rotation: int, head_char: int) -> int:
    """Rotation of the piece after a split, from r(arc) = r1 + eps1 * r2."""
    return head_char * (arc_rotation(a) - head_rotation)


def regauge_crossing(d: CurveDiagram, c: str, shift: int) -> CurveDiagram:
    """Rotate the chart of one crossing; observables are unchanged because
    every loop enters and leaves the chart equally often."""
    shift %= 4
    if shift == 0:
        return d

    def m(dart):
        if dart is None or dart[0] != c:
            return dart
        return (c, (dart[1] + shift) % 4)

    arcs = tuple(Arc(m(a.src), m(a.dst), a.label, a.turning) for a in d.arcs)
    return replace(d, arcs=arcs)


def delete_crossings(d: CurveDiagram, kill: set[str]):
    """Smooth out the passages at the killed crossings, merging arcs.

    Returns (diagram, merge marks) where merge marks locate the old killed
    passages inside the merged arcs as (new arc position, letters consumed,
    rotation consumed) triples keyed by old arc index.
    """
    n = len(d.arcs)
    start = None
    for k in range(n):
        i = (d.basepoint + k) % n
        if d.arcs[i].src is not None and d.arcs[i].src[0] not in kill:
            start = i
            break
    new_crossings = tuple(c for c in d.crossings if c not in kill)
    marks: dict[int, tuple[int, int, int]] = {}

    if start is None:
        # every crossing dies; the result is a free circle
        acc = LiftAccumulator(d.surface)
        letters_seen = 0
        for k in range(n):
            i = (d.basepoint + k) % n
            marks[i] = (0, letters_seen, acc.quarters)
            acc.add_arc(d.arcs[i])
            letters_seen += len(d.arcs[i].label.letters)
        if acc.quarters % 4:
            raise MoveError("inconsistent rotation data while removing crossings")
        circle = Arc(None, None, acc.word, acc.quarters // 4)
        return CurveDiagram(d.surface, (), (circle,), 0), marks

    arcs: list[Arc] = []
    acc = LiftAccumulator(d.surface)
    seg_src = d.arcs[start].src
    letters_seen = 0
    for k in range(n):
        i = (start + k) % n
        a = d.arcs[i]
        marks[i] = (len(arcs), letters_seen, acc.quarters)
        acc.add_arc(a)
        letters_seen += len(a.label.letters)
        if a.dst[0] in kill:
            continue
        q = arc_qfrac(Arc(seg_src, a.dst, acc.word, 0))
        arcs.append(Arc(seg_src, a.dst, acc.word, solve_turning(acc.quarters, q)))
        acc = LiftAccumulator(d.surface)
        letters_seen = 0
        seg_src = (a.dst[0], (a.dst[1] + 2) % 4)
    out = CurveDiagram(d.surface, new_crossings, tuple(arcs), 0)
    # put the basepoint on the arc holding the old basepoint position
    out = replace(out, basepoint=marks[d.basepoint][0] % len(arcs))
    marks = {i: (p % len(arcs), c, r) for i, (p, c, r) in marks.items()}
    return out, marks


# ---------------------------------------------------------------------------
# tangency birth

# contact-chart slot tables: seg1 enters slot 2 and leaves slot 0 at both new
# crossings; seg2's in-slot depends on the kind and on the side of seg1 that
# seg2 lies on.  u is the first crossing along seg1, w the second; for a
# direct contact seg2 also runs u -> w, for an inverse one w -> u.
_SEG2_IN = {
    ("direct", "left"): (1, 3),    # (at u, at w)
    ("direct", "right"): (3, 1),
    ("inverse", "left"): (3, 1),
    ("inverse", "right"): (1, 3),
}


def apply_tangency_birth(d: CurveDiagram, m: Move) -> ApplyResult:
    if m.tang_kind not in ("direct", "inverse"):
        raise MoveError(f"tangency kind must be direct or inverse, got {m.tang_kind!r}")
    if m.side not in ("left", "right"):
        raise MoveError(f"side must be left or right, got {m.side!r}")
    if m.arc1 is None or m.arc2 is None:
        raise MoveError("tangency-birth needs arc1 and arc2")
    i1, i2 = m.arc1 % len(d.arcs), m.arc2 % len(d.arcs)
    if i1 == i2:
        raise MoveError("self-tangency of one arc is packaged as kink-pair-birth")
    a1, a2 = d.arcs[i1], d.arcs[i2]
    for a, cut in ((a1, m.cut1), (a2, m.cut2)):
        if not 0 <= cut <= len(a.label.letters):
            raise MoveError("cut position outside the arc label")
    if a1.src is None or a2.src is None:
        raise MoveError("tangency-birth needs arcs with crossings on both ends")

    mark1 = (Mark(i1, m.cut1, m.rot1) if m.rot1 is not None
             else mark_from_pre(d, i1, m.cut1, m.pre1))
    mark2 = (Mark(i2, m.cut2, m.rot2) if m.rot2 is not None
             else mark_from_pre(d, i2, m.cut2, m.pre2))
    cls = tangency_class(d, m.tang_kind, mark1, mark2)
    event = StrataEvent(m.tang_kind, +1, cls)

    u, w = _fresh_names(d, 2)
    base_s2u, base_s2w = _SEG2_IN[(m.tang_kind, m.side)]

    p1, s1 = _split_word(a1.label, m.cut1)
    q1, r1 = _split_word(a2.label, m.cut2)
    one = d.surface.identity()
    tail1 = _tail_rotation(a1, mark1.rot_before, p1.char())
    tail2 = _tail_rotation(a2, mark2.rot_before, q1.char())

    # gauge the two new charts so that every piece turning lands on the whole
    # turn grid; the residues of the marks pin the shifts uniquely
    built = None
    for du in range(4):
        for dw in range(4):
            head1 = Arc(a1.src, (u, (2 + du) % 4), p1, 0)
            mid1 = Arc((u, du), (w, (2 + dw) % 4), one, 0)
            last1 = Arc((w, dw), a1.dst, s1, 0)
            s2u = (base_s2u + du) % 4
            s2w = (base_s2w + dw) % 4
            if m.tang_kind == "direct":
                head2 = Arc(a2.src, (u, s2u), q1, 0)
                mid2 = Arc((u, (s2u + 2) % 4), (w, s2w), one, 0)
                last2 = Arc((w, (s2w + 2) % 4), a2.dst, r1, 0)
            else:
                head2 = Arc(a2.src, (w, s2w), q1, 0)
                mid2 = Arc((w, (s2w + 2) % 4), (u, s2u), one, 0)
                last2 = Arc((u, (s2u + 2) % 4), a2.dst, r1, 0)
            solves = [(head1, mark1.rot_before), (last1, tail1),
                      (head2, mark2.rot_before), (last2, tail2)]
            if any((r - arc_qfrac(x)) % 4 for x, r in solves):
                continue
            seg1 = [replace(head1, turning=solve_turning(mark1.rot_before, arc_qfrac(head1))),
                    mid1,
                    replace(last1, turning=solve_turning(tail1, arc_qfrac(last1)))]
            seg2 = [replace(head2, turning=solve_turning(mark2.rot_before, arc_qfrac(head2))),
                    mid2,
                    replace(last2, turning=solve_turning(tail2, arc_qfrac(last2)))]
            built = (seg1, seg2)
            break
        if built:
            break
    if built is None:
        raise MoveError("marks admit no consistent contact chart")
    seg1, seg2 = built

    out, index_map = _rebuild(d, {i1: seg1, i2: seg2}, d.crossings + (u, w))
    require_valid(out)
    hint = {index_map[i1] + 1, index_map[i2] + 1}
    lens = _face_with_corners(out, {u, w}, size=2, sides_hint=hint)
    inv = Move("tangency-death", face=face_name(out, lens))
    return ApplyResult(out, (event,), inv)


# ---------------------------------------------------------------------------
# tangency death


def _face_with_corners(d: CurveDiagram, corners: set[str], size: int,
                       sides_hint: Optional[set[int]] = None) -> Face:
    found = [f for f in faces(d)
             if len(f) == size and {c for c, _ in face_corners(d, f)} == corners]
    if sides_hint is not None:
        preferred = [f for f in found if set(f.arcs()) == sides_hint]
        if preferred:
            found = preferred
    if not found:
        raise MoveError(f"no {size}-sided face with corners {sorted(corners)}")
    return found[0]


def _check_lens(d: CurveDiagram, f: Face) -> tuple[str, str, str]:
    """Validate an empty lens; returns (kind, u, w)."""
    if len(f) != 2:
        raise MoveError("tangency-death needs a two-sided face")
    cs = [c for c, _ in face_corners(d, f)]
    if cs[0] == cs[1]:
        raise MoveError("lens corners must be two distinct crossings")
    s1, s2 = f.pieces
    if d.arcs[s1.arc].label or d.arcs[s2.arc].label:
        raise MoveError("arcs do not bound an empty bigon (labelled sides)")
    kind = "direct" if s1.forward != s2.forward else "inverse"
    return kind, cs[0], cs[1]


def apply_tangency_death(d: CurveDiagram, m: Move) -> ApplyResult:
    if m.face is None:
        raise MoveError("tangency-death needs a face")
    f = find_face(d, m.face)
    kind, u, w = _check_lens(d, f)
    side_arcs = sorted(f.arcs())
    out, marks = delete_crossings(d, {u, w})
    require_valid(out)

    # the two dying strands: locate the merge marks of the side arcs and turn
    # them into birth parameters on the merged diagram
    births = []
    for s in side_arcs:
        pos, letters, rot = marks[s]
        births.append((pos, letters, rot))
    (b1_arc, b1_cut, b1_rot), (b2_arc, b2_cut, b2_rot) = births
    cls = tangency_class(out, kind, Mark(b1_arc, b1_cut, b1_rot),
                         Mark(b2_arc, b2_cut, b2_rot))
    event = StrataEvent(kind, -1, cls)

    inv = _rediscover_birth(out, d, kind, births)
    return ApplyResult(out, (event,), inv)


def _rediscover_birth(post: CurveDiagram, pre: CurveDiagram, kind: str, births) -> Move:
    (b1_arc, b1_cut, b1_rot), (b2_arc, b2_cut, b2_rot) = births
    want = canonical_key(pre)
    fallback = None
    for side in ("left", "right"):
        cand = Move("tangency-birth", tang_kind=kind, arc1=b1_arc, cut1=b1_cut,
                    rot1=b1_rot, arc2=b2_arc, cut2=b2_cut, rot2=b2_rot, side=side)
        try:
            res = apply_tangency_birth(post, cand)
        except (MoveError, DiagramError):
            continue
        fallback = fallback or cand
        if canonical_key(res.diagram) == want:
            return cand
    if fallback is None:
        raise MoveError("could not reconstruct the inverse tangency-birth")
    # the diagrams differ only by gauge; either side restores the curve
    return fallback


# ---------------------------------------------------------------------------
# triple


def triangle_sign(d: CurveDiagram, face_id: str) -> tuple[int, int]:
    """Sign (-1)^q of the triangle: q counts sides whose own direction
    agrees with the orientation induced by the cyclic visit order."""
    f = find_face(d, face_id)
    if len(f) != 3:
        raise MoveError("triangle sign needs a three-sided face")
    arcs_in_walk = [p.arc for p in f.pieces]
    if len(set(arcs_in_walk)) != 3:
        raise MoveError("degenerate triangle")
    n = len(d.arcs)
    pos = {a: (a - d.basepoint) % n for a in arcs_in_walk}
    a, b, c = arcs_in_walk
    matches = (pos[b] - pos[a]) % n < (pos[c] - pos[a]) % n
    forwards = sum(1 for p in f.pieces if p.forward)
    q = forwards if matches else 3 - forwards
    return (-1) ** q, q


def apply_triple(d: CurveDiagram, m: Move) -> ApplyResult:
    if m.face is None:
        raise MoveError("triple needs a face")
    f = find_face(d, m.face)
    if len(f) != 3:
        raise MoveError("triple move needs a triangular face")
    side_arcs = list(dict.fromkeys(f.arcs()))
    corners = {c for c, _ in face_corners(d, f)}
    if len(side_arcs) != 3 or len(corners) != 3:
        raise MoveError("triple move needs three distinct sides and corners")
    for s in side_arcs:
        if d.arcs[s].label:
            raise MoveError("triangle sides must carry trivial labels; "
                            "slide labels off the triangle first")

    words = triple_loop_words(d, f)
    cls = canonicalize_tuple(words, "cyclic")

    n = len(d.arcs)
    for s in side_arcs:
        if (s + 1) % n in side_arcs or (s - 1) % n in side_arcs:
            raise MoveError("triangle with traversal-adjacent sides is not supported")
    updates: dict[tuple[int, str], tuple] = {}
    side_info = []
    for s in side_arcs:
        a = d.arcs[s]
        i_in, i_out = (s - 1) % n, (s + 1) % n
        p_slot = (a.src[1] - 2) % 4          # strand in-slot at the tail corner
        q_slot = a.dst[1]                    # strand in-slot at the head corner
        P, Q = a.src[0], a.dst[0]
        updates[(i_in, "dst")] = (Q, q_slot)
        updates[(s, "src")] = (Q, (q_slot + 2) % 4)
        updates[(s, "dst")] = (P, p_slot)
        updates[(i_out, "src")] = (P, (p_slot + 2) % 4)
        side_info.append((s, i_in, i_out))

    arcs = list(d.arcs)
    for (idx, fld), dart in updates.items():
        arcs[idx] = replace(arcs[idx], **{fld: dart})

    # conservation: outer turnings are kept, each side turning absorbs the
    # fraction changes of its strand (always an exact quarter multiple)
    for s, i_in, i_out in side_info:
        pre_chain = (arc_rotation(d.arcs[i_in])
                     + d.arcs[i_in].char() * arc_rotation(d.arcs[s])
                     + d.arcs[i_in].char() * arc_rotation(d.arcs[i_out]))
        eps_in = arcs[i_in].char()
        known = arc_rotation(arcs[i_in]) + eps_in * arc_rotation(arcs[i_out])
        r_side = (pre_chain - known) * eps_in
        arcs[s] = replace(arcs[s], turning=solve_turning(r_side, arc_qfrac(arcs[s])))

    out = CurveDiagram(d.surface, d.crossings, tuple(arcs), d.basepoint)
    require_valid(out)
    new_face = _face_with_corners(out, corners, size=3)
    sign, _ = triangle_sign(out, face_name(out, new_face))
    event = StrataEvent("triple", sign, cls)
    inv = Move("triple", face=face_name(out, new_face))
    return ApplyResult(out, (event,), inv)


# ---------------------------------------------------------------------------
# kink pair birth / death

# curl templates, carrier entering at slot 2: a counterclockwise curl (chi
# +1) departs into its loop at slot 0 and takes the loop back in at slot 1;
# the mirrored curl returns at slot 3.  Loop turnings +1 / -1 follow from
# the closure corner.


def _curl_loop_dst_slot(chi: int) -> int:
    return 1 if chi > 0 else 3


def _curl_cont_src_slot(chi: int) -> int:
    return 3 if chi > 0 else 1


def _curl_loop_turning(chi: int) -> int:
    return 0 if chi > 0 else -1


def kink_birth_class(d: CurveDiagram, mark: Mark, chi: int) -> ClassTuple:
    """Class of the inverse tangency where a fold meets its strand: the
    finger is contractible with a half-turn lift, the other loop is the
    whole curve; fibers in doubled half-turn units."""
    from .classes import _loop_between_marks
    from .groups import FiberedWord

    nudge = Mark(mark.arc, mark.cut, mark.rot_before)
    word, s_raw, _ = _loop_between_marks(d, nudge, nudge)
    finger = FiberedWord(d.surface.identity(), chi)
    rest = FiberedWord(word, (s_raw - 2 * chi) // 2)
    return canonicalize_tuple([finger, rest], "swap")


def apply_kink_pair_birth(d: CurveDiagram, m: Move) -> ApplyResult:
    if m.arc is None:
        raise MoveError("kink-pair-birth needs an arc")
    if m.chi not in (1, -1):
        raise MoveError("chi must be +1 or -1")
    i = m.arc % len(d.arcs)
    a = d.arcs[i]
    if not 0 <= m.cut <= len(a.label.letters):
        raise MoveError("cut position outside the arc label")
    mark = (Mark(i, m.cut, m.rot) if m.rot is not None
            else mark_from_pre(d, i, m.cut, m.pre))
    cls = kink_birth_class(d, mark, m.chi)
    event = StrataEvent("inverse", +1, cls)

    c1, c2 = _fresh_names(d, 2, prefix="k")
    one = d.surface.identity()
    head, tail = _split_word(a.label, m.cut)
    chi = m.chi
    if a.src is None:
        tail_rot = 4 * a.turning - mark.rot_before
    else:
        tail_rot = _tail_rotation(a, mark.rot_before, head.char())

    out = None
    for d1 in range(4):
        for d2 in range(4):
            lam1 = Arc((c1, d1), (c1, (_curl_loop_dst_slot(chi) + d1) % 4),
                       one, _curl_loop_turning(chi))
            gap = Arc((c1, (_curl_cont_src_slot(chi) + d1) % 4),
                      (c2, (2 + d2) % 4), one, 0)
            lam2 = Arc((c2, d2), (c2, (_curl_loop_dst_slot(-chi) + d2) % 4),
                       one, _curl_loop_turning(-chi))
            mid_rot = arc_rotation(lam1) + arc_rotation(gap) + arc_rotation(lam2)
            exit_dart = (c2, (_curl_cont_src_slot(-chi) + d2) % 4)
            if a.src is None:
                wrap = Arc(exit_dart, (c1, (2 + d1) % 4), a.label, 0)
                if (4 * a.turning - mid_rot - arc_qfrac(wrap)) % 4:
                    continue
                wrap = replace(wrap, turning=solve_turning(4 * a.turning - mid_rot,
                                                           arc_qfrac(wrap)))
                out = CurveDiagram(d.surface, (c1, c2), (wrap, lam1, gap, lam2), 0)
            else:
                first = Arc(a.src, (c1, (2 + d1) % 4), head, 0)
                last = Arc(exit_dart, a.dst, tail, 0)
                if ((mark.rot_before - arc_qfrac(first)) % 4
                        or (tail_rot - mid_rot - arc_qfrac(last)) % 4):
                    continue
                first = replace(first, turning=solve_turning(mark.rot_before,
                                                             arc_qfrac(first)))
                last = replace(last, turning=solve_turning(tail_rot - mid_rot,
                                                           arc_qfrac(last)))
                pieces = [first, lam1, gap, lam2, last]
                out, _ = _rebuild(d, {i: pieces}, d.crossings + (c1, c2))
            break
        if out is not None:
            break
    if out is None:
        raise MoveError("mark admits no consistent kink chart")
    require_valid(out)
    inv = Move("kink-pair-death", c1=c1, c2=c2)
    return ApplyResult(out, (event,), inv)


def _curl_structure(d: CurveDiagram, c: str):
    """(loop arc index, carrier in-slot, chi) of a curl crossing, after
    checking the loop is small (trivial label)."""
    loop_idx = None
    for k, a in enumerate(d.arcs):
        if a.src is not None and a.src[0] == c and a.dst is not None and a.dst[0] == c:
            loop_idx = k
            break
    if loop_idx is None:
        raise MoveError(f"crossing {c} is not a curl")
    lam = d.arcs[loop_idx]
    if lam.label:
        raise MoveError(f"curl at {c} carries a label; only small kinks slide")
    carrier_in = (lam.src[1] - 2) % 4
    rel = (lam.dst[1] - lam.src[1]) % 4
    if rel == 1:
        chi = 1
    elif rel == 3:
        chi = -1
    else:
        raise MoveError(f"crossing {c} is not a transversal curl")
    return loop_idx, carrier_in, chi


def _canonical_curl(d: CurveDiagram, c: str) -> tuple[CurveDiagram, int, int]:
    loop_idx, carrier_in, chi = _curl_structure(d, c)
    d = regauge_crossing(d, c, (2 - carrier_in) % 4)
    return d, loop_idx, chi


def apply_kink_pair_death(d: CurveDiagram, m: Move) -> ApplyResult:
    pair = _locate_kink_pair(d, m)
    c1, c2 = pair
    d1, loop1, chi1 = _canonical_curl(d, c1)
    d1, loop2, chi2 = _canonical_curl(d1, c2)
    if chi1 != -chi2:
        raise MoveError(f"curls {c1}, {c2} have equal handedness and cannot cancel")
    gap = d1.arcs[(loop1 + 1) % len(d1.arcs)]
    if gap.dst is None or gap.dst[0] != c2 or gap.label:
        raise MoveError(f"curls {c1}, {c2} are not adjacent along a plain band")

    out, marks = delete_crossings(d1, {c1, c2})
    require_valid(out)
    pos, letters, rot = marks[loop1]
    cls = kink_birth_class(out, Mark(pos, letters, rot), chi1)
    event = StrataEvent("inverse", -1, cls)
    inv = Move("kink-pair-birth", arc=pos, cut=letters, rot=rot, chi=chi1)
    return ApplyResult(out, (event,), inv)


def _locate_kink_pair(d: CurveDiagram, m: Move) -> tuple[str, str]:
    if m.c1 is not None and m.c2 is not None:
        return m.c1, m.c2
    pairs = enumerate_kink_pairs(d)
    if not pairs:
        raise MoveError("no cancellable kink pair in the diagram")
    return pairs[0].c1, pairs[0].c2


# ---------------------------------------------------------------------------
# kink slide step

# Slide tables, written with the carrier reaching the target crossing X at
# slot sigma.  The curl's loop pokes across the neighbouring strand at ray
# rho = sigma + 2 + chi; v is the loop crossing born next to X, u the far
# one.  Confirmed against an explicit smooth model: the step's birth and
# death always have opposite tangency kinds.


def apply_kink_slide_step(d: CurveDiagram, m: Move) -> ApplyResult:
    if m.crossing is None:
        raise MoveError("kink-slide-step needs the curl crossing")
    if m.direction == "backward":
        return _slide_backward(d, m)
    return _slide_forward(d, m.crossing)


def _slide_forward(d: CurveDiagram, c: str) -> ApplyResult:
    d, loop_idx, chi = _canonical_curl(d, c)
    n = len(d.arcs)
    alpha_idx = (loop_idx - 1) % n
    beta_idx = (loop_idx + 1) % n
    alpha, lam, beta = d.arcs[alpha_idx], d.arcs[loop_idx], d.arcs[beta_idx]
    if beta.dst is None or beta.dst[0] == c:
        raise MoveError("nothing to slide through: the curl feeds itself")
    X, sigma = beta.dst

    chi2 = chi * beta.char()

    # transport the curl along beta to X's doorstep
    merged_label = alpha.label * beta.label
    one = d.surface.identity()
    lam2 = Arc((c, 0), (c, _curl_loop_dst_slot(chi2)), one, _curl_loop_turning(chi2))
    gap = Arc((c, _curl_cont_src_slot(chi2)), (X, sigma), one, 0)
    total_pre = _chain_rotation([alpha, lam, beta])
    alpha2 = Arc(alpha.src, (c, 2), merged_label, 0)
    r_alpha2 = total_pre - merged_label.char() * (arc_rotation(lam2) + arc_rotation(gap))
    alpha2 = replace(alpha2, turning=solve_turning(r_alpha2, arc_qfrac(alpha2)))

    arcs = list(d.arcs)
    arcs[alpha_idx] = alpha2
    arcs[loop_idx] = lam2
    arcs[beta_idx] = gap
    d2 = CurveDiagram(d.surface, d.crossings, tuple(arcs), d.basepoint)
    require_valid(d2)
    loop_idx2 = loop_idx

    # locate the neighbouring strand's arc on the loop's side of X
    rho = (sigma + 2 + chi2) % 4
    seg2_idx = None
    seg2_into_x = None
    for k, a in enumerate(d2.arcs):
        if a.src == (X, rho):
            seg2_idx, seg2_into_x = k, False
        elif a.dst == (X, rho):
            seg2_idx, seg2_into_x = k, True
    if seg2_idx is None:
        raise MoveError(f"no arc at {X}.{rho}")
    kind = "inverse" if seg2_into_x else "direct"

    d3, u, v = _slide_birth(d2, loop_idx2, seg2_idx, seg2_into_x, chi2, X, rho)
    ev_birth = StrataEvent(kind, +1, _slide_contact_class(d2, kind, loop_idx2, chi2,
                                                          seg2_idx, seg2_into_x))

    tri = _face_with_corners(d3, {c, X, v}, size=3)
    res_tri = apply_triple(d3, Move("triple", face=face_name(d3, tri)))
    d4 = res_tri.diagram

    lens = _face_with_corners(d4, {u, X}, size=2)
    res_death = apply_tangency_death(d4, Move("tangency-death", face=face_name(d4, lens)))

    events = (ev_birth, res_tri.events[0], res_death.events[0])
    inv = Move("kink-slide-step", crossing=c, direction="backward")
    return ApplyResult(res_death.diagram, events, inv)


def _chain_rotation(arcs: Sequence[Arc]) -> int:
    acc = LiftAccumulator(arcs[0].label.model)
    for a in arcs:
        acc.add_arc(a)
    return acc.quarters


def _slide_birth(d: CurveDiagram, loop_idx: int, seg2_idx: int, into_x: bool,
                 chi: int, X: str, rho: int):
    """Insert the two loop/strand crossings of a slide step."""
    u, v = _fresh_names(d, 2, prefix="s")
    lam = d.arcs[loop_idx]
    seg2 = d.arcs[seg2_idx]
    one = d.surface.identity()

    ret = _curl_loop_dst_slot(chi)
    loop_pieces = [
        Arc(lam.src, (v, 2), one, 0),
        Arc((v, 0), (u, 0), one, 0),
        Arc((u, 2), (lam.dst[0], ret), one, 0),
    ]
    r_loop = arc_rotation(lam)
    spent = arc_rotation(loop_pieces[0]) + arc_rotation(loop_pieces[1])
    loop_pieces[2] = replace(loop_pieces[2],
                             turning=solve_turning(r_loop - spent,
                                                   arc_qfrac(loop_pieces[2])))

    if chi > 0:
        sv, su = (3, 3) if not into_x else (1, 1)
    else:
        sv, su = (1, 1) if not into_x else (3, 3)
    if not into_x:
        seg2_pieces = [
            Arc(seg2.src, (v, sv), one, 0),
            Arc((v, (sv + 2) % 4), (u, su), one, 0),
            Arc((u, (su + 2) % 4), seg2.dst, seg2.label, 0),
        ]
        spent2 = arc_rotation(seg2_pieces[0]) + arc_rotation(seg2_pieces[1])
        seg2_pieces[2] = replace(seg2_pieces[2],
                                 turning=solve_turning(arc_rotation(seg2) - spent2,
                                                       arc_qfrac(seg2_pieces[2])))
    else:
        seg2_pieces = [
            Arc(seg2.src, (u, su), seg2.label, 0),
            Arc((u, (su + 2) % 4), (v, sv), one, 0),
            Arc((v, (sv + 2) % 4), seg2.dst, one, 0),
        ]
        head = Arc(seg2.src, (u, su), seg2.label, 0)
        r_head = arc_rotation(seg2) - seg2.char() * (
            arc_qfrac(seg2_pieces[1]) + arc_qfrac(seg2_pieces[2]))
        seg2_pieces[0] = replace(head, turning=solve_turning(r_head, arc_qfrac(head)))

    out, _ = _rebuild(d, {loop_idx: loop_pieces, seg2_idx: seg2_pieces},
                      d.crossings + (u, v))
    require_valid(out)
    return out, u, v


def _slide_contact_class(d: CurveDiagram, kind: str, loop_idx: int, chi: int,
                         seg2_idx: int, into_x: bool) -> ClassTuple:
    lam = d.arcs[loop_idx]
    seg2 = d.arcs[seg2_idx]
    mark_loop = Mark(loop_idx, 0, chi)
    if into_x:
        q_end = (seg2.char() * (seg2.dst[1] + 2)) % 4
        mark_seg = Mark(seg2_idx, len(seg2.label.letters),
                        arc_rotation(seg2) - q_end)
    else:
        mark_seg = Mark(seg2_idx, 0, 0)
    return tangency_class(d, kind, mark_loop, mark_seg)


def _slide_backward(d: CurveDiagram, m: Move) -> ApplyResult:
    rev = reverse_diagram(d)
    res = _slide_forward(rev, m.crossing)
    out = reverse_diagram(res.diagram)
    require_valid(out)
    # the backward move crosses the same strata in the opposite direction:
    # recompute the honest events by simulating the forward step that undoes
    # this one, then flip signs and order
    back = _slide_forward(out, m.crossing)
    fwd_events = back.events
    events = tuple(StrataEvent(e.stratum, -e.sign, e.cls) for e in reversed(fwd_events))
    inv = Move("kink-slide-step", crossing=m.crossing, direction="forward")
    return ApplyResult(out, events, inv)


# ---------------------------------------------------------------------------
# dispatch, enumeration, serialization


def apply_move(d: CurveDiagram, m: Move) -> ApplyResult:
    if m.kind == "tangency-birth":
        return apply_tangency_birth(d, m)
    if m.kind == "tangency-death":
        return apply_tangency_death(d, m)
    if m.kind == "triple":
        return apply_triple(d, m)
    if m.kind == "kink-pair-birth":
        return apply_kink_pair_birth(d, m)
    if m.kind == "kink-pair-death":
        return apply_kink_pair_death(d, m)
    if m.kind == "kink-slide-step":
        return apply_kink_slide_step(d, m)
    raise MoveError(f"unknown move kind {m.kind!r}")


def enumerate_tangency_deaths(d: CurveDiagram) -> list[Move]:
    out = []
    for f in faces(d):
        if len(f) != 2:
            continue
        try:
            _check_lens(d, f)
        except MoveError:
            continue
        out.append(Move("tangency-death", face=face_name(d, f)))
    return sorted(out, key=lambda m: m.face)


def enumerate_triangles(d: CurveDiagram) -> list[Move]:
    out = []
    for f in faces(d):
        if len(f) != 3:
            continue
        if len(set(f.arcs())) != 3:
            continue
        if len({c for c, _ in face_corners(d, f)}) != 3:
            continue
        if any(d.arcs[s].label for s in f.arcs()):
            continue
        out.append(Move("triple", face=face_name(d, f)))
    return sorted(out, key=lambda m: m.face)


def enumerate_kink_pairs(d: CurveDiagram) -> list[Move]:
    out = []
    n = len(d.arcs)
    for k, a in enumerate(d.arcs):
        if a.src is None or a.src[0] != a.dst[0] or a.label:
            continue
        c1 = a.src[0]
        gap = d.arcs[(k + 1) % n]
        if gap.dst is None or gap.label:
            continue
        c2 = gap.dst[0]
        if c2 == c1:
            continue
        try:
            _, _, chi1 = _curl_structure(d, c1)
            _, _, chi2 = _curl_structure(d, c2)
        except MoveError:
            continue
        if chi1 == -chi2:
            out.append(Move("kink-pair-death", c1=c1, c2=c2))
    return out


# ---------------------------------------------------------------------------
# move and path files


def print_move(m: Move) -> str:
    if m.kind == "tangency-birth":
        out = (f"tangency-birth kind={m.tang_kind} arc1={m.arc1} cut1={m.cut1} "
               f"pre1={m.pre1} arc2={m.arc2} cut2={m.cut2} pre2={m.pre2} side={m.side}")
        if m.rot1 is not None:
            out += f" rot1={m.rot1}"
        if m.rot2 is not None:
            out += f" rot2={m.rot2}"
        return out
    if m.kind in ("tangency-death", "triple"):
        return f"{m.kind} face={m.face}"
    if m.kind == "kink-pair-birth":
        out = f"kink-pair-birth arc={m.arc} cut={m.cut} pre={m.pre} chi={m.chi:+d}"
        if m.rot is not None:
            out += f" rot={m.rot}"
        return out
    if m.kind == "kink-pair-death":
        return f"kink-pair-death c1={m.c1} c2={m.c2}"
    if m.kind == "kink-slide-step":
        return f"kink-slide-step crossing={m.crossing} direction={m.direction}"
    raise MoveError(f"cannot serialize move kind {m.kind!r}")


def parse_move(line: str) -> Move:
    parts = line.split()
    if not parts:
        raise MoveError("empty move line")
    kind = parts[0]
    if kind not in MOVE_KINDS:
        raise MoveError(f"unknown move kind {kind!r}")
    kv = {}
    for tok in parts[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise MoveError(f"bad move parameter {tok!r}")
        kv[key] = val

    def geti(key, default=None):
        if key not in kv:
            if default is None:
                raise MoveError(f"{kind} needs parameter {key}")
            return default
        try:
            return int(kv[key])
        except ValueError:
            raise MoveError(f"parameter {key} must be an integer") from None

    if kind == "tangency-birth":
        return Move(kind, tang_kind=kv.get("kind"), arc1=geti("arc1"),
                    cut1=geti("cut1", 0), pre1=geti("pre1", 0), arc2=geti("arc2"),
                    cut2=geti("cut2", 0), pre2=geti("pre2", 0),
                    rot1=geti("rot1", 0) if "rot1" in kv else None,
                    rot2=geti("rot2", 0) if "rot2" in kv else None,
                    side=kv.get("side", "left"))
    if kind in ("tangency-death", "triple"):
        if "face" not in kv:
            raise MoveError(f"{kind} needs parameter face")
        return Move(kind, face=kv["face"])
    if kind == "kink-pair-birth":
        return Move(kind, arc=geti("arc"), cut=geti("cut", 0), pre=geti("pre", 0),
                    rot=geti("rot", 0) if "rot" in kv else None,
                    chi=geti("chi", 1))
    if kind == "kink-pair-death":
        return Move(kind, c1=kv.get("c1"), c2=kv.get("c2"))
    if kind == "kink-slide-step":
        return Move(kind, crossing=kv.get("crossing"),
                    direction=kv.get("direction", "forward"))
    raise MoveError(f"unknown move kind {kind!r}")


def print_path(curve_ref: str, moves: Sequence[Move]) -> str:
    lines = [f"curve {curve_ref}"]
    lines.extend(print_move(m) for m in moves)
    return "\n".join(lines) + "\n"


def parse_path(text: str) -> tuple[str, tuple[Move, ...]]:
    curve_ref = None
    moves = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("curve "):
            curve_ref = line.split(None, 1)[1]
            continue
        try:
            moves.append(parse_move(line))
        except MoveError as exc:
            raise MoveError(f"line {ln}: {exc}") from exc
    if curve_ref is None:
        raise MoveError("path file names no initial curve")
    return curve_ref, tuple(moves)


def print_events(events: Sequence[StrataEvent]) -> str:
    return "\n".join(str(e) for e in events) + ("\n" if events else "")
