"""Combinatorial diagrams of generic immersed curves.

A curve is stored as a 4-valent map.  Each crossing has four darts in
counterclockwise rotation order, numbered 0..3, and the curve runs straight
through: entering at slot ``i`` it leaves at slot ``i+2``.  Arcs connect an
out-dart (``src``) to an in-dart (``dst``), appear in traversal order, and
carry a fundamental-group label plus an integer turning.

Turning convention.  Each crossing chart is axis aligned: the outward ray of
slot ``s`` points in direction ``s`` measured in quarter turns (0 = east,
1 = north, ...).  An arc leaving slot ``j`` departs in direction ``j`` and,
entering slot ``i``, arrives in direction ``i+2``.  Its real rotation in
quarter units is ``4*turning + q`` with the fractional part

    q = (eps*(i+2) - j) mod 4,

where ``eps`` is the orientation character of the arc's label: traversing an
orientation reversing band mirrors the local frame, which reads chart angles
backwards.  Splitting the traversal at a crossing closes each loop with a
+-1 quarter corner; all loop turnings and fibered lifts below are exact
integers in this convention (the telescoping sum over any closed path of the
fractional parts vanishes mod 4).

Diagrams are immutable; every function here is pure.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

from .groups import (
    FiberedWord,
    GroupError,
    GroupWord,
    SurfaceModel,
    klein_bottle,
    orientable_bounded,
    parse_fibered,
    parse_word,
    plane,
    print_word,
    torus,
)

Dart = tuple[str, int]


class DiagramError(ValueError):
    """Raised for operations on malformed or unsupported diagrams."""


@dataclass(frozen=True)
class Arc:
    src: Optional[Dart]       # out-dart the arc leaves, None for a free circle
    dst: Optional[Dart]       # in-dart the arc enters
    label: GroupWord
    turning: int

    def char(self) -> int:
        return self.label.char()


@dataclass(frozen=True)
class CurveDiagram:
    surface: SurfaceModel
    crossings: tuple[str, ...]
    arcs: tuple[Arc, ...]          # cyclic traversal order
    basepoint: int = 0             # traversal starts at arcs[basepoint]
    declared_lift: Optional[FiberedWord] = None

    def n_crossings(self) -> int:
        return len(self.crossings)

    def arc(self, index: int) -> Arc:
        return self.arcs[index % len(self.arcs)]

    def next_index(self, index: int) -> int:
        return (index + 1) % len(self.arcs)

    def prev_index(self, index: int) -> int:
        return (index - 1) % len(self.arcs)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class LoopDecomposition:
    crossing: str
    words: tuple[GroupWord, GroupWord]
    turnings: tuple[int, int]
    arc_ranges: tuple[tuple[int, ...], tuple[int, ...]]


# ---------------------------------------------------------------------------
# validation


def validate(d: CurveDiagram) -> list[Violation]:
    """Check the structural invariants; empty list means valid."""
    out: list[Violation] = []
    for k, a in enumerate(d.arcs):
        if a.label.model != d.surface:
            out.append(Violation("label-model", f"arc {k} label uses a foreign surface model"))

    if not d.arcs:
        out.append(Violation("empty", "diagram has no arcs"))
        return out

    if not d.crossings:
        if len(d.arcs) != 1 or d.arcs[0].src is not None or d.arcs[0].dst is not None:
            out.append(Violation("free-circle", "crossing-free diagram must be a single closed arc"))
        if out:
            return out
        if d.declared_lift is not None:
            _check_declared_lift(d, out)
        return out

    if len(d.arcs) != 2 * len(d.crossings):
        out.append(Violation("arc-count",
                             f"{len(d.arcs)} arcs for {len(d.crossings)} crossings (need 2 per crossing)"))

    known = set(d.crossings)
    seen: dict[Dart, str] = {}
    in_count: dict[str, int] = {c: 0 for c in d.crossings}
    for k, a in enumerate(d.arcs):
        for role, dart in (("src", a.src), ("dst", a.dst)):
            if dart is None:
                out.append(Violation("open-arc", f"arc {k} has no {role} dart"))
                continue
            c, s = dart
            if c not in known:
                out.append(Violation("unknown-crossing", f"arc {k} references undeclared crossing {c!r}"))
                continue
            if not 0 <= s <= 3:
                out.append(Violation("bad-slot", f"arc {k} {role} slot {s} out of range"))
                continue
            if dart in seen:
                out.append(Violation("dart-reuse", f"dart {c}.{s} used by more than one arc end"))
            seen[dart] = role
            if role == "dst":
                in_count[c] += 1

    for c in d.crossings:
        if in_count.get(c, 0) != 2:
            out.append(Violation("visit-count",
                                 f"crossing {c} visited {in_count.get(c, 0)} time(s), expected twice"))
    for c in d.crossings:
        for s in range(4):
            if (c, s) not in seen:
                out.append(Violation("dart-unused", f"dart {c}.{s} belongs to no arc end"))

    if out:
        return out

    n = len(d.arcs)
    for k in range(n):
        c, s = d.arcs[k].dst
        nc, ns = d.arcs[(k + 1) % n].src
        if (nc, ns) != (c, (s + 2) % 4):
            out.append(Violation("traversal",
                                 f"arc {k} enters {c}.{s} but arc {(k + 1) % n} leaves {nc}.{ns}, "
                                 f"expected {c}.{(s + 2) % 4}"))
    if out:
        return out

    if d.declared_lift is not None:
        _check_declared_lift(d, out)
    return out


def _check_declared_lift(d: CurveDiagram, out: list[Violation]) -> None:
    base, fib = curve_class(d)
    want = d.declared_lift
    if base != want.base or fib.fiber != want.fiber:
        out.append(Violation("lift-mismatch",
                             f"declared lift {want} but traversal gives {fib}"))


def require_valid(d: CurveDiagram) -> None:
    bad = validate(d)
    if bad:
        raise DiagramError("; ".join(v.message for v in bad))


# ---------------------------------------------------------------------------
# quarter-turn bookkeeping


def arc_qfrac(a: Arc) -> int:
    """Fractional rotation of the arc in quarter turns, per the convention."""
    if a.src is None:
        return 0
    j = a.src[1]
    i = a.dst[1]
    if a.char() == 1:
        return ((i + 2) - j) % 4
    return (-(i + 2) - j) % 4


def arc_rotation(a: Arc) -> int:
    """Real rotation along the arc in quarter units, read in its start frame."""
    return 4 * a.turning + arc_qfrac(a)


def solve_turning(target_rotation: int, qfrac: int) -> int:
    t, rem = divmod(target_rotation - qfrac, 4)
    if rem:
        raise DiagramError(f"rotation {target_rotation} incompatible with fraction {qfrac}")
    return t


def piece_qfracs(a: Arc, cut: int) -> tuple[int, int, int, int]:
    """Fractions for splitting the arc at a marked interior point.

    The local frame at the mark is the arc's own direction there, dir 0, so
    the mark contributes angle 0 to both pieces regardless of mirroring.
    Returns (q_before, q_after, eps_before, eps_after).
    """
    before = GroupWord(a.label.model, a.label.letters[:cut])
    after = GroupWord(a.label.model, a.label.letters[cut:])
    e1, e2 = before.char(), after.char()
    j = a.src[1] if a.src is not None else 0
    q_before = (-j) % 4
    q_after = (e2 * (a.dst[1] + 2)) % 4 if a.dst is not None else 0
    return q_before, q_after, e1, e2


class LiftAccumulator:
    """Accumulates the fibered lift of a loop of arc segments.

    Segments are (label, rotation-in-quarters) in traversal order; the
    mirror state flips across orientation reversing labels.  ``close``
    finishes the loop with a closure defect given in quarter units and
    returns the total rotation, which is always an exact multiple of the
    requested granularity.
    """

    def __init__(self, model: SurfaceModel):
        self.model = model
        self.word = model.identity()
        self.quarters = 0
        self.mirror = 1

    def add(self, label: GroupWord, rotation: int) -> None:
        self.word = self.word * label
        self.quarters += self.mirror * rotation
        self.mirror *= label.char()

    def add_arc(self, a: Arc) -> None:
        self.add(a.label, arc_rotation(a))

    def close(self, closure_quarters: int) -> tuple[GroupWord, int]:
        return self.word, self.quarters + closure_quarters


def closure_defect(depart_dir: int, arrive_dir: int, mirror: int) -> int:
    """Quarter turn closing a loop: from the transported arrival direction
    back to the departure direction, representative in (-2, 2]."""
    delta = (depart_dir - mirror * arrive_dir) % 4
    return delta - 4 if delta == 3 else delta


# ---------------------------------------------------------------------------
# traversal structure


@dataclass(frozen=True)
class Visit:
    crossing: str
    in_slot: int
    arc_in: int     # arc index arriving at the crossing
    arc_out: int    # arc index leaving it

    @property
    def out_slot(self) -> int:
        return (self.in_slot + 2) % 4


def visits(d: CurveDiagram) -> list[Visit]:
    """The crossing passages in traversal order starting at the basepoint."""
    n = len(d.arcs)
    out = []
    for step in range(n):
        k = (d.basepoint + step) % n
        a = d.arcs[k]
        if a.dst is None:
            continue
        c, s = a.dst
        out.append(Visit(c, s, k, (k + 1) % n))
    return out


def visits_of(d: CurveDiagram, crossing: str) -> tuple[Visit, Visit]:
    pair = [v for v in visits(d) if v.crossing == crossing]
    if len(pair) != 2:
        raise DiagramError(f"crossing {crossing!r} is visited {len(pair)} time(s)")
    return pair[0], pair[1]


def arc_range(d: CurveDiagram, first: int, last: int) -> list[int]:
    """Arc indices from ``first`` to ``last`` inclusive, cyclically."""
    n = len(d.arcs)
    out = [first % n]
    while out[-1] != last % n:
        out.append((out[-1] + 1) % n)
        if len(out) > n:
            raise DiagramError("arc range does not close")
    return out


# ---------------------------------------------------------------------------
# invariant readers


def whitney_index(d: CurveDiagram) -> int:
    """Rotation number of a planar diagram."""
    if d.surface.kind != "plane":
        raise DiagramError("whitney index is defined for planar curves only")
    require_valid(d)
    total = sum(arc_rotation(a) for a in d.arcs)
    if total % 4:
        raise DiagramError("inconsistent quarter-turn bookkeeping")
    return total // 4


def curve_class(d: CurveDiagram) -> tuple[GroupWord, FiberedWord]:
    """Free-homotopy representative read from the basepoint, with its
    fibered lift (fiber = total turning in the traversal frame)."""
    n = len(d.arcs)
    acc = LiftAccumulator(d.surface)
    for step in range(n):
        acc.add_arc(d.arcs[(d.basepoint + step) % n])
    if d.crossings:
        first = d.arcs[d.basepoint]
        depart = first.src[1]
        last = d.arcs[(d.basepoint - 1) % n]
        arrive = (last.dst[1] + 2) % 4   # smooth through the final passage
        word, quarters = acc.close(closure_defect(depart, arrive, acc.mirror))
    else:
        word, quarters = acc.close(0)
    if quarters % 4:
        raise DiagramError("inconsistent turning data")
    return word, FiberedWord(word, quarters // 4)


def loops_at(d: CurveDiagram, crossing: str) -> LoopDecomposition:
    """Split the traversal at a crossing into its two loops.

    Each loop is closed up at the crossing with the transversal corner; the
    words are free-homotopy representatives based there.
    """
    require_valid(d)
    v1, v2 = visits_of(d, crossing)

    def one_loop(src_visit: Visit, dst_visit: Visit):
        idxs = arc_range(d, src_visit.arc_out, dst_visit.arc_in)
        acc = LiftAccumulator(d.surface)
        for k in idxs:
            acc.add_arc(d.arcs[k])
        depart = src_visit.out_slot
        arrive = (dst_visit.in_slot + 2) % 4
        word, quarters = acc.close(closure_defect(depart, arrive, acc.mirror))
        if quarters % 4:
            raise DiagramError("loop turning is not an integer")
        return word, quarters // 4, tuple(idxs)

    w1, t1, r1 = one_loop(v1, v2)
    w2, t2, r2 = one_loop(v2, v1)
    return LoopDecomposition(crossing, (w1, w2), (t1, t2), (r1, r2))


# ---------------------------------------------------------------------------
# standard planar family


def standard_curve(j: int) -> CurveDiagram:
    """The standard planar curves: the figure eight for j = 0, the embedded
    circle for j = 1, and for j >= 2 a circle with j-1 same-sign curls.
    The constructor picks index +j.
    """
    if j < 0:
        raise DiagramError("standard curves are indexed by j >= 0")
    P = plane()
    one = P.identity()
    if j == 1:
        return CurveDiagram(P, (), (Arc(None, None, one, 1),))
    if j == 0:
        arcs = (
            Arc(("x", 0), ("x", 1), one, 0),
            Arc(("x", 3), ("x", 2), one, -1),
        )
        return CurveDiagram(P, ("x",), arcs, 0)
    names = tuple(f"c{i}" for i in range(1, j))
    arcs = []
    for i, c in enumerate(names):
        nxt = names[(i + 1) % len(names)]
        arcs.append(Arc((c, 0), (c, 1), one, 0))                       # curl loop
        arcs.append(Arc((c, 3), (nxt, 2), one, 1 if i == len(names) - 1 else 0))
    # rotate so the closing connector (turning +1) carries the basepoint
    arcs = arcs[-1:] + arcs[:-1]
    return CurveDiagram(P, names, tuple(arcs), 0)


# ---------------------------------------------------------------------------
# reversal, relabeling, gauge


def reverse_diagram(d: CurveDiagram) -> CurveDiagram:
    """The same curve traversed backwards."""
    rev = []
    for a in reversed(d.arcs):
        if a.src is None:
            rev.append(Arc(None, None, a.label.inverse(), -a.turning))
            continue
        q_new = arc_qfrac(Arc(a.dst, a.src, a.label.inverse(), 0))
        rotation = -a.char() * arc_rotation(a)
        rev.append(Arc(a.dst, a.src, a.label.inverse(), solve_turning(rotation, q_new)))
    n = len(d.arcs)
    base = (n - 1 - d.basepoint) % n if n else 0
    return CurveDiagram(d.surface, d.crossings, tuple(rev), base)


def rotate_basepoint(d: CurveDiagram, new_basepoint: int) -> CurveDiagram:
    return replace(d, basepoint=new_basepoint % len(d.arcs))


def relabel(d: CurveDiagram, mapping: dict[str, str]) -> CurveDiagram:
    def m(dart):
        return None if dart is None else (mapping.get(dart[0], dart[0]), dart[1])
    arcs = tuple(Arc(m(a.src), m(a.dst), a.label, a.turning) for a in d.arcs)
    return replace(d, crossings=tuple(mapping.get(c, c) for c in d.crossings), arcs=arcs)


def canonical_key(d: CurveDiagram) -> tuple:
    """A key identifying the diagram up to crossing names, basepoint,
    traversal start, and the per-crossing chart gauge (rotating a chart by a
    quarter turn changes every incident fraction but no observable)."""
    n = len(d.arcs)
    if not d.crossings:
        a = d.arcs[0]
        return ("circle", d.surface.kind, a.label.letters, a.turning)
    best = None
    for start in range(n):
        names: dict[str, str] = {}
        shifts: dict[str, int] = {}
        rows = []
        for step in range(n):
            a = d.arcs[(start + step) % n]
            for dart in (a.src, a.dst):
                c = dart[0]
                if c not in names:
                    names[c] = f"k{len(names)}"
                    # gauge: first referenced dart of each crossing -> slot 2
                    shifts[c] = (2 - dart[1]) % 4
        for step in range(n):
            a = d.arcs[(start + step) % n]
            sc, ss = a.src
            dc, ds = a.dst
            rows.append((names[sc], (ss + shifts[sc]) % 4,
                         names[dc], (ds + shifts[dc]) % 4,
                         a.label.letters, a.turning))
        key = tuple(rows)
        if best is None or key < best:
            best = key
    return (d.surface.kind, d.surface.generators, best)


def diagram_hash(d: CurveDiagram) -> str:
    return hashlib.sha256(repr(canonical_key(d)).encode()).hexdigest()


# ---------------------------------------------------------------------------
# faces


@dataclass(frozen=True)
class FacePiece:
    arc: int
    forward: bool     # walk direction relative to the arc's own direction
    side: int         # face side relative to walk direction at departure


@dataclass(frozen=True)
class Face:
    pieces: tuple[FacePiece, ...]

    def __len__(self) -> int:
        return len(self.pieces)

    def arcs(self) -> tuple[int, ...]:
        return tuple(p.arc for p in self.pieces)


def _arc_ends(d: CurveDiagram) -> dict[Dart, tuple[int, str]]:
    ends = {}
    for k, a in enumerate(d.arcs):
        ends[a.src] = (k, "src")
        ends[a.dst] = (k, "dst")
    return ends


def faces(d: CurveDiagram) -> list[Face]:
    """All faces of the diagram as a map on its surface.

    The walk keeps the face on a fixed physical side; the side token flips
    across orientation reversing arcs, and the two corner turns at a
    crossing are slot-1 (face on the left of travel) and slot+1 (right).
    """
    if not d.crossings:
        return []
    ends = _arc_ends(d)
    out: list[Face] = []
    seen: set[tuple[int, bool, int]] = set()
    for seed_arc in range(len(d.arcs)):
        for seed_side in (1, -1):
            state = (seed_arc, True, seed_side)
            if state in seen:
                continue
            pieces = []
            while True:
                arc_i, forward, side = state
                if (arc_i, forward, side) in seen:
                    break
                seen.add((arc_i, forward, side))
                pieces.append(FacePiece(arc_i, forward, side))
                a = d.arcs[arc_i]
                arrive_dart = a.dst if forward else a.src
                side_at_arrival = side * a.char()
                c, i = arrive_dart
                leave_slot = (i - 1) % 4 if side_at_arrival == 1 else (i + 1) % 4
                nxt_arc, role = ends[(c, leave_slot)]
                nxt_forward = role == "src"
                state = (nxt_arc, nxt_forward, side_at_arrival)
            # mark the reverse walk as seen too: it describes the same face
            for p in pieces:
                a = d.arcs[p.arc]
                seen.add((p.arc, not p.forward, -p.side * a.char()))
            out.append(Face(tuple(pieces)))
    return out


def face_corners(d: CurveDiagram, face: Face) -> list[Dart]:
    """The (crossing, arrival-slot) corner darts of the face, in walk order."""
    corners = []
    for p in face.pieces:
        a = d.arcs[p.arc]
        corners.append(a.dst if p.forward else a.src)
    return corners


def face_name(d: CurveDiagram, face: Face) -> str:
    return min(f"{c}.{s}" for c, s in face_corners(d, face))


def find_face(d: CurveDiagram, name: str) -> Face:
    for f in faces(d):
        if face_name(d, f) == name:
            return f
    raise DiagramError(f"no face named {name!r}")


def euler_characteristic(d: CurveDiagram) -> int:
    if not d.crossings:
        raise DiagramError("crossing-free diagrams carry no cell structure")
    return len(d.crossings) - len(d.arcs) + len(faces(d))


# ---------------------------------------------------------------------------
# serialization (one curve per file)


def print_curve(d: CurveDiagram) -> str:
    lines = []
    s = d.surface
    if s.kind == "orientable-bounded":
        lines.append(f"surface orientable-bounded genus {s.genus} boundary {s.boundary}")
    else:
        lines.append(f"surface {s.kind}")
    for c in d.crossings:
        lines.append(f"crossing {c}")
    for a in d.arcs:
        src = "-" if a.src is None else f"{a.src[0]}.{a.src[1]}"
        dst = "-" if a.dst is None else f"{a.dst[0]}.{a.dst[1]}"
        lines.append(f"arc {src} {dst} {print_word(a.label)} {a.turning}")
    lines.append(f"basepoint {d.basepoint}")
    if d.declared_lift is not None:
        lines.append(f"lift {d.declared_lift}")
    return "\n".join(lines) + "\n"


def _parse_dart(tok: str) -> Optional[Dart]:
    if tok == "-":
        return None
    name, _, slot = tok.rpartition(".")
    if not name:
        raise DiagramError(f"bad dart token {tok!r}")
    try:
        return (name, int(slot))
    except ValueError:
        raise DiagramError(f"bad dart token {tok!r}") from None


def parse_curve(text: str) -> CurveDiagram:
    surface: Optional[SurfaceModel] = None
    crossings: list[str] = []
    arcs: list[Arc] = []
    basepoint = 0
    declared: Optional[FiberedWord] = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        try:
            if head == "surface":
                if parts[1] == "orientable-bounded":
                    surface = orientable_bounded(int(parts[3]), int(parts[5]))
                elif parts[1] == "plane":
                    surface = plane()
                elif parts[1] == "torus":
                    surface = torus()
                elif parts[1] == "klein-bottle":
                    surface = klein_bottle()
                else:
                    raise DiagramError(f"unknown surface {parts[1]!r}")
            elif head == "crossing":
                crossings.append(parts[1])
            elif head == "arc":
                if surface is None:
                    raise DiagramError("arc before surface")
                src = _parse_dart(parts[1])
                dst = _parse_dart(parts[2])
                label = parse_word(surface, " ".join(parts[3:-1]))
                arcs.append(Arc(src, dst, label, int(parts[-1])))
            elif head == "basepoint":
                basepoint = int(parts[1])
            elif head == "lift":
                if surface is None:
                    raise DiagramError("lift before surface")
                declared = parse_fibered(surface, " ".join(parts[1:]))
            else:
                raise DiagramError(f"unknown directive {head!r}")
        except (IndexError, ValueError, GroupError) as exc:
            raise DiagramError(f"line {ln}: {exc}") from exc
    if surface is None:
        raise DiagramError("missing surface block")
    if not arcs:
        raise DiagramError("curve file has no arcs")
    return CurveDiagram(surface, tuple(crossings), tuple(arcs), basepoint, declared)
