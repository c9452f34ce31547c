import pytest

from curveinv.curves import (
    Arc,
    CurveDiagram,
    DiagramError,
    canonical_key,
    curve_class,
    euler_characteristic,
    face_name,
    faces,
    find_face,
    loops_at,
    parse_curve,
    print_curve,
    require_valid,
    reverse_diagram,
    rotate_basepoint,
    standard_curve,
    validate,
    whitney_index,
)
from curveinv.groups import klein_bottle, parse_word, plane, torus

P = plane()
T = torus()
K = klein_bottle()


def circle(turning=1):
    return CurveDiagram(P, (), (Arc(None, None, P.identity(), turning),))


def torus_ab_curve():
    # one crossing, loops labeled a and b; same shape as the figure eight
    a = parse_word(T, "a")
    b = parse_word(T, "b")
    arcs = (Arc(("x", 0), ("x", 1), a, 0), Arc(("x", 3), ("x", 2), b, -1))
    return CurveDiagram(T, ("x",), arcs, 0)


def klein_counterexample():
    # one double point splitting into two orientation reversing loops
    dd = parse_word(K, "d")
    arcs = (Arc(("x", 0), ("x", 1), dd, 0), Arc(("x", 3), ("x", 2), dd, -1))
    return CurveDiagram(K, ("x",), arcs, 0)


# ---------------------------------------------------------------------------
# validation


def test_embedded_circle_valid():
    assert validate(circle()) == []


def test_standard_curves_valid():
    for j in range(7):
        assert validate(standard_curve(j)) == [], j


def test_crossing_visited_once_reported():
    # second crossing referenced by only one passage
    one = P.identity()
    arcs = (
        Arc(("x", 0), ("y", 1), one, 0),
        Arc(("y", 3), ("x", 2), one, 0),
        Arc(("x", 0), ("x", 1), one, 0),
    )
    d = CurveDiagram(P, ("x", "y"), arcs, 0)
    messages = " ".join(v.message for v in validate(d))
    assert "visited" in messages


def test_traversal_mismatch_reported():
    one = P.identity()
    arcs = (Arc(("x", 0), ("x", 1), one, 0), Arc(("x", 2), ("x", 3), one, 0))
    d = CurveDiagram(P, ("x",), arcs, 0)
    assert any(v.code in ("traversal", "dart-reuse", "dart-unused") for v in validate(d))


def test_declared_lift_checked():
    from curveinv.groups import FiberedWord

    d = CurveDiagram(P, (), (Arc(None, None, P.identity(), 1),),
                     declared_lift=FiberedWord(P.identity(), 2))
    assert any(v.code == "lift-mismatch" for v in validate(d))
    d2 = CurveDiagram(P, (), (Arc(None, None, P.identity(), 2),),
                      declared_lift=FiberedWord(P.identity(), 2))
    assert validate(d2) == []


# ---------------------------------------------------------------------------
# whitney index


def test_circle_index_one():
    assert whitney_index(circle()) == 1


@pytest.mark.parametrize("j", range(7))
def test_standard_indices(j):
    assert whitney_index(standard_curve(j)) == j


def test_reversal_negates_index():
    for j in range(7):
        assert whitney_index(reverse_diagram(standard_curve(j))) == -j


def test_index_rejects_nonplanar():
    with pytest.raises(DiagramError):
        whitney_index(torus_ab_curve())


def test_index_equals_lift_fiber():
    for j in range(7):
        d = standard_curve(j)
        assert curve_class(d)[1].fiber == whitney_index(d)


# ---------------------------------------------------------------------------
# loop decomposition


def test_figure_eight_loops():
    d = standard_curve(0)
    dec = loops_at(d, "x")
    assert sorted(dec.turnings) == [-1, 1]
    assert all(len(w) == 0 for w in dec.words)


def test_k2_loops():
    d = standard_curve(2)
    dec = loops_at(d, "c1")
    assert sorted(dec.turnings) == [1, 1]
    assert all(len(w) == 0 for w in dec.words)


def test_torus_loops_read_labels():
    d = torus_ab_curve()
    dec = loops_at(d, "x")
    assert {str(w) for w in dec.words} == {"a", "b"}


def test_loop_turnings_additive_at_every_crossing():
    for j in range(7):
        d = standard_curve(j)
        for c in d.crossings:
            dec = loops_at(d, c)
            assert sum(dec.turnings) == whitney_index(d), (j, c)


def test_loops_at_unknown_crossing():
    with pytest.raises(DiagramError):
        loops_at(standard_curve(0), "nope")


def test_loops_basepoint_independent():
    d = standard_curve(4)
    for k in range(len(d.arcs)):
        dec = loops_at(rotate_basepoint(d, k), "c2")
        assert sorted(dec.turnings) == sorted(loops_at(d, "c2").turnings)


# ---------------------------------------------------------------------------
# curve classes


def test_circle_class_on_torus():
    a = parse_word(T, "a")
    d = CurveDiagram(T, (), (Arc(None, None, a, 0),))
    word, fib = curve_class(d)
    assert str(word) == "a"
    assert fib.fiber == 0


def test_figure_eight_class_trivial():
    word, fib = curve_class(standard_curve(0))
    assert len(word) == 0 and fib.fiber == 0


def test_klein_d_curve_class_reversing():
    dd = parse_word(K, "d")
    d = CurveDiagram(K, (), (Arc(None, None, dd, 0),))
    word, _ = curve_class(d)
    assert word.char() == -1


def test_counterexample_class_preserving():
    word, _ = curve_class(klein_counterexample())
    assert word.char() == 1
    dec = loops_at(klein_counterexample(), "x")
    assert all(w.char() == -1 for w in dec.words)


def test_standard_curve_rejects_negative():
    with pytest.raises(DiagramError):
        standard_curve(-1)


# ---------------------------------------------------------------------------
# faces


def test_faces_euler_characteristic_sphere():
    # planar diagrams live on S^2 once the outer face is counted
    for j in range(7):
        d = standard_curve(j)
        if d.crossings:
            assert euler_characteristic(d) == 2, j


def test_face_pieces_cover_both_sides_of_every_arc():
    # faces come from the diagram's own rotation system (the curve need not
    # fill its surface), so the reliable invariant is piece coverage
    for d in (standard_curve(0), standard_curve(5), torus_ab_curve(),
              klein_counterexample()):
        total = sum(len(f) for f in faces(d))
        assert total == 2 * len(d.arcs)


def test_figure_eight_face_sizes():
    d = standard_curve(0)
    sizes = sorted(len(f) for f in faces(d))
    assert sizes == [1, 1, 2]


def test_face_names_deterministic():
    d = standard_curve(3)
    names = sorted(face_name(d, f) for f in faces(d))
    assert names == sorted(face_name(d, f) for f in faces(d))
    for f in faces(d):
        assert find_face(d, face_name(d, f)).pieces == f.pieces


# ---------------------------------------------------------------------------
# reversal and canonical keys


def test_double_reversal_is_identity():
    for j in range(7):
        d = standard_curve(j)
        assert reverse_diagram(reverse_diagram(d)) == d


def test_reverse_is_valid():
    for d in (standard_curve(0), standard_curve(4), torus_ab_curve(), klein_counterexample()):
        require_valid(reverse_diagram(d))


def test_canonical_key_ignores_names_and_start():
    d = standard_curve(3)
    e = relabeled = rotate_basepoint(d, 2)
    from curveinv.curves import relabel

    e = relabel(relabeled, {"c1": "zz", "c2": "aa"})
    assert canonical_key(d) == canonical_key(e)
    assert canonical_key(d) != canonical_key(standard_curve(4))
    assert canonical_key(d) != canonical_key(reverse_diagram(d))


# ---------------------------------------------------------------------------
# serialization


@pytest.mark.parametrize("make", [
    lambda: circle(),
    lambda: standard_curve(0),
    lambda: standard_curve(5),
    torus_ab_curve,
    klein_counterexample,
])
def test_round_trip(make):
    d = make()
    text = print_curve(d)
    assert parse_curve(text) == d
    assert print_curve(parse_curve(text)) == text


def test_parse_errors_are_located():
    with pytest.raises(DiagramError, match="line"):
        parse_curve("surface plane\narc broken\n")
    with pytest.raises(DiagramError):
        parse_curve("crossing x\n")
