import random

import pytest

from curveinv.curves import (
    Arc,
    CurveDiagram,
    canonical_key,
    curve_class,
    loops_at,
    parse_curve,
    print_curve,
    require_valid,
    standard_curve,
    validate,
    whitney_index,
)
from curveinv.groups import klein_bottle, orientable_bounded, parse_word, plane, torus
from curveinv.moves import (
    Move,
    MoveError,
    apply_move,
    enumerate_kink_pairs,
    enumerate_tangency_deaths,
    enumerate_triangles,
    inverse,
    parse_move,
    parse_path,
    print_events,
    print_move,
    print_path,
    run_path,
    triangle_sign,
)

P = plane()
T = torus()
K = klein_bottle()
A2 = orientable_bounded(2, 1)


def circle(t=1, surface=P, label="1"):
    return CurveDiagram(surface, (), (Arc(None, None, parse_word(surface, label), t),))


def klein_counterexample():
    dd = parse_word(K, "d")
    arcs = (Arc(("x", 0), ("x", 1), dd, 0), Arc(("x", 3), ("x", 2), dd, -1))
    return CurveDiagram(K, ("x",), arcs, 0)


def assert_same_curve(d1, d2):
    assert canonical_key(d1) == canonical_key(d2)


# ---------------------------------------------------------------------------
# kink pair birth / death


def test_kink_pair_birth_on_circle():
    res = apply_move(circle(), Move("kink-pair-birth", arc=0, chi=1))
    d = res.diagram
    assert validate(d) == []
    assert d.n_crossings() == 2
    assert whitney_index(d) == 1
    assert len(res.events) == 1
    ev = res.events[0]
    assert ev.stratum == "inverse" and ev.sign == +1
    # one loop of the contact is the contractible half-turn finger
    fibers = sorted(x.fiber for x in ev.cls.words)
    assert all(f % 2 == 1 for f in fibers)


def test_kink_pair_round_trip_on_circle():
    start = circle()
    res = apply_move(start, Move("kink-pair-birth", arc=0, chi=1))
    back = apply_move(res.diagram, res.inverse)
    assert_same_curve(back.diagram, start)
    assert back.events[0].sign == -1
    assert back.events[0].cls == res.events[0].cls
    assert back.events[0].stratum == "inverse"


@pytest.mark.parametrize("chi", [1, -1])
@pytest.mark.parametrize("j", [0, 2, 4])
def test_kink_pair_round_trip_on_standard(j, chi):
    start = standard_curve(j)
    for arc in range(len(start.arcs)):
        res = apply_move(start, Move("kink-pair-birth", arc=arc, chi=chi))
        assert whitney_index(res.diagram) == j
        back = apply_move(res.diagram, res.inverse)
        assert_same_curve(back.diagram, start)
        assert back.events[0].cls == res.events[0].cls


def test_kink_pair_birth_on_torus_curve():
    d = circle(t=0, surface=T, label="a")
    res = apply_move(d, Move("kink-pair-birth", arc=0, chi=-1))
    assert validate(res.diagram) == []
    word, fib = curve_class(res.diagram)
    assert str(word) == "a" and fib.fiber == 0
    back = apply_move(res.diagram, res.inverse)
    assert_same_curve(back.diagram, d)


def test_enumerate_kink_pairs_finds_fresh_pair():
    res = apply_move(circle(), Move("kink-pair-birth", arc=0, chi=1))
    pairs = enumerate_kink_pairs(res.diagram)
    assert len(pairs) >= 1


# ---------------------------------------------------------------------------
# tangency birth / death


def two_arc_annulus():
    # embedded-ish curve on the annulus with one crossing, loops a and 1
    a = parse_word(A2, "a")
    one = A2.identity()
    arcs = (Arc(("x", 0), ("x", 1), a, 0), Arc(("x", 3), ("x", 2), one, -1))
    return CurveDiagram(A2, ("x",), arcs, 0)


@pytest.mark.parametrize("kind", ["direct", "inverse"])
@pytest.mark.parametrize("side", ["left", "right"])
def test_tangency_birth_death_round_trip(kind, side):
    d = standard_curve(0)
    m = Move("tangency-birth", tang_kind=kind, arc1=0, arc2=1, side=side)
    res = apply_move(d, m)
    assert validate(res.diagram) == []
    assert res.diagram.n_crossings() == 3
    assert whitney_index(res.diagram) == 0
    assert res.events[0].stratum == kind and res.events[0].sign == +1
    back = apply_move(res.diagram, res.inverse)
    assert_same_curve(back.diagram, d)
    assert back.events[0].stratum == kind and back.events[0].sign == -1
    assert back.events[0].cls == res.events[0].cls


def test_tangency_birth_crossing_count_bookkeeping():
    d = standard_curve(3)
    m = Move("tangency-birth", tang_kind="direct", arc1=0, arc2=2)
    res = apply_move(d, m)
    assert res.diagram.n_crossings() == d.n_crossings() + 2
    back = apply_move(res.diagram, res.inverse)
    assert back.diagram.n_crossings() == d.n_crossings()


def test_tangency_birth_labels_split():
    d = two_arc_annulus()
    m = Move("tangency-birth", tang_kind="direct", arc1=0, cut1=1, arc2=1, side="left")
    res = apply_move(d, m)
    assert validate(res.diagram) == []
    word, _ = curve_class(res.diagram)
    assert word == curve_class(d)[0]
    back = apply_move(res.diagram, res.inverse)
    assert_same_curve(back.diagram, d)


def test_tangency_death_requires_empty_bigon():
    d = standard_curve(0)
    with pytest.raises(MoveError):
        apply_move(d, Move("tangency-death", face="x.0"))


def test_direct_birth_fibers_sum_to_index():
    # the two contact loops of a direct tangency on a planar curve lift to
    # fibers splitting the whitney index
    for j in (0, 2, 3):
        d = standard_curve(j)
        m = Move("tangency-birth", tang_kind="direct", arc1=0,
                 arc2=1 if j == 0 else 1, side="left")
        ev = apply_move(d, m).events[0]
        assert sum(x.fiber for x in ev.cls.words) == j


def test_inverse_birth_fibers_odd_and_sum():
    for j in (0, 2, 3):
        d = standard_curve(j)
        m = Move("tangency-birth", tang_kind="inverse", arc1=0, arc2=1)
        ev = apply_move(d, m).events[0]
        fib = [x.fiber for x in ev.cls.words]
        assert all(f % 2 == 1 for f in fib)
        assert sum(fib) == 2 * j


# ---------------------------------------------------------------------------
# triple moves


def triple_ready_diagram():
    # birth a lens over the figure-eight crossing zone to manufacture a
    # triangle: slide machinery gives us one reliably via a kink pair
    d = standard_curve(0)
    res = apply_move(d, Move("tangency-birth", tang_kind="direct", arc1=0, arc2=1))
    return res.diagram


def test_triangles_exist_after_births():
    d = triple_ready_diagram()
    tris = enumerate_triangles(d)
    assert tris, "expected at least one triangle face"


def test_triple_round_trip_and_sign_flip():
    d = triple_ready_diagram()
    for m in enumerate_triangles(d):
        pre_sign, pre_q = triangle_sign(d, m.face)
        res = apply_move(d, m)
        assert validate(res.diagram) == []
        assert res.diagram.n_crossings() == d.n_crossings()
        assert whitney_index(res.diagram) == whitney_index(d)
        post_sign, post_q = triangle_sign(res.diagram, res.inverse.face)
        assert pre_q + post_q == 3
        assert res.events[0].sign == post_sign
        back = apply_move(res.diagram, res.inverse)
        assert_same_curve(back.diagram, d)
        assert back.events[0].sign == -res.events[0].sign
        assert back.events[0].cls == res.events[0].cls


def test_triple_class_agrees_pre_and_post():
    from curveinv.classes import SingularConfig, t_class

    d = triple_ready_diagram()
    for m in enumerate_triangles(d):
        res = apply_move(d, m)
        pre_cls = t_class(SingularConfig("triple", d, face=m.face))
        post_cls = t_class(SingularConfig("triple", res.diagram, face=res.inverse.face))
        assert pre_cls == post_cls == res.events[0].cls


# ---------------------------------------------------------------------------
# kink slide steps


def test_slide_step_round_trip_plane():
    d = standard_curve(2)
    res = apply_move(d, Move("kink-pair-birth", arc=0, chi=1))
    curl = res.inverse.c1
    step = apply_move(res.diagram, Move("kink-slide-step", crossing=curl))
    assert validate(step.diagram) == []
    assert len(step.events) == 3
    strata = [e.stratum for e in step.events]
    assert strata[1] == "triple"
    assert {strata[0], strata[2]} == {"direct", "inverse"}
    signs = [e.sign for e in step.events]
    assert signs[0] == +1 and signs[2] == -1
    assert step.diagram.n_crossings() == res.diagram.n_crossings()
    assert whitney_index(step.diagram) == 2
    back = apply_move(step.diagram, step.inverse)
    assert_same_curve(back.diagram, res.diagram)
    for e_f, e_b in zip(step.events, reversed(back.events)):
        assert e_f.cls == e_b.cls and e_f.sign == -e_b.sign


def test_slide_step_walks_whole_curve():
    # sliding the kink once around the figure eight returns it home
    d0 = standard_curve(0)
    res = apply_move(d0, Move("kink-pair-birth", arc=0, chi=1))
    d = res.diagram
    curl = res.inverse.c1
    n_visits = 2 * (d.n_crossings() - 1)
    for _ in range(n_visits):
        step = apply_move(d, Move("kink-slide-step", crossing=curl))
        d = step.diagram
        assert validate(d) == []
        assert whitney_index(d) == 0
    pairs = enumerate_kink_pairs(d)
    assert pairs, "kink should be home and cancellable"
    dead = apply_move(d, pairs[0])
    assert_same_curve(dead.diagram, d0)


def test_slide_step_on_torus_label_transport():
    d = circle(t=0, surface=T, label="a b")
    res = apply_move(d, Move("kink-pair-birth", arc=0, cut=0, chi=1))
    curl = res.inverse.c1
    # passing the other kink twice transports the curl across labels
    step = apply_move(res.diagram, Move("kink-slide-step", crossing=curl))
    word, fib = curve_class(step.diagram)
    assert word == parse_word(T, "a b")
    assert fib.fiber == 0
    back = apply_move(step.diagram, step.inverse)
    assert_same_curve(back.diagram, res.diagram)


# ---------------------------------------------------------------------------
# paths, serialization, event logs


def test_run_path_and_reverse_cancellation():
    d = standard_curve(0)
    m = Move("tangency-birth", tang_kind="inverse", arc1=0, arc2=1)
    res = apply_move(d, m)
    final, events = run_path(d, [m, res.inverse])
    assert_same_curve(final, d)
    per_class = {}
    for e in events:
        key = (e.stratum, str(e.cls))
        per_class[key] = per_class.get(key, 0) + e.sign
    assert all(v == 0 for v in per_class.values())


def test_move_serialization_round_trip():
    moves = [
        Move("tangency-birth", tang_kind="direct", arc1=0, cut1=1, pre1=0,
             arc2=3, cut2=0, pre2=2, side="right"),
        Move("tangency-death", face="x.0"),
        Move("triple", face="t1.2"),
        Move("kink-pair-birth", arc=4, cut=0, pre=0, chi=-1),
        Move("kink-pair-death", c1="k0", c2="k1"),
        Move("kink-slide-step", crossing="k0", direction="forward"),
    ]
    for m in moves:
        assert parse_move(print_move(m)) == m


def test_path_file_round_trip():
    moves = (Move("kink-pair-birth", arc=0, cut=0, pre=0, chi=1),
             Move("kink-slide-step", crossing="k0", direction="forward"))
    text = print_path("fixtures/k2.curve", moves)
    ref, parsed = parse_path(text)
    assert ref == "fixtures/k2.curve"
    assert parsed == moves


def test_event_log_format():
    d = standard_curve(0)
    res = apply_move(d, Move("tangency-birth", tang_kind="direct", arc1=0, arc2=1))
    text = print_events(res.events)
    assert text.startswith("direct +1 T+:(")


def test_event_determinism():
    d = standard_curve(4)
    m = Move("tangency-birth", tang_kind="direct", arc1=1, arc2=4)
    e1 = apply_move(d, m).events
    e2 = apply_move(d, m).events
    assert e1 == e2


# ---------------------------------------------------------------------------
# remote-move class stability


def test_class_stable_under_remote_moves():
    d = standard_curve(4)
    probe = Move("tangency-birth", tang_kind="direct", arc1=0, arc2=3)
    base_cls = apply_move(d, probe).events[0].cls
    remote = Move("kink-pair-birth", arc=5, chi=1)
    d2 = apply_move(d, remote).diagram
    cls2 = apply_move(d2, probe).events[0].cls
    assert cls2 == base_cls
