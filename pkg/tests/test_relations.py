import math

import pytest
from hypothesis import given, strategies as st

from conftest import asset, make_layout
from roomsynth.relations import (
    RelationParams,
    around_groups,
    checks,
    eval_check,
    eval_facing,
    eval_relation,
    facing_angle,
    feedback_text,
    question_text,
    snap_facing,
    unsatisfied_constraints,
    UnplacedObjectError,
)
from roomsynth.scene import ConstraintSet, Layout, Placement, Pose, RelationKind as K, Room

P = RelationParams()
ROOM = Room(600, 500)


def test_near_edge_gap():
    table = asset("table-0", 120, 80)
    chair = asset("chair-0", 50, 50)
    # table spans y in [160, 240]; chair spans y in [80, 130]: a 30 cm gap
    layout = make_layout(ROOM, (table, Pose(300, 200, 0)), (chair, Pose(300, 105, 0)))
    assert eval_relation(K.NEAR, "chair-0", "table-0", layout)
    far = layout.with_pose("chair-0", Pose(300, 74, 0))  # gap 61
    assert not eval_relation(K.NEAR, "chair-0", "table-0", far)


def test_aligned_nightstands():
    ns = [asset(f"nightstand-{i}", 40, 40) for i in range(2)]
    layout = make_layout(ROOM, (ns[0], Pose(100, 50, 0)), (ns[1], Pose(400, 50, 0)))
    assert eval_relation(K.ALIGNED_WITH, "nightstand-0", "nightstand-1", layout)
    skew = layout.with_pose("nightstand-1", Pose(400, 80, 90))
    assert not eval_relation(K.ALIGNED_WITH, "nightstand-0", "nightstand-1", skew)


def test_opposite_sofas():
    sofas = [asset(f"sofa-{i}", 200, 90) for i in range(2)]
    facing = make_layout(ROOM, (sofas[0], Pose(300, 60, 0)), (sofas[1], Pose(300, 440, 180)))
    assert eval_relation(K.OPPOSITE, "sofa-0", "sofa-1", facing)
    same = facing.with_pose("sofa-1", Pose(300, 440, 0))
    assert not eval_relation(K.OPPOSITE, "sofa-0", "sofa-1", same)
    back_to_back = make_layout(ROOM, (sofas[0], Pose(300, 440, 0)), (sofas[1], Pose(300, 60, 180)))
    assert not eval_relation(K.OPPOSITE, "sofa-0", "sofa-1", back_to_back)


def test_in_front_of_and_side_of():
    tv = asset("tv stand-0", 150, 40)
    sofa = asset("sofa-0", 200, 90)
    layout = make_layout(ROOM, (tv, Pose(300, 20, 0)), (sofa, Pose(300, 200, 180)))
    # the sofa center is 180 ahead of the stand's center, 160 past its front face
    assert not eval_relation(K.IN_FRONT_OF, "tv stand-0", "sofa-0", layout)
    closer = layout.with_pose("sofa-0", Pose(300, 160, 180))
    assert eval_relation(K.IN_FRONT_OF, "tv stand-0", "sofa-0", closer)
    lamp = asset("lamp-0", 30, 30)
    beside = make_layout(ROOM, (lamp, Pose(100, 200, 0)), (sofa, Pose(230, 200, 0)))
    assert eval_relation(K.SIDE_OF, "lamp-0", "sofa-0", beside)
    ahead = make_layout(ROOM, (lamp, Pose(230, 120, 0)), (sofa, Pose(230, 200, 0)))
    assert not eval_relation(K.SIDE_OF, "lamp-0", "sofa-0", ahead)


def test_around_needs_spread():
    table = asset("table-0", 120, 80)
    chairs = [asset(f"chair-{i}", 45, 45) for i in range(2)]
    group = ["chair-0", "chair-1"]
    spread = make_layout(
        ROOM, (table, Pose(300, 250, 0)), (chairs[0], Pose(300, 180, 0)), (chairs[1], Pose(300, 320, 180))
    )
    assert eval_relation(K.AROUND, "chair-0", "table-0", spread, P, group)
    bunched = make_layout(
        ROOM, (table, Pose(300, 250, 0)), (chairs[0], Pose(230, 180, 0)), (chairs[1], Pose(280, 170, 0))
    )
    assert not eval_relation(K.AROUND, "chair-0", "table-0", bunched, P, group)
    # a lone subject only needs to be near
    assert eval_relation(K.AROUND, "chair-0", "table-0", bunched, P, ["chair-0"])


def _angle_oracle(sx, sy, theta, tx, ty):
    fx, fy = round(math.sin(math.radians(theta))), round(math.cos(math.radians(theta)))
    dx, dy = tx - sx, ty - sy
    return math.degrees(math.acos((fx * dx + fy * dy) / math.hypot(dx, dy)))


def test_facing_examples():
    chair, table = asset("chair-0", 45, 45), asset("table-0", 120, 80)
    layout = make_layout(ROOM, (chair, Pose(100, 100, 0)), (table, Pose(100, 200, 0)))
    assert eval_facing("chair-0", "table-0", layout)
    assert not eval_facing("chair-0", "table-0", layout.with_pose("chair-0", Pose(100, 100, 180)))


@pytest.mark.parametrize("deg,expect", [(44, True), (46, False), (-44, True), (-46, False)])
def test_facing_cone_boundary(deg, expect):
    chair, table = asset("chair-0", 45, 45), asset("table-0", 120, 80)
    tx = 200 + 150 * math.sin(math.radians(deg))
    ty = 200 + 150 * math.cos(math.radians(deg))
    layout = make_layout(ROOM, (chair, Pose(200, 200, 0)), (table, Pose(tx, ty, 0)))
    assert facing_angle(layout, "chair-0", "table-0") == pytest.approx(_angle_oracle(200, 200, 0, tx, ty), abs=1e-9)
    assert eval_facing("chair-0", "table-0", layout) is expect


def test_unsatisfied_constraints_cases():
    chair, table = asset("chair-0", 45, 45), asset("table-0", 120, 80)
    lamp = asset("lamp-0", 30, 30)
    layout = make_layout(
        ROOM, (chair, Pose(300, 180, 0)), (table, Pose(300, 250, 0)), (lamp, Pose(380, 250, 0))
    )
    cons = [
        ConstraintSet("chair-0", relations=((K.NEAR, "table-0"),), facing="table-0"),
        ConstraintSet("lamp-0", relations=((K.NEAR, "table-0"),)),
    ]
    assert unsatisfied_constraints(layout, cons) == []

    turned = layout.with_pose("chair-0", Pose(300, 180, 180))
    failed = unsatisfied_constraints(turned, cons)
    assert len(failed) == 1
    assert failed[0].kind == "facing"
    assert failed[0].feedback == "The chair-0 is not facing the table-0"

    broken = turned.with_pose("lamp-0", Pose(560, 460, 0))
    failed = unsatisfied_constraints(broken, cons)
    expect = [c for c in checks(cons) if not eval_check(c, broken, P, {})]
    assert len(failed) == 2
    assert [(f.subject, f.kind, f.targets[0]) for f in failed] == expect


def test_texts():
    assert feedback_text("sofa", "in_front_of", "tv") == "The sofa is not in front of the tv"
    assert question_text("sofa", "side_of", "tv") == "Is sofa placed side of tv?"
    assert question_text("chair", "facing", "desk") == "Is chair facing desk?"


def test_unplaced_target_raises():
    layout = make_layout(ROOM, (asset("a", 10, 10), Pose(50, 50, 0)))
    with pytest.raises(UnplacedObjectError):
        eval_relation(K.NEAR, "a", "ghost", layout)


def test_snap_facing_points_at_target():
    chair, table = asset("chair-0", 45, 45), asset("table-0", 120, 80)
    layout = make_layout(ROOM, (chair, Pose(100, 300, 180)), (table, Pose(100, 400, 0)))
    assert snap_facing(layout, "chair-0", "table-0") == 0
    layout = make_layout(ROOM, (chair, Pose(100, 300, 180)), (table, Pose(400, 320, 0)))
    assert snap_facing(layout, "chair-0", "table-0") == 90


# -- properties ----------------------------------------------------------------

THETAS = st.sampled_from([0, 90, 180, 270])
KINDS = list(K)


@st.composite
def related_layouts(draw, side=400):
    n = draw(st.integers(2, 5))
    room = Room(side, side)
    items = []
    for i in range(n):
        a = asset(f"o-{i}", draw(st.integers(1, 60)) * 2, draw(st.integers(1, 60)) * 2)
        items.append((a, Pose(draw(st.integers(0, 2 * side)) / 2, draw(st.integers(0, 2 * side)) / 2, draw(THETAS))))
    layout = make_layout(room, *items)
    cons = []
    for i in range(n):
        rels = tuple(
            (draw(st.sampled_from(KINDS)), f"o-{j}") for j in range(n) if j != i and draw(st.booleans())
        )
        facing = f"o-{draw(st.sampled_from([j for j in range(n) if j != i]))}" if draw(st.booleans()) else None
        cons.append(ConstraintSet(f"o-{i}", False, rels, facing))
    return layout, cons


def _truths(layout, cons, params=P):
    groups = around_groups(cons)
    return [eval_check(c, layout, params, groups) for c in checks(cons)]


def _transform(layout: Layout, fn, theta_fn, room: Room) -> Layout:
    return Layout(
        room,
        {n: Placement(a, Pose(*fn(p.x, p.y), theta_fn(p.theta))) for n, (a, p) in layout},
    )


@given(related_layouts(), st.integers(-300, 300), st.integers(-300, 300))
def test_translation_invariance(data, tx, ty):
    layout, cons = data
    moved = _transform(layout, lambda x, y: (x + tx, y + ty), lambda t: t, layout.room)
    assert _truths(moved, cons) == _truths(layout, cons)


@given(related_layouts(), st.sampled_from(["flip_x", "flip_y", "half_turn", "quarter_turn"]))
def test_rectangle_symmetry_invariance(data, op):
    layout, cons = data
    w, d = layout.room.width, layout.room.depth
    ops = {
        "flip_x": (lambda x, y: (w - x, y), lambda t: (360 - t) % 360),
        "flip_y": (lambda x, y: (x, d - y), lambda t: (180 - t) % 360),
        "half_turn": (lambda x, y: (w - x, d - y), lambda t: (t + 180) % 360),
        # clockwise quarter turn; the room is square so it maps onto itself
        "quarter_turn": (lambda x, y: (y, w - x), lambda t: (t + 90) % 360),
    }
    fn, tfn = ops[op]
    assert _truths(_transform(layout, fn, tfn, layout.room), cons) == _truths(layout, cons)


@given(related_layouts())
def test_near_is_symmetric(data):
    layout, _ = data
    names = layout.names()
    for a in names:
        for b in names:
            if a != b:
                assert eval_relation(K.NEAR, a, b, layout) == eval_relation(K.NEAR, b, a, layout)


@given(related_layouts(), st.floats(1, 200), st.floats(0, 200))
def test_near_monotone_in_gap(data, gap, extra):
    layout, _ = data
    small, big = RelationParams(near_gap_max=gap), RelationParams(near_gap_max=gap + extra)
    names = layout.names()
    for a in names:
        for b in names:
            if a != b and eval_relation(K.NEAR, a, b, layout, small):
                assert eval_relation(K.NEAR, a, b, layout, big)


@given(related_layouts())
def test_unsatisfied_is_exact_filter(data):
    layout, cons = data
    groups = around_groups(cons)
    expect = [c for c in checks(cons) if not eval_check(c, layout, P, groups)]
    got = [(f.subject, f.kind, f.targets[0]) for f in unsatisfied_constraints(layout, cons)]
    assert got == expect
