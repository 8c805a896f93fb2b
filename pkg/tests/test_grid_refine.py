import random

import pytest
from hypothesis import given, strategies as st

from conftest import (
    asset,
    make_layout,
    oracle_grid,
    oracle_nearest_valid,
    oracle_valid,
    random_broken_layout,
    shapely_box,
)
from roomsynth.geometry import flush_wall, footprint, wall2rotation
from roomsynth.grid_refine import (
    RefineReport,
    build_grid,
    collision_pairs,
    invalid_objects,
    is_physically_valid,
    is_valid_placement,
    refine,
    smaller_of,
    wall_flags,
)
from roomsynth.scene import ConstraintSet, Layout, Pose, Room, WallId


def test_grid_counts():
    g = build_grid(Room(200, 200), 50)
    assert sorted(g.interior) == sorted((x, y) for x in (50, 100, 150) for y in (50, 100, 150))
    assert list(g.per_wall[WallId.BOTTOM]) == [(0, 0), (50, 0), (100, 0), (150, 0), (200, 0)]
    assert len(build_grid(Room(600, 400), 10).interior) == 59 * 39


@given(st.integers(50, 900), st.integers(50, 900), st.sampled_from([5, 10, 25, 50]))
def test_grid_matches_enumeration(w, d, s):
    g = build_grid(Room(w, d), s)
    interior, walls = oracle_grid(Room(w, d), s)
    assert sorted(g.interior) == sorted(interior)
    for wall in WallId:
        assert sorted(g.per_wall[wall]) == sorted(walls[wall.value])


def test_grid_rejects_bad_spacing():
    with pytest.raises(ValueError):
        build_grid(Room(200, 200), 0)
    with pytest.raises(ValueError):
        build_grid(Room(200, 100), 150)


def test_validity_examples():
    room = Room(400, 300)
    sofa = asset("sofa-0", 200, 90)
    alone = make_layout(room, (sofa, Pose(200, 150, 0)))
    assert is_valid_placement(sofa, Pose(200, 150, 0), alone, room)
    box = asset("box-0", 40, 40)
    crowded = make_layout(room, (sofa, Pose(200, 150, 0)), (box, Pose(299, 150, 0)))
    assert not is_valid_placement(box, Pose(299, 150, 0), crowded, room)
    assert is_valid_placement(box, Pose(320, 150, 0), crowded, room)
    # 5 cm off the bottom wall, then flush
    assert not is_valid_placement(sofa, Pose(200, 50, 0), alone, room, against_wall=True)
    assert is_valid_placement(sofa, Pose(200, 45, 0), alone, room, against_wall=True)
    # flush but facing the wall is not an inward-facing placement
    assert not is_valid_placement(sofa, Pose(200, 45, 180), alone, room, against_wall=True)


def test_refine_keeps_valid_layout():
    room = Room(400, 300)
    layout = make_layout(room, (asset("a", 100, 60), Pose(100, 100, 0)), (asset("b", 50, 50), Pose(300, 200, 90)))
    out, report = refine(layout, None, build_grid(room, 10))
    assert out == layout
    assert report.empty()


def test_refine_oob_example():
    room = Room(200, 200)
    layout = make_layout(room, (asset("crate-0", 60, 60), Pose(190, 100, 0)))
    out, report = refine(layout, None, build_grid(room, 50))
    assert out.pose("crate-0") == Pose(150, 100, 0)
    assert [m.reason for m in report.moved] == ["oob"]
    # every interior grid point scored by hand: (150,100) is the unique closest valid one
    assert oracle_nearest_valid("crate-0", layout, False, 50) == Pose(150, 100, 0)


def test_refine_collision_example():
    room = Room(400, 400)
    big, small = asset("A", 100, 100), asset("B", 40, 40)
    layout = make_layout(room, (big, Pose(100, 100, 0)), (small, Pose(110, 110, 0)))
    out, report = refine(layout, None, build_grid(room, 50))
    assert out.pose("A") == Pose(100, 100, 0)
    assert out.pose("B") == oracle_nearest_valid("B", layout, False, 50)
    assert [m.object_name for m in report.moved] == ["B"]
    assert is_physically_valid(out)


def test_object_that_cannot_fit_is_deleted():
    room = Room(200, 200)
    hog = asset("hog-0", 180, 180)
    stuck = asset("stuck-0", 60, 60)
    layout = make_layout(room, (hog, Pose(100, 100, 0)), (stuck, Pose(100, 100, 0)))
    out, report = refine(layout, None, build_grid(room, 10))
    assert report.deleted == ["stuck-0"]
    assert "stuck-0" not in out and "hog-0" in out


@pytest.mark.parametrize("wall", list(WallId))
def test_wall_alignment_each_wall(wall):
    room = Room(400, 300)
    desk = asset("desk-0", 80, 40)
    start = {
        WallId.BOTTOM: Pose(200, 40, 90),
        WallId.RIGHT: Pose(350, 150, 0),
        WallId.TOP: Pose(200, 255, 0),
        WallId.LEFT: Pose(30, 150, 180),
    }[wall]
    layout = make_layout(room, (desk, start))
    out, report = refine(layout, [ConstraintSet("desk-0", against_wall=True)], build_grid(room, 10))
    pose = out.pose("desk-0")
    r = footprint(desk, pose)
    back = {WallId.BOTTOM: r.min_y, WallId.RIGHT: r.max_x, WallId.TOP: r.max_y, WallId.LEFT: r.min_x}[wall]
    coord = {WallId.BOTTOM: 0, WallId.RIGHT: 400, WallId.TOP: 300, WallId.LEFT: 0}[wall]
    assert back == coord
    assert pose.theta == wall2rotation(wall)
    assert flush_wall(desk, pose, room) is wall
    assert report.moved[0].reason == "wall"


def test_collision_order_and_yielding():
    room = Room(400, 400)
    a, b = asset("a", 40, 40), asset("b", 40, 40)
    layout = make_layout(room, (a, Pose(100, 100, 0)), (b, Pose(110, 100, 0)))
    assert smaller_of(layout, "a", "b") == "b"
    c = asset("c", 20, 20)
    layout = make_layout(room, (a, Pose(100, 100, 0)), (c, Pose(100, 100, 0)), (b, Pose(300, 300, 0)))
    assert smaller_of(layout, "a", "c") == "c"
    pairs = collision_pairs(make_layout(room, (a, Pose(100, 100, 0)), (b, Pose(105, 100, 0)), (c, Pose(125, 100, 0))))
    assert [p[1:] for p in pairs] == [("a", "b"), ("b", "c"), ("a", "c")]


def test_report_json_round_trip():
    rng = random.Random(2)
    layout, cons = random_broken_layout(rng)
    _, report = refine(layout, cons, build_grid(layout.room, 10))
    assert RefineReport.from_json(report.to_json()) == report


# -- properties on fuzzed layouts ------------------------------------------------


def _oracle_all_valid(layout: Layout, walls: dict) -> bool:
    return all(oracle_valid(n, a, p, layout, walls.get(n, False)) for n, (a, p) in layout)


@given(st.integers(0, 10_000))
def test_refine_postconditions(seed):
    layout, cons = random_broken_layout(random.Random(seed))
    walls = wall_flags(cons)
    out, report = refine(layout, cons, build_grid(layout.room, 10))
    assert _oracle_all_valid(out, walls)
    assert set(out.names()) | set(report.deleted) == set(layout.names())
    again, second = refine(out, cons, build_grid(layout.room, 10))
    assert again == out and second.empty()


@given(st.integers(0, 10_000))
def test_each_move_is_brute_force_nearest(seed):
    layout, cons = random_broken_layout(random.Random(seed))
    walls = wall_flags(cons)
    seen = []

    def on_move(reason, name, before, new):
        seen.append((name, new, oracle_nearest_valid(name, before, walls.get(name, False), 50)))

    refine(layout, cons, build_grid(layout.room, 50), on_move=on_move)
    for name, got, expect in seen:
        assert got == expect, name


@given(st.integers(0, 10_000))
def test_phases_never_break_valid_objects(seed):
    layout, cons = random_broken_layout(random.Random(seed))
    walls = wall_flags(cons)
    grid = build_grid(layout.room, 10)
    state = {"valid": set(layout.names()) - set(invalid_objects(layout, walls))}

    def check(current):
        for name in state["valid"]:
            a, p = current.placed[name]
            assert oracle_valid(name, a, p, current, walls.get(name, False))
        state["valid"] = set(current.names()) - set(invalid_objects(current, walls))

    def on_move(reason, name, before, new):
        after = before.without(name) if new is None else before.with_pose(name, new)
        check(after)

    refine(layout, cons, grid, on_move=on_move, on_phase=lambda phase, current: check(current))


def test_refine_is_deterministic():
    layout, cons = random_broken_layout(random.Random(99))
    grid = build_grid(layout.room, 10)
    a = refine(layout, cons, grid)
    b = refine(layout, cons, grid)
    assert a[0] == b[0] and a[1].to_json() == b[1].to_json()
