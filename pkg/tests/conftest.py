"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid roomsynth.geometry: overlap and
containment go through shapely, and Monte-Carlo estimators sample points.
"""

from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from shapely.geometry import box

from roomsynth.scene import AssetSpec, Layout, Placement, Pose, Room

settings.register_profile(
    "default", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def asset(name: str, w: float, d: float, h: float = 50) -> AssetSpec:
    return AssetSpec(name, w, d, h)


def make_layout(room: Room, *items: tuple[AssetSpec, Pose]) -> Layout:
    return Layout(room, {a.object_name: Placement(a, p) for a, p in items})


# -- oracles -----------------------------------------------------------------


def shapely_box(a: AssetSpec, p: Pose):
    """Footprint built from first principles: depth runs along the facing axis."""
    w, d = (a.footprint_d, a.footprint_w) if p.theta in (90, 270) else (a.footprint_w, a.footprint_d)
    return box(p.x - w / 2, p.y - d / 2, p.x + w / 2, p.y + d / 2)


def room_box(room: Room):
    return box(0, 0, room.width, room.depth)


def oracle_valid(name: str, a: AssetSpec, p: Pose, layout: Layout, against_wall: bool) -> bool:
    shape = shapely_box(a, p)
    if not room_box(layout.room).contains(shape):
        return False
    for other, (oa, op) in layout:
        if other == name:
            continue
        if shape.intersection(shapely_box(oa, op)).area > 0:
            return False
    if against_wall:
        minx, miny, maxx, maxy = shape.bounds
        flush = {
            0: miny == 0,
            90: minx == 0,
            180: maxy == layout.room.depth,
            270: maxx == layout.room.width,
        }
        if not flush[p.theta]:
            return False
    return True


def _jittered(shape, rng: np.random.Generator, per_side: int):
    """One uniform sample inside every cell of a per_side x per_side partition of the box."""
    x0, y0, x1, y1 = shape.bounds
    i = np.arange(per_side)
    cx, cy = np.meshgrid(i, i, indexing="ij")
    u = rng.random((2, per_side, per_side))
    xs = x0 + (cx + u[0]) * (x1 - x0) / per_side
    ys = y0 + (cy + u[1]) * (y1 - y0) / per_side
    return xs.ravel(), ys.ravel()


def mc_collision_rate(layout: Layout, rng: np.random.Generator, per_side: int = 400) -> float:
    """Pair counting where overlap is detected by sampling points of one box inside the other."""
    items = [shapely_box(a, p) for _, (a, p) in layout]
    n = len(items)
    if n < 2:
        return 0.0
    hits = 0
    for i in range(n):
        xs, ys = _jittered(items[i], rng, per_side)
        for j in range(i + 1, n):
            bx0, by0, bx1, by1 = items[j].bounds
            if np.any((xs > bx0) & (xs < bx1) & (ys > by0) & (ys < by1)):
                hits += 1
    return 100.0 * hits / (n * (n - 1) / 2)


def mc_outside_fraction(shape, room: Room, rng: np.random.Generator, per_side: int = 400) -> float:
    xs, ys = _jittered(shape, rng, per_side)
    inside = (xs >= 0) & (xs <= room.width) & (ys >= 0) & (ys <= room.depth)
    return float(1.0 - inside.mean())


def mc_oob_rate(layout: Layout, rng: np.random.Generator, per_side: int = 400) -> float:
    if len(layout) == 0:
        return 0.0
    fr = [mc_outside_fraction(shapely_box(a, p), layout.room, rng, per_side) for _, (a, p) in layout]
    return 100.0 * sum(fr) / len(fr)


@pytest.fixture
def bedroom_assets() -> list[AssetSpec]:
    return [
        asset("bed-0", 160, 200, 50),
        asset("nightstand-0", 40, 40, 50),
        asset("nightstand-1", 40, 40, 50),
        asset("wardrobe-0", 120, 60, 200),
    ]


# -- brute-force grid oracle -----------------------------------------------------

_FACE = {0: (0, 1), 90: (1, 0), 180: (0, -1), 270: (-1, 0)}
_WALL_THETA = {"bottom": 0, "left": 90, "top": 180, "right": 270}


def oracle_grid(room: Room, spacing: float):
    """Interior points strictly inside and per-wall points, by plain enumeration."""
    nx = int(room.width // spacing) + 1
    ny = int(room.depth // spacing) + 1
    xs = [k * spacing for k in range(nx) if k * spacing <= room.width]
    ys = [k * spacing for k in range(ny) if k * spacing <= room.depth]
    interior = [(x, y) for x in xs for y in ys if 0 < x < room.width and 0 < y < room.depth]
    walls = {
        "bottom": [(x, 0.0) for x in xs],
        "top": [(x, room.depth) for x in xs],
        "left": [(0.0, y) for y in ys],
        "right": [(room.width, y) for y in ys],
    }
    return interior, walls


def oracle_flush_wall(a: AssetSpec, p: Pose, room: Room) -> str | None:
    minx, miny, maxx, maxy = shapely_box(a, p).bounds
    hits = {
        "bottom": p.theta == 0 and miny == 0,
        "right": p.theta == 270 and maxx == room.width,
        "top": p.theta == 180 and maxy == room.depth,
        "left": p.theta == 90 and minx == 0,
    }
    for wall in ("bottom", "right", "top", "left"):
        if hits[wall]:
            return wall
    return None


def oracle_nearest_wall(x: float, y: float, room: Room) -> str:
    x = min(max(x, 0), room.width)
    y = min(max(y, 0), room.depth)
    d = {"bottom": y, "right": room.width - x, "top": room.depth - y, "left": x}
    order = ["bottom", "right", "top", "left"]
    return min(order, key=lambda k: (d[k], order.index(k)))


def oracle_nearest_valid(name: str, layout: Layout, against_wall: bool, spacing: float) -> Pose | None:
    """Exhaustively score every candidate grid point and keep the best valid one."""
    a, p = layout.placed[name]
    room = layout.room
    interior, walls = oracle_grid(room, spacing)
    rest = layout.without(name)
    scored = []
    if against_wall:
        wall = oracle_flush_wall(a, p, room) or oracle_nearest_wall(p.x, p.y, room)
        theta = _WALL_THETA[wall]
        fx, fy = _FACE[theta]
        origin = (p.x - fx * a.footprint_d / 2, p.y - fy * a.footprint_d / 2)
        for gx, gy in walls[wall]:
            cand = Pose(gx + fx * a.footprint_d / 2, gy + fy * a.footprint_d / 2, theta)
            if oracle_valid(name, a, cand, rest, True):
                scored.append(((gx - origin[0]) ** 2 + (gy - origin[1]) ** 2, gy, gx, cand))
    else:
        for gx, gy in interior:
            cand = Pose(gx, gy, p.theta)
            if oracle_valid(name, a, cand, rest, False):
                scored.append(((gx - p.x) ** 2 + (gy - p.y) ** 2, gy, gx, cand))
    if not scored:
        return None
    return min(scored, key=lambda t: t[:3])[3]


def random_broken_layout(rng: random.Random, max_side: int = 400, max_objects: int = 8):
    """A small room with overlapping, out-of-bounds and off-wall objects."""
    from roomsynth.scene import ConstraintSet

    room = Room(rng.randrange(200, max_side + 1, 10), rng.randrange(200, max_side + 1, 10))
    n = rng.randint(1, max_objects)
    items, cons = [], []
    for i in range(n):
        a = asset(f"obj-{i}", rng.randrange(20, 121, 10), rng.randrange(20, 121, 10))
        pose = Pose(rng.randrange(-40, room.width + 41, 5), rng.randrange(-40, room.depth + 41, 5), rng.choice([0, 90, 180, 270]))
        items.append((a, pose))
        cons.append(ConstraintSet(a.object_name, against_wall=rng.random() < 0.3))
    return make_layout(room, *items), cons


# -- acceptance reporting ----------------------------------------------------

_CRITERIA: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    title_, outcomes = _CRITERIA.setdefault(number, (title, []))
    if report.when == "call" or report.outcome != "passed":
        outcomes.append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        ok = bool(outcomes) and all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
