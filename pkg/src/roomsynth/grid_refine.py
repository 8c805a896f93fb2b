"""Grid-matching physical repair.

An object is physically valid when its footprint has zero overlap with every
other footprint, lies fully inside the room and, for wall-bound objects, has
its back face flush with a wall while facing into the room. Invalid objects
are moved to the nearest grid point at which they become valid; an object
with no such point is deleted.

The repair runs three phases in order: wall alignment, out-of-bounds
correction, collision resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .geometry import (
    back_center,
    contains,
    flush_wall,
    footprint,
    intersection_area,
    iou,
    nearest_wall,
    outside_area,
    pull_to_wall,
    wall2rotation,
)
from .scene import AssetSpec, ConstraintSet, Layout, Pose, Room, WallId

DEFAULT_SPACING = 10.0

Point = tuple[float, float]


@dataclass(frozen=True)
class GridSet:
    spacing: float
    interior: tuple[Point, ...]
    per_wall: dict[WallId, tuple[Point, ...]]


def _steps(extent: float, spacing: float, inclusive: bool) -> list[float]:
    out = []
    k = 0 if inclusive else 1
    while True:
        v = k * spacing
        if v > extent or (not inclusive and v >= extent):
            break
        out.append(float(v))
        k += 1
    return out


def build_grid(room: Room, spacing: float = DEFAULT_SPACING) -> GridSet:
    """Uniform grid over the room.

    Interior points sit at positive multiples of ``spacing`` strictly inside
    the room. Wall points sit at multiples of ``spacing`` along each wall,
    corners included when the extent is a multiple of the spacing.
    """
    if not spacing > 0:
        raise ValueError(f"grid spacing must be positive, got {spacing}")
    if spacing > min(room.width, room.depth):
        raise ValueError(f"grid spacing {spacing} exceeds the room's short side")
    xs_in = _steps(room.width, spacing, inclusive=False)
    ys_in = _steps(room.depth, spacing, inclusive=False)
    interior = tuple((x, y) for y in ys_in for x in xs_in)
    xs = _steps(room.width, spacing, inclusive=True)
    ys = _steps(room.depth, spacing, inclusive=True)
    per_wall = {
        WallId.BOTTOM: tuple((x, 0.0) for x in xs),
        WallId.RIGHT: tuple((room.width, y) for y in ys),
        WallId.TOP: tuple((x, room.depth) for x in xs),
        WallId.LEFT: tuple((0.0, y) for y in ys),
    }
    return GridSet(spacing, interior, per_wall)


def collides(asset: AssetSpec, pose: Pose, layout: Layout, ignore: str | None = None) -> bool:
    rect = footprint(asset, pose)
    for name, (other, other_pose) in layout:
        if name == ignore or name == asset.object_name:
            continue
        if intersection_area(rect, footprint(other, other_pose)) > 0:
            return True
    return False


def is_valid_placement(
    asset: AssetSpec, pose: Pose, layout: Layout, room: Room, against_wall: bool = False
) -> bool:
    """All physical criteria for ``asset`` at ``pose`` against the rest of ``layout``."""
    if not contains(room, footprint(asset, pose)):
        return False
    if against_wall and flush_wall(asset, pose, room) is None:
        return False
    return not collides(asset, pose, layout)


def wall_flags(constraints: Iterable[ConstraintSet] | None) -> dict[str, bool]:
    return {c.subject: c.against_wall for c in constraints or ()}


def invalid_objects(layout: Layout, walls: dict[str, bool]) -> list[str]:
    return [
        name
        for name, (asset, pose) in layout
        if not is_valid_placement(asset, pose, layout, layout.room, walls.get(name, False))
    ]


def _dist2(a: Point, b: Point) -> float:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def rank_points(points: Iterable[Point], origin: Point) -> list[Point]:
    """Points by distance to ``origin``; ties by y then x, ascending."""
    return sorted(points, key=lambda p: (_dist2(p, origin), p[1], p[0]))


def candidate_poses(
    asset: AssetSpec, pose: Pose, against_wall: bool, grid: GridSet, room: Room
) -> tuple[list[tuple[Point, Pose]], WallId | None]:
    """Grid candidates for ``asset`` nearest first, each as ``(grid point, pose)``.

    Wall-bound objects keep to one wall: the one they already sit flush
    against, else the wall nearest their center. Their distance is measured
    from the back-face midpoint. Other objects keep their rotation and are
    ranked by center distance over the interior grid.
    """
    if against_wall:
        wall = flush_wall(asset, pose, room)
        if wall is None:
            wall, _ = nearest_wall((pose.x, pose.y), room)
        turned = Pose(pose.x, pose.y, wall2rotation(wall))
        origin = back_center(asset, turned)
        ranked = rank_points(grid.per_wall[wall], origin)
        return [(g, pull_to_wall(g, asset, turned)) for g in ranked], wall
    ranked = rank_points(grid.interior, (pose.x, pose.y))
    return [(g, Pose(g[0], g[1], pose.theta)) for g in ranked], None


def nearest_valid(
    asset: AssetSpec, pose: Pose, against_wall: bool, grid: GridSet, layout: Layout
) -> tuple[Pose | None, int]:
    """First valid candidate and the number of grid points inspected to find it."""
    candidates, _ = candidate_poses(asset, pose, against_wall, grid, layout.room)
    scanned = 0
    for _, cand in candidates:
        scanned += 1
        if is_valid_placement(asset, cand, layout, layout.room, against_wall):
            return cand, scanned
    return None, scanned


@dataclass(frozen=True)
class Move:
    object_name: str
    old: Pose
    new: Pose
    reason: str  # wall | oob | collision


@dataclass
class RefineReport:
    moved: list[Move] = field(default_factory=list)
    deleted: list[str] = field(default_factory=list)
    grid_points_scanned: int = 0

    def empty(self) -> bool:
        return not self.moved and not self.deleted

    def to_json(self) -> dict:
        return {
            "moved": [
                {
                    "object_name": m.object_name,
                    "old": _pose_json(m.old),
                    "new": _pose_json(m.new),
                    "reason": m.reason,
                }
                for m in self.moved
            ],
            "deleted": list(self.deleted),
            "grid_points_scanned": self.grid_points_scanned,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RefineReport":
        return cls(
            moved=[
                Move(m["object_name"], _pose_from(m["old"]), _pose_from(m["new"]), m["reason"])
                for m in doc["moved"]
            ],
            deleted=list(doc["deleted"]),
            grid_points_scanned=int(doc["grid_points_scanned"]),
        )


def _pose_json(p: Pose) -> list:
    return [p.x, p.y, p.theta]


def _pose_from(v: Sequence) -> Pose:
    return Pose(float(v[0]), float(v[1]), int(v[2]))


# hook signatures: on_move(reason, name, layout_before, new_pose_or_None)
#                  on_phase(phase, layout_after)
MoveHook = Callable[[str, str, Layout, "Pose | None"], None]
PhaseHook = Callable[[str, Layout], None]


def collision_pairs(layout: Layout) -> list[tuple[float, str, str]]:
    """Overlapping pairs as ``(iou, a, b)`` with ``a < b``, highest overlap first."""
    items = [(name, footprint(a, p)) for name, (a, p) in layout]
    pairs = []
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            (na, ra), (nb, rb) = items[i], items[j]
            if intersection_area(ra, rb) > 0:
                a, b = sorted((na, nb))
                pairs.append((iou(ra, rb), a, b))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    return pairs


def smaller_of(layout: Layout, a: str, b: str) -> str:
    """The object that yields in a collision: smaller footprint, else the later name."""
    area_a, area_b = layout.asset(a).area, layout.asset(b).area
    if area_a != area_b:
        return a if area_a < area_b else b
    return max(a, b)


def refine(
    layout: Layout,
    constraints: Sequence[ConstraintSet] | None,
    grid: GridSet,
    on_move: MoveHook | None = None,
    on_phase: PhaseHook | None = None,
) -> tuple[Layout, RefineReport]:
    walls = wall_flags(constraints)
    report = RefineReport()
    room = layout.room
    current = layout

    def relocate(name: str, reason: str) -> None:
        nonlocal current
        asset, pose = current.placed[name]
        new, scanned = nearest_valid(asset, pose, walls.get(name, False), grid, current)
        report.grid_points_scanned += scanned
        if on_move is not None:
            on_move(reason, name, current, new)
        if new is None:
            current = current.without(name)
            report.deleted.append(name)
        else:
            current = current.with_pose(name, new)
            report.moved.append(Move(name, pose, new, reason))

    # Step 1: wall alignment
    for name in list(current.names()):
        if not walls.get(name, False):
            continue
        asset, pose = current.placed[name]
        if flush_wall(asset, pose, room) is not None:
            continue
        relocate(name, "wall")
    if on_phase is not None:
        on_phase("wall", current)

    # Step 2: out-of-bounds correction
    for name in list(current.names()):
        asset, pose = current.placed[name]
        if outside_area(footprint(asset, pose), room) > 0:
            relocate(name, "oob")
    if on_phase is not None:
        on_phase("oob", current)

    # Step 3: collision resolution, re-detecting pairs after every move
    while True:
        pairs = collision_pairs(current)
        if not pairs:
            break
        _, a, b = pairs[0]
        relocate(smaller_of(current, a, b), "collision")
    if on_phase is not None:
        on_phase("collision", current)

    return current, report


def is_physically_valid(layout: Layout, constraints: Sequence[ConstraintSet] | None = None) -> bool:
    return not invalid_objects(layout, wall_flags(constraints))


__all__ = [
    "DEFAULT_SPACING",
    "GridSet",
    "Move",
    "RefineReport",
    "build_grid",
    "candidate_poses",
    "collision_pairs",
    "is_physically_valid",
    "is_valid_placement",
    "nearest_valid",
    "rank_points",
    "refine",
]
