"""Planar geometry under quarter-turn rotations.

Every footprint is an axis-aligned rectangle because rotations are restricted
to multiples of 90 degrees, so overlap and containment are interval math.
"""

from __future__ import annotations

from dataclasses import dataclass

from .scene import WALL_ORDER, AssetSpec, Pose, Room, WallId

# facing unit vectors: 0 faces +Y, clockwise quarter turns
FACING = {0: (0, 1), 90: (1, 0), 180: (0, -1), 270: (-1, 0)}

_WALL_THETA = {WallId.BOTTOM: 0, WallId.LEFT: 90, WallId.TOP: 180, WallId.RIGHT: 270}


@dataclass(frozen=True)
class Rect:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self) -> None:
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise ValueError(f"inverted rect {self}")

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.min_x + self.max_x) / 2, (self.min_y + self.max_y) / 2)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)


def extents(asset: AssetSpec, theta: int) -> tuple[float, float]:
    """World-frame (x, y) extents of the asset at ``theta``."""
    if theta in (90, 270):
        return asset.footprint_d, asset.footprint_w
    return asset.footprint_w, asset.footprint_d


def footprint(asset: AssetSpec, pose: Pose) -> Rect:
    ex, ey = extents(asset, pose.theta)
    return Rect(pose.x - ex / 2, pose.y - ey / 2, pose.x + ex / 2, pose.y + ey / 2)


def room_rect(room: Room) -> Rect:
    return Rect(0.0, 0.0, room.width, room.depth)


def intersection_area(a: Rect, b: Rect) -> float:
    dx = min(a.max_x, b.max_x) - max(a.min_x, b.min_x)
    dy = min(a.max_y, b.max_y) - max(a.min_y, b.min_y)
    if dx <= 0 or dy <= 0:
        return 0.0
    return dx * dy


def iou(a: Rect, b: Rect) -> float:
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def outside_area(r: Rect, room: Room) -> float:
    return r.area - intersection_area(r, room_rect(room))


def contains(room: Room, r: Rect) -> bool:
    return r.min_x >= 0 and r.min_y >= 0 and r.max_x <= room.width and r.max_y <= room.depth


def edge_distance(a: Rect, b: Rect) -> float:
    """Minimum gap between two rectangles; 0 when they touch or overlap."""
    dx = max(0.0, a.min_x - b.max_x, b.min_x - a.max_x)
    dy = max(0.0, a.min_y - b.max_y, b.min_y - a.max_y)
    return (dx * dx + dy * dy) ** 0.5


def wall_distances(x: float, y: float, room: Room) -> dict[WallId, float]:
    return {
        WallId.BOTTOM: y,
        WallId.RIGHT: room.width - x,
        WallId.TOP: room.depth - y,
        WallId.LEFT: x,
    }


def nearest_wall(point: tuple[float, float], room: Room) -> tuple[WallId, float]:
    x = min(max(point[0], 0.0), room.width)
    y = min(max(point[1], 0.0), room.depth)
    dists = wall_distances(x, y, room)
    best = WALL_ORDER[0]
    for wall in WALL_ORDER[1:]:
        if dists[wall] < dists[best]:
            best = wall
    return best, dists[best]


def wall2rotation(wall: WallId) -> int:
    """Rotation that puts the object's back to ``wall`` and its front toward the room."""
    return _WALL_THETA[wall]


def wall_coordinate(wall: WallId, room: Room) -> float:
    return {
        WallId.BOTTOM: 0.0,
        WallId.RIGHT: room.width,
        WallId.TOP: room.depth,
        WallId.LEFT: 0.0,
    }[wall]


def back_center(asset: AssetSpec, pose: Pose) -> tuple[float, float]:
    fx, fy = FACING[pose.theta]
    half = asset.footprint_d / 2  # depth always runs along the facing axis
    return (pose.x - fx * half, pose.y - fy * half)


def front_center(asset: AssetSpec, pose: Pose) -> tuple[float, float]:
    fx, fy = FACING[pose.theta]
    half = asset.footprint_d / 2
    return (pose.x + fx * half, pose.y + fy * half)


def pull_to_wall(point: tuple[float, float], asset: AssetSpec, pose: Pose) -> Pose:
    """Translate ``pose`` so its back-face midpoint lands on ``point``."""
    fx, fy = FACING[pose.theta]
    half = asset.footprint_d / 2
    return Pose(point[0] + fx * half, point[1] + fy * half, pose.theta)


def flush_wall(asset: AssetSpec, pose: Pose, room: Room, tol: float = 1e-9) -> WallId | None:
    """The wall this placement sits flush against with its back, facing inward, if any."""
    r = footprint(asset, pose)
    back = {
        WallId.BOTTOM: r.min_y,
        WallId.RIGHT: r.max_x,
        WallId.TOP: r.max_y,
        WallId.LEFT: r.min_x,
    }
    for wall in WALL_ORDER:
        if pose.theta == _WALL_THETA[wall] and abs(back[wall] - wall_coordinate(wall, room)) <= tol:
            return wall
    return None


def local_offset(pose: Pose, point: tuple[float, float]) -> tuple[float, float]:
    """``point`` relative to ``pose`` as (lateral, forward); lateral is positive to the right."""
    fx, fy = FACING[pose.theta]
    dx, dy = point[0] - pose.x, point[1] - pose.y
    forward = dx * fx + dy * fy
    # right-hand vector is the facing vector turned a further 90 degrees clockwise
    rx, ry = fy, -fx
    lateral = dx * rx + dy * ry
    return lateral, forward
