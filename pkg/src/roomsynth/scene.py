"""Scene data model and JSON persistence.

Coordinates are centimeters with the origin at the bottom-left room corner.
Rotations are clockwise quarter turns measured from the +Y facing direction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, NamedTuple

VALID_THETAS = (0, 90, 180, 270)


class SceneError(ValueError):
    """Raised for malformed scene documents or broken invariants."""


class WallId(Enum):
    BOTTOM = "bottom"
    RIGHT = "right"
    TOP = "top"
    LEFT = "left"


# canonical order doubles as the tie-break order for nearest-wall queries
WALL_ORDER = (WallId.BOTTOM, WallId.RIGHT, WallId.TOP, WallId.LEFT)


@dataclass(frozen=True)
class Room:
    width: float
    depth: float

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.depth > 0):
            raise SceneError(f"room dimensions must be positive, got {self.width}x{self.depth}")

    @property
    def walls(self) -> tuple[tuple[WallId, tuple[float, float], tuple[float, float]], ...]:
        """The four boundary segments as ``(wall, start, end)``, bottom/right/top/left."""
        w, d = self.width, self.depth
        return (
            (WallId.BOTTOM, (0.0, 0.0), (w, 0.0)),
            (WallId.RIGHT, (w, 0.0), (w, d)),
            (WallId.TOP, (0.0, d), (w, d)),
            (WallId.LEFT, (0.0, 0.0), (0.0, d)),
        )

    @property
    def size_text(self) -> str:
        return f"{cm_value(self.width)}cm x {cm_value(self.depth)}cm"


@dataclass(frozen=True)
class AssetSpec:
    object_name: str
    footprint_w: float
    footprint_d: float
    height: float = 0.0

    def __post_init__(self) -> None:
        if not self.object_name:
            raise SceneError("object_name must be nonempty")
        if not (self.footprint_w > 0 and self.footprint_d > 0):
            raise SceneError(
                f"{self.object_name}: footprint must be positive, got "
                f"{self.footprint_w}x{self.footprint_d}"
            )

    @property
    def area(self) -> float:
        return self.footprint_w * self.footprint_d

    @property
    def category(self) -> str:
        head, sep, tail = self.object_name.rpartition("-")
        return head if sep and tail.isdigit() else self.object_name


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: int = 0

    def __post_init__(self) -> None:
        if self.theta not in VALID_THETAS:
            raise SceneError(f"theta must be one of {VALID_THETAS}, got {self.theta!r}")
        object.__setattr__(self, "theta", int(self.theta))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise SceneError(f"pose coordinates must be finite, got ({self.x}, {self.y})")


class RelationKind(Enum):
    NEAR = "near"
    SIDE_OF = "side_of"
    IN_FRONT_OF = "in_front_of"
    ALIGNED_WITH = "aligned_with"
    OPPOSITE = "opposite"
    AROUND = "around"

    @classmethod
    def parse(cls, text: str) -> "RelationKind":
        key = " ".join(str(text).strip().lower().replace("_", " ").replace("-", " ").split())
        for kind in cls:
            if kind.value.replace("_", " ") == key:
                return kind
        raise SceneError(f"unknown relation {text!r}")

    @property
    def phrase(self) -> str:
        return self.value.replace("_", " ")


@dataclass(frozen=True)
class ConstraintSet:
    subject: str
    against_wall: bool = False
    relations: tuple[tuple[RelationKind, str], ...] = ()
    facing: str | None = None

    def __post_init__(self) -> None:
        if self.against_wall and self.facing is not None:
            raise SceneError(f"{self.subject}: against_wall objects cannot carry a facing target")

    def targets(self) -> set[str]:
        out = {t for _, t in self.relations}
        if self.facing is not None:
            out.add(self.facing)
        return out


@dataclass(frozen=True)
class GroupPlan:
    groups: tuple[tuple[str, ...], ...]

    def validate(self, names: Iterable[str]) -> None:
        names = list(names)
        seen: set[str] = set()
        for group in self.groups:
            if not group:
                raise SceneError("empty group in plan")
            for name in group:
                if name in seen:
                    raise SceneError(f"{name} appears in more than one group")
                seen.add(name)
        unknown = seen - set(names)
        if unknown:
            raise SceneError(f"groups reference unknown assets: {sorted(unknown)}")
        missing = [n for n in names if n not in seen]
        if missing:
            raise SceneError(f"groups do not cover assets: {missing}")


class Placement(NamedTuple):
    asset: AssetSpec
    pose: Pose


@dataclass(frozen=True)
class Layout:
    """An immutable room plus the poses placed in it so far.

    ``placed`` preserves insertion order, which every deterministic pass
    over the layout iterates in.
    """

    room: Room
    placed: Mapping[str, Placement] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, (asset, _) in self.placed.items():
            if name != asset.object_name:
                raise SceneError(f"placement key {name!r} does not match asset {asset.object_name!r}")

    def __len__(self) -> int:
        return len(self.placed)

    def __contains__(self, name: object) -> bool:
        return name in self.placed

    def __iter__(self):
        return iter(self.placed.items())

    def names(self) -> list[str]:
        return list(self.placed)

    def pose(self, name: str) -> Pose:
        return self.placed[name].pose

    def asset(self, name: str) -> AssetSpec:
        return self.placed[name].asset

    def with_pose(self, name: str, pose: Pose) -> "Layout":
        if name not in self.placed:
            raise KeyError(name)
        placed = dict(self.placed)
        placed[name] = Placement(placed[name].asset, pose)
        return Layout(self.room, placed)

    def without(self, name: str) -> "Layout":
        placed = dict(self.placed)
        del placed[name]
        return Layout(self.room, placed)

    def poses(self) -> dict[str, Pose]:
        return {name: p.pose for name, p in self.placed.items()}


def integrate_group(base: Layout, proposal: Mapping[str, Placement]) -> Layout:
    """Union of ``base`` and a group proposal; the base layout is left untouched."""
    clash = [name for name in proposal if name in base.placed]
    if clash:
        raise SceneError(f"proposal names already placed: {clash}")
    placed = dict(base.placed)
    for name, placement in proposal.items():
        asset, pose = placement
        placed[name] = Placement(asset, pose)
    return Layout(base.room, placed)


# -- persistence -------------------------------------------------------------

_KNOWN_KEYS = ("room_type", "prompt", "room", "assets", "layout", "constraints")


@dataclass
class Scene:
    """Everything a scene file carries."""

    room: Room
    assets: list[AssetSpec]
    prompt: str = ""
    room_type: str = ""
    poses: dict[str, Pose] | None = None
    constraints: list[ConstraintSet] | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def asset_map(self) -> dict[str, AssetSpec]:
        return {a.object_name: a for a in self.assets}

    def layout(self) -> Layout:
        by_name = self.asset_map()
        placed = {}
        for name, pose in (self.poses or {}).items():
            placed[name] = Placement(by_name[name], pose)
        return Layout(self.room, placed)


def cm_value(value: float) -> int | float:
    """Integral values serialize as ints; half-centimeter values stay exact."""
    if float(value).is_integer():
        return int(value)
    return float(value)


def _positive(doc: Mapping[str, Any], key: str, where: str) -> float:
    try:
        value = float(doc[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(f"{where}: missing or non-numeric {key!r}") from exc
    if not value > 0:
        raise SceneError(f"{where}: {key} must be positive, got {value}")
    return value


def constraint_to_json(c: ConstraintSet) -> dict[str, Any]:
    return {
        "against_wall": c.against_wall,
        "relations": [{"kind": k.value, "target": t} for k, t in c.relations],
        "facing": c.facing,
    }


def constraint_from_json(subject: str, doc: Mapping[str, Any]) -> ConstraintSet:
    relations = tuple(
        (RelationKind.parse(r["kind"]), str(r["target"])) for r in doc.get("relations") or ()
    )
    return ConstraintSet(
        subject=subject,
        against_wall=bool(doc.get("against_wall", False)),
        relations=relations,
        facing=doc.get("facing"),
    )


def pose_to_json(name: str, pose: Pose) -> dict[str, Any]:
    return {
        "object_name": name,
        "position": {"X": cm_value(pose.x), "Y": cm_value(pose.y)},
        "rotation": pose.theta,
    }


def scene_from_dict(doc: Mapping[str, Any]) -> Scene:
    if not isinstance(doc, Mapping):
        raise SceneError("scene document must be a JSON object")
    room_doc = doc.get("room")
    if not isinstance(room_doc, Mapping):
        raise SceneError("scene is missing the 'room' object")
    if "polygon" in room_doc or "vertices" in room_doc:
        raise SceneError("only rectangular rooms are supported")
    room = Room(_positive(room_doc, "width", "room"), _positive(room_doc, "depth", "room"))

    assets: list[AssetSpec] = []
    seen: set[str] = set()
    for i, item in enumerate(doc.get("assets") or []):
        if not isinstance(item, Mapping) or "object_name" not in item:
            raise SceneError(f"assets[{i}] lacks object_name")
        name = str(item["object_name"])
        if name in seen:
            raise SceneError(f"duplicate object_name {name!r}")
        seen.add(name)
        size = item.get("size")
        if not isinstance(size, Mapping):
            raise SceneError(f"{name}: missing size")
        height = float(size.get("z", 0) or 0)
        assets.append(AssetSpec(name, _positive(size, "x", name), _positive(size, "y", name), height))

    poses = None
    if doc.get("layout") is not None:
        poses = {}
        for entry in doc["layout"]:
            name = str(entry["object_name"])
            if name not in seen:
                raise SceneError(f"layout references unknown asset {name!r}")
            if name in poses:
                raise SceneError(f"duplicate layout entry for {name!r}")
            pos = entry["position"]
            try:
                theta = int(entry.get("rotation", 0))
            except (TypeError, ValueError) as exc:
                raise SceneError(f"{name}: bad rotation") from exc
            poses[name] = Pose(float(pos["X"]), float(pos["Y"]), theta)

    constraints = None
    if doc.get("constraints") is not None:
        constraints = []
        for subject, cdoc in doc["constraints"].items():
            if subject not in seen:
                raise SceneError(f"constraints reference unknown asset {subject!r}")
            c = constraint_from_json(subject, cdoc)
            bad = c.targets() - seen
            if bad:
                raise SceneError(f"{subject}: constraint targets unknown assets {sorted(bad)}")
            constraints.append(c)

    extra = {k: v for k, v in doc.items() if k not in _KNOWN_KEYS}
    return Scene(
        room=room,
        assets=assets,
        prompt=str(doc.get("prompt", "")),
        room_type=str(doc.get("room_type", "")),
        poses=poses,
        constraints=constraints,
        extra=extra,
    )


def scene_to_dict(scene: Scene) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "room_type": scene.room_type,
        "prompt": scene.prompt,
        "room": {"width": cm_value(scene.room.width), "depth": cm_value(scene.room.depth)},
        "assets": [
            {
                "object_name": a.object_name,
                "size": {"x": cm_value(a.footprint_w), "y": cm_value(a.footprint_d), "z": cm_value(a.height)},
            }
            for a in scene.assets
        ],
        "layout": [pose_to_json(n, p) for n, p in (scene.poses or {}).items()],
    }
    if scene.constraints is not None:
        doc["constraints"] = {c.subject: constraint_to_json(c) for c in scene.constraints}
    for key in sorted(scene.extra):
        doc[key] = scene.extra[key]
    return doc


def dumps_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def load_scene(path: str | Path) -> Scene:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: malformed JSON ({exc})") from exc
    except (KeyError, TypeError) as exc:
        raise SceneError(f"{path}: malformed scene ({exc})") from exc
    try:
        return scene_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise SceneError(f"{path}: malformed scene ({exc!r})") from exc


def save_scene(
    layout: Layout,
    path: str | Path,
    *,
    assets: list[AssetSpec] | None = None,
    prompt: str = "",
    room_type: str = "",
    constraints: list[ConstraintSet] | None = None,
    extra: dict[str, Any] | None = None,
) -> None:
    """Write ``layout`` in the scene schema.

    ``assets`` defaults to the placed assets; pass the full asset list to keep
    objects that were never placed (or were deleted) in the document.
    """
    for name, (_, pose) in layout:
        if pose.theta not in VALID_THETAS:
            raise SceneError(f"{name}: theta {pose.theta} is not a quarter turn")
    scene = Scene(
        room=layout.room,
        assets=list(assets) if assets is not None else [p.asset for _, p in layout],
        prompt=prompt,
        room_type=room_type,
        poses=layout.poses(),
        constraints=constraints,
        extra=dict(extra or {}),
    )
    Path(path).write_text(dumps_scene(scene))
