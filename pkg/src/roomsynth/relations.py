"""Geometric truth values for the six relation kinds and the facing constraint.

Definitions (all thresholds come from :class:`RelationParams`):

near
    edge-to-edge gap between footprints at most ``near_gap_max``.
side_of
    the target center is off the subject's forward axis (left or right
    half-plane of the subject's frame) and ``near`` holds.
in_front_of
    the target center is past the subject's front face by at most
    ``front_depth_max`` and within half the subject width plus
    ``align_tol`` laterally.
aligned_with
    parallel or antiparallel facing and centers level on x or y within
    ``align_tol``.
opposite
    antiparallel facing, each center in the other's frontal half-plane.
around
    ``near`` to the target and, when several subjects are around the same
    target, those subjects occupy at least two distinct regions of the
    target frame (regions are the sign pairs of lateral and forward offset).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import FACING, edge_distance, footprint, local_offset
from .scene import ConstraintSet, Layout, RelationKind


@dataclass(frozen=True)
class RelationParams:
    near_gap_max: float = 60.0
    align_tol: float = 10.0
    facing_cone_deg: float = 45.0
    front_depth_max: float = 150.0

    def __post_init__(self) -> None:
        for name in ("near_gap_max", "align_tol", "facing_cone_deg", "front_depth_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class FailedConstraint:
    subject: str
    kind: str  # a RelationKind value or "facing"
    targets: tuple[str, ...]
    feedback: str
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "kind": self.kind,
            "targets": list(self.targets),
            "feedback": self.feedback,
            "reason": self.reason,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FailedConstraint":
        return cls(doc["subject"], doc["kind"], tuple(doc["targets"]), doc["feedback"], doc.get("reason", ""))


class UnplacedObjectError(KeyError):
    pass


def _require(layout: Layout, *names: str) -> None:
    for name in names:
        if name not in layout:
            raise UnplacedObjectError(name)


def _near(layout: Layout, a: str, b: str, params: RelationParams) -> bool:
    ra = footprint(*layout.placed[a])
    rb = footprint(*layout.placed[b])
    return edge_distance(ra, rb) <= params.near_gap_max


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _region(layout: Layout, target: str, member: str) -> tuple[int, int]:
    # sign classes, so a member on an axis of the target counts as its own
    # region and the result does not depend on the handedness of the frame
    lat, fwd = local_offset(layout.pose(target), (layout.pose(member).x, layout.pose(member).y))
    return (_sign(lat), _sign(fwd))


def eval_relation(
    kind: RelationKind,
    subject: str,
    target: str,
    layout: Layout,
    params: RelationParams = RelationParams(),
    group: Sequence[str] = (),
) -> bool:
    """Truth of ``subject <kind> target``.

    ``group`` only matters for ``around``: the other subjects arranged around
    the same target. Unplaced members of the group are ignored.
    """
    _require(layout, subject, target)
    s_asset, s_pose = layout.placed[subject]
    t_pose = layout.pose(target)
    t_center = (t_pose.x, t_pose.y)

    if kind is RelationKind.NEAR:
        return _near(layout, subject, target, params)

    if kind is RelationKind.SIDE_OF:
        lateral, _ = local_offset(s_pose, t_center)
        return lateral != 0 and _near(layout, subject, target, params)

    if kind is RelationKind.IN_FRONT_OF:
        lateral, forward = local_offset(s_pose, t_center)
        half_depth = s_asset.footprint_d / 2
        past_front = forward - half_depth
        return (
            0 <= past_front <= params.front_depth_max
            and abs(lateral) <= s_asset.footprint_w / 2 + params.align_tol
        )

    if kind is RelationKind.ALIGNED_WITH:
        if (s_pose.theta - t_pose.theta) % 180 != 0:
            return False
        return abs(s_pose.x - t_pose.x) <= params.align_tol or abs(s_pose.y - t_pose.y) <= params.align_tol

    if kind is RelationKind.OPPOSITE:
        if (s_pose.theta - t_pose.theta) % 360 != 180:
            return False
        _, fwd_st = local_offset(s_pose, t_center)
        _, fwd_ts = local_offset(t_pose, (s_pose.x, s_pose.y))
        return fwd_st > 0 and fwd_ts > 0

    if kind is RelationKind.AROUND:
        if not _near(layout, subject, target, params):
            return False
        members = sorted({m for m in group if m in layout and m != target} | {subject})
        if len(members) < 2:
            return True
        return len({_region(layout, target, m) for m in members}) >= 2

    raise ValueError(f"unhandled relation {kind}")


def facing_angle(layout: Layout, subject: str, target: str) -> float:
    """Unsigned angle in degrees between the subject's facing and the direction to the target."""
    s_pose = layout.pose(subject)
    t_pose = layout.pose(target)
    fx, fy = FACING[s_pose.theta]
    dx, dy = t_pose.x - s_pose.x, t_pose.y - s_pose.y
    if dx == 0 and dy == 0:
        return 0.0
    return abs(math.degrees(math.atan2(fx * dy - fy * dx, fx * dx + fy * dy)))


def eval_facing(subject: str, target: str, layout: Layout, params: RelationParams = RelationParams()) -> bool:
    _require(layout, subject, target)
    return facing_angle(layout, subject, target) <= params.facing_cone_deg


def around_groups(constraints: Iterable[ConstraintSet]) -> dict[str, list[str]]:
    """target -> subjects constrained to be around it."""
    groups: dict[str, list[str]] = {}
    for c in constraints:
        for kind, target in c.relations:
            if kind is RelationKind.AROUND:
                groups.setdefault(target, []).append(c.subject)
    return groups


def feedback_text(subject: str, kind: str, target: str) -> str:
    phrase = "facing" if kind == "facing" else RelationKind(kind).phrase
    return f"The {subject} is not {phrase} the {target}"


def question_text(subject: str, kind: str, target: str) -> str:
    if kind == "facing":
        return f"Is {subject} facing {target}?"
    return f"Is {subject} placed {RelationKind(kind).phrase} {target}?"


def checks(constraints: Iterable[ConstraintSet]) -> list[tuple[str, str, str]]:
    """Flatten constraints into ``(subject, kind, target)`` checks in a stable order."""
    out = []
    for c in constraints:
        for kind, target in c.relations:
            out.append((c.subject, kind.value, target))
        if c.facing is not None:
            out.append((c.subject, "facing", c.facing))
    return out


def eval_check(
    check: tuple[str, str, str],
    layout: Layout,
    params: RelationParams,
    groups: dict[str, list[str]],
) -> bool:
    subject, kind, target = check
    if kind == "facing":
        return eval_facing(subject, target, layout, params)
    return eval_relation(RelationKind(kind), subject, target, layout, params, groups.get(target, ()))


def unsatisfied_constraints(
    layout: Layout,
    constraints: Sequence[ConstraintSet],
    params: RelationParams = RelationParams(),
    all_constraints: Sequence[ConstraintSet] | None = None,
) -> list[FailedConstraint]:
    """Every violated relation or facing check among ``constraints``.

    ``all_constraints`` supplies the scene-wide ``around`` grouping when only
    a subset (say, one placement group) is being checked.
    """
    groups = around_groups(all_constraints if all_constraints is not None else constraints)
    failed = []
    for check in checks(constraints):
        if not eval_check(check, layout, params, groups):
            subject, kind, target = check
            failed.append(FailedConstraint(subject, kind, (target,), feedback_text(subject, kind, target)))
    return failed


def evaluable(check: tuple[str, str, str], layout: Layout) -> bool:
    return check[0] in layout and check[2] in layout


def snap_facing(layout: Layout, subject: str, target: str) -> int:
    """Quarter turn that points ``subject`` most directly at ``target``.

    Ties prefer the lower angle, so the result is deterministic.
    """
    s_pose = layout.pose(subject)
    t_pose = layout.pose(target)
    return snap_toward((s_pose.x, s_pose.y), (t_pose.x, t_pose.y))


def snap_toward(origin: tuple[float, float], point: tuple[float, float]) -> int:
    dx, dy = point[0] - origin[0], point[1] - origin[1]
    best_theta, best_dot = 0, -math.inf
    for theta in (0, 90, 180, 270):
        fx, fy = FACING[theta]
        dot = fx * dx + fy * dy
        if dot > best_dot:
            best_theta, best_dot = theta, dot
    return best_theta


__all__ = [
    "FailedConstraint",
    "RelationParams",
    "UnplacedObjectError",
    "eval_facing",
    "eval_relation",
    "snap_facing",
    "unsatisfied_constraints",
]
