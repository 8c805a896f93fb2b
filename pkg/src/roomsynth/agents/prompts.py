"""Prompt templates shipped with the package and their placeholder filling."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from ..scene import AssetSpec, ConstraintSet, Layout, Placement, cm_value

TEMPLATES = ("planner", "designer", "evaluator_semantic", "evaluator_physical", "semantic_refine")

REPAIR_TEMPLATE = (
    "Your previous reply could not be used: {diagnosis} "
    "Reply again with only the corrected output in the requested format."
)


@lru_cache(maxsize=None)
def template(name: str) -> str:
    if name not in TEMPLATES:
        raise KeyError(name)
    return resources.files(__package__).joinpath("templates", f"{name}.txt").read_text()


def fill(name: str, **values: str) -> str:
    # plain substitution: the templates contain literal JSON braces
    text = template(name)
    for key, value in values.items():
        text = text.replace("{" + key + "}", value)
    return text


def object_entry(placement: Placement) -> dict:
    asset, pose = placement
    return {
        "object_name": asset.object_name,
        "size": size_entry(asset),
        "position": {"X": cm_value(pose.x), "Y": cm_value(pose.y)},
        "rotation": pose.theta,
    }


def size_entry(asset: AssetSpec) -> dict:
    return {"x": cm_value(asset.footprint_w), "y": cm_value(asset.footprint_d), "z": cm_value(asset.height)}


def objects_json(layout: Layout) -> str:
    return json.dumps([object_entry(p) for _, p in layout], indent=2)


def constraint_line(c: ConstraintSet) -> str:
    parts = []
    if c.against_wall:
        parts.append("against the wall, facing the center of the room")
    for kind, target in c.relations:
        parts.append(f"{kind.phrase} {target}")
    if c.facing is not None:
        parts.append(f"facing {c.facing}")
    if not parts:
        parts.append("no constraints")
    return f"- {c.subject}: " + "; ".join(parts)
