"""Physical scores plus deterministic stand-ins for the semantic scores."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .geometry import footprint, intersection_area, outside_area
from .relations import RelationParams, around_groups, checks, eval_check, evaluable
from .scene import ConstraintSet, Layout

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SceneScore:
    collision_rate: float
    oob_rate: float
    pos_proxy: float
    rot_proxy: float
    deleted_count: int = 0
    pos_vacuous: bool = False
    rot_vacuous: bool = False

    def to_json(self) -> dict:
        return asdict(self)


def collision_rate(layout: Layout) -> float:
    rects = [footprint(a, p) for _, (a, p) in layout]
    n = len(rects)
    if n < 2:
        return 0.0
    hits = sum(
        1 for i in range(n) for j in range(i + 1, n) if intersection_area(rects[i], rects[j]) > 0
    )
    return 100.0 * hits / (n * (n - 1) / 2)


def oob_rate(layout: Layout) -> float:
    if len(layout) == 0:
        return 0.0
    fractions = []
    for _, (asset, pose) in layout:
        r = footprint(asset, pose)
        fractions.append(outside_area(r, layout.room) / r.area)
    return 100.0 * sum(fractions) / len(fractions)


def _proxy(layout: Layout, todo: list, params: RelationParams, groups: dict) -> tuple[float, bool]:
    if not todo:
        return 100.0, True
    ok = sum(1 for c in todo if eval_check(c, layout, params, groups))
    return 100.0 * ok / len(todo), False


def score_scene(
    layout: Layout,
    constraints: Sequence[ConstraintSet] = (),
    params: RelationParams = RelationParams(),
    deleted: Iterable[str] = (),
) -> SceneScore:
    """Collision/OOB rates and the share of relation and facing checks that hold.

    Checks naming an object absent from the layout are left out of the
    proxies; such objects are counted in ``deleted_count`` instead.
    """
    groups = around_groups(constraints)
    todo = [c for c in checks(constraints) if evaluable(c, layout)]
    pos, pos_vac = _proxy(layout, [c for c in todo if c[1] != "facing"], params, groups)
    rot, rot_vac = _proxy(layout, [c for c in todo if c[1] == "facing"], params, groups)
    return SceneScore(
        collision_rate=collision_rate(layout),
        oob_rate=oob_rate(layout),
        pos_proxy=pos,
        rot_proxy=rot,
        deleted_count=len(list(deleted)),
        pos_vacuous=pos_vac,
        rot_vacuous=rot_vac,
    )


def score_json(score: SceneScore) -> str:
    return json.dumps(score.to_json(), sort_keys=True)


CSV_FIELDS = ("scene", "collision_rate", "oob_rate", "pos_proxy", "rot_proxy", "deleted_count")


def scores_csv(rows: Iterable[tuple[str, SceneScore]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for name, s in rows:
        writer.writerow(
            [name, f"{s.collision_rate:.2f}", f"{s.oob_rate:.2f}", f"{s.pos_proxy:.2f}", f"{s.rot_proxy:.2f}", s.deleted_count]
        )
    return buf.getvalue()


JUDGE_PROMPT = (
    "You are judging a furniture layout for: {prompt}\n"
    "Objects (name, size, position, rotation):\n{objects}\n"
    "Score from 0 to 100 (1) Positional Coherency: objects sit in functionally sensible "
    "places, and (2) Rotational Coherency: objects are oriented sensibly. "
    'Reply with JSON only: {{"positional": <0-100>, "rotational": <0-100>}}'
)


def judge_scene(layout: Layout, prompt: str, backend) -> dict:
    """Optional model-judged coherency scores. Not deterministic; off by default."""
    from .agents.backends import Message
    from .agents.parsing import extract_json
    from .agents.prompts import objects_json

    text = JUDGE_PROMPT.format(prompt=prompt, objects=objects_json(layout))
    reply = backend.complete([Message("user", text)], expect="judge", context={"layout": layout})
    value = extract_json(reply)
    return {
        "positional": float(value["positional"]),
        "rotational": float(value["rotational"]),
        "deterministic": False,
    }
