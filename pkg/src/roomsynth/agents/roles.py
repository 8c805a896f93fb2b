"""Planner, designer, evaluator and semantic refinement as backend calls.

Each role renders its prompt template, asks the backend, and parses the
reply. A reply that fails to parse or validate gets exactly one repair
re-prompt carrying the diagnosis; a second failure raises AgentError.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from ..relations import (
    FailedConstraint,
    checks,
    evaluable,
    feedback_text,
    question_text,
)
from ..scene import (
    VALID_THETAS,
    AssetSpec,
    ConstraintSet,
    GroupPlan,
    Layout,
    Pose,
    RelationKind,
    SceneError,
)
from .backends import AgentBackend, BackendError, Message
from .parsing import ParseError, parse_model_output
from .prompts import REPAIR_TEMPLATE, constraint_line, fill, objects_json, size_entry

logger = logging.getLogger(__name__)

SCHEMA_FOR = {
    "plan": "plan",
    "design": "poses",
    "evaluate_semantic": "answers",
    "evaluate_physical": "boolean",
    "semantic_refine": "poses",
}


class AgentError(RuntimeError):
    """An agent call failed after its repair budget."""


class PlanCoverError(AgentError):
    """The planner's constraints or groups do not cover the asset list."""


@dataclass(frozen=True)
class EvalVerdict:
    s_sem: bool
    s_phy: bool
    failed_semantic: tuple[FailedConstraint, ...] = ()

    def __post_init__(self) -> None:
        if bool(self.failed_semantic) != self.s_sem:
            raise ValueError("s_sem must be true exactly when some semantic constraint failed")

    def to_json(self) -> dict:
        return {
            "s_sem": self.s_sem,
            "s_phy": self.s_phy,
            "failed_semantic": [f.to_json() for f in self.failed_semantic],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EvalVerdict":
        return cls(doc["s_sem"], doc["s_phy"], tuple(FailedConstraint.from_json(f) for f in doc["failed_semantic"]))


@dataclass
class CallLog:
    """Raw replies per call, in order; the orchestrator copies them into the trace."""

    entries: list[dict] = field(default_factory=list)


def _ask(
    backend: AgentBackend,
    messages: list[Message],
    expect: str,
    context: dict | None,
    check: Callable[[Any], Any] | None = None,
    log: CallLog | None = None,
    error: type[AgentError] = AgentError,
) -> Any:
    schema = SCHEMA_FOR[expect]
    diagnosis = ""
    for attempt in range(2):
        try:
            text = backend.complete(messages, expect=expect, context=context)
        except BackendError as exc:
            raise AgentError(f"{expect}: backend failure: {exc}") from exc
        if log is not None:
            log.entries.append({"expect": expect, "attempt": attempt, "reply": text})
        try:
            value = parse_model_output(text, schema)
            return check(value) if check is not None else value
        except ParseError as exc:
            diagnosis = exc.diagnosis
            logger.info("%s reply rejected (attempt %d): %s", expect, attempt + 1, diagnosis)
            messages = messages + [
                Message("assistant", text),
                Message("user", REPAIR_TEMPLATE.format(diagnosis=diagnosis)),
            ]
    raise error(f"{expect}: unusable reply after one repair round: {diagnosis}")


# -- planner -----------------------------------------------------------------


def _as_list(value: Any) -> list:
    if value is None or value == "" or value == []:
        return []
    if isinstance(value, (list, tuple)):
        return [v for v in value if v not in (None, "")]
    return [value]


def _truthy(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ("true", "yes", "1")
    return bool(value)


def constraint_from_plan(subject: str, entry: Mapping[str, Any], names: set[str]) -> ConstraintSet:
    """Build a ConstraintSet from one planner entry.

    ``relative_position`` holds relation words and ``relative_object`` the
    objects they refer to; one word with several objects applies to each.
    Relations to unknown objects or to the subject itself are dropped.
    """
    against_wall = _truthy(entry.get("against_wall", False))
    words = _as_list(entry.get("relative_position"))
    objects = [str(o) for o in _as_list(entry.get("relative_object"))]
    pairs: list[tuple[Any, str]] = []
    if words and all(isinstance(w, (list, tuple)) and len(w) == 2 for w in words):
        pairs = [(w[0], str(w[1])) for w in words]
    elif len(words) == 1:
        pairs = [(words[0], o) for o in objects]
    else:
        pairs = list(zip(words, objects))
    relations = []
    for word, target in pairs:
        try:
            kind = RelationKind.parse(word)
        except SceneError as exc:
            raise ParseError(f"{subject}: {exc}; use one of near, side of, in front of, aligned with, opposite, around.") from None
        if target not in names or target == subject:
            logger.warning("%s: dropping relation to unknown object %r", subject, target)
            continue
        if (kind, target) not in relations:
            relations.append((kind, target))
    facing = entry.get("rotation")
    if isinstance(facing, (list, tuple)):
        facing = facing[0] if facing else None
    if facing is not None:
        facing = str(facing)
        if facing not in names or facing == subject:
            logger.warning("%s: dropping facing target %r", subject, facing)
            facing = None
    if against_wall and facing is not None:
        facing = None
    return ConstraintSet(subject, against_wall, tuple(relations), facing)


def plan(
    prompt: str,
    assets: Sequence[AssetSpec],
    backend: AgentBackend,
    room_type: str = "",
    log: CallLog | None = None,
) -> tuple[GroupPlan, list[ConstraintSet]]:
    if not assets:
        raise ValueError("plan needs at least one asset")
    names = [a.object_name for a in assets]
    name_set = set(names)
    text = fill("planner", room_type=room_type or prompt, object_names=", ".join(names))
    if prompt and prompt != room_type:
        text += f"\nThe user's request: {prompt}\n"

    def check(value: dict) -> tuple[GroupPlan, list[ConstraintSet]]:
        raw = value["constraints"]
        missing = [n for n in names if n not in raw]
        if missing:
            raise ParseError(f"constraints are missing for {missing}.")
        constraints = [constraint_from_plan(n, raw[n] or {}, name_set) for n in names]
        groups = GroupPlan(tuple(tuple(str(n) for n in g) for g in value["groups"] if g))
        try:
            groups.validate(names)
        except SceneError as exc:
            raise ParseError(f"groups must partition the object list: {exc}.") from None
        return groups, constraints

    context = {"prompt": prompt, "room_type": room_type, "assets": list(assets)}
    return _ask(backend, [Message("user", text)], "plan", context, check, log, PlanCoverError)


# -- designer ----------------------------------------------------------------


def _pose_check(allowed: set[str], required: Sequence[str]) -> Callable[[list[dict]], dict[str, Pose]]:
    def check(items: list[dict]) -> dict[str, Pose]:
        out: dict[str, Pose] = {}
        for item in items:
            name = item["object_name"]
            if name not in allowed:
                raise ParseError(f"{name} is not one of the objects you may change: {sorted(allowed)}.")
            if item["rotation"] not in VALID_THETAS:
                raise ParseError(f"rotation for {name} must be 0, 90, 180 or 270.")
            out[name] = Pose(item["x"], item["y"], item["rotation"])
        missing = [n for n in required if n not in out]
        if missing:
            raise ParseError(f"the reply has no placement for {missing}.")
        return out

    return check


def design(
    prompt: str,
    group: Sequence[str],
    constraints: Mapping[str, ConstraintSet],
    current: Layout,
    render_png: bytes | None,
    backend: AgentBackend,
    assets: Mapping[str, AssetSpec],
    room_type: str = "",
    log: CallLog | None = None,
) -> dict[str, Pose]:
    if not group:
        raise ValueError("design needs a nonempty group")
    members = [{"object_name": n, "size": size_entry(assets[n])} for n in group]
    lines = [constraint_line(constraints.get(n, ConstraintSet(n))) for n in group]
    text = fill(
        "designer",
        room_type=room_type or prompt,
        room_size=current.room.size_text,
        arranged_objects=objects_json(current),
        current_group=json.dumps(members),
        constraint_strings="\n".join(lines),
    )
    context = {
        "layout": current,
        "group": list(group),
        "constraints": dict(constraints),
        "assets": dict(assets),
    }

    # objects already placed may be echoed back; they are ignored
    allowed = set(group) | set(current.names())

    def check(items: list[dict]) -> dict[str, Pose]:
        poses = _pose_check(allowed, group)(items)
        return {n: p for n, p in poses.items() if n in group}

    return _ask(backend, [Message("user", text, render_png)], "design", context, check, log)


# -- evaluator ---------------------------------------------------------------


def evaluate(
    layout: Layout,
    render_png: bytes | None,
    constraints: Sequence[ConstraintSet],
    backend: AgentBackend,
    all_constraints: Sequence[ConstraintSet] | None = None,
    room_type: str = "",
    log: CallLog | None = None,
) -> EvalVerdict:
    """Semantic yes/no questions for ``constraints`` plus the physical check.

    Checks whose subject or target is not placed are skipped.
    """
    all_constraints = list(all_constraints if all_constraints is not None else constraints)
    todo = [c for c in checks(constraints) if evaluable(c, layout)]
    failed: list[FailedConstraint] = []
    if todo:
        questions = "\n".join(f"{i + 1}. {question_text(*c)}" for i, c in enumerate(todo))
        text = fill(
            "evaluator_semantic",
            room_type=room_type or "room",
            room_size=layout.room.size_text,
            objects_in_image=objects_json(layout),
            questions=questions,
        )

        def check(answers: list[dict]) -> list[dict]:
            if len(answers) != len(todo):
                raise ParseError(f"expected {len(todo)} answers, one per question, got {len(answers)}.")
            return answers

        context = {"layout": layout, "checks": todo, "constraints": all_constraints}
        answers = _ask(backend, [Message("user", text, render_png)], "evaluate_semantic", context, check, log)
        for (subject, kind, target), ans in zip(todo, answers):
            if not ans["answer"]:
                failed.append(
                    FailedConstraint(subject, kind, (target,), feedback_text(subject, kind, target), ans["reason"])
                )
    text = fill("evaluator_physical", room_type=room_type or "room")
    context = {"layout": layout, "constraints": all_constraints}
    s_phy = _ask(backend, [Message("user", text, render_png)], "evaluate_physical", context, None, log)
    return EvalVerdict(bool(failed), bool(s_phy), tuple(failed))


# -- semantic refinement -----------------------------------------------------


def semantic_refine(
    layout: Layout,
    failed: Sequence[FailedConstraint],
    backend: AgentBackend,
    constraints: Sequence[ConstraintSet] = (),
    room_type: str = "",
    render_png: bytes | None = None,
    log: CallLog | None = None,
) -> Layout:
    """Apply the backend's minimal fix; only objects named in ``failed`` may move."""
    if not failed:
        raise ValueError("semantic_refine needs at least one failed constraint")
    implicated: set[str] = set()
    for f in failed:
        implicated.add(f.subject)
        implicated.update(f.targets)
    implicated &= set(layout.names())
    text = fill(
        "semantic_refine",
        room_type=room_type or "room",
        room_size=layout.room.size_text,
        objects_in_image=objects_json(layout),
        result="; ".join(f.feedback for f in failed),
    )
    context = {"layout": layout, "failed": list(failed), "constraints": list(constraints)}
    poses = _ask(
        backend, [Message("user", text, render_png)], "semantic_refine", context, _pose_check(implicated, ()), log
    )
    out = layout
    for name, pose in poses.items():
        out = out.with_pose(name, pose)
    return out
