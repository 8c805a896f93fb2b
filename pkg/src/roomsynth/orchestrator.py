"""The group-by-group synthesis loop and its replayable trace.

For each planned group: design, integrate provisionally, evaluate, run
semantic refinement while semantic checks fail and rounds remain, run the
grid repair when a physical problem is reported (or the deterministic
validity check disagrees with the evaluator), then commit.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .agents import (
    AgentBackend,
    CallLog,
    EvalVerdict,
    MockBackend,
    RemoteBackend,
    design,
    evaluate,
    plan,
    semantic_refine,
)
from .config import PipelineConfig
from .grid_refine import RefineReport, build_grid, invalid_objects, refine, wall_flags
from .metrics import SceneScore, score_scene
from .relations import checks, evaluable
from .render import encode_image, pixel_digest, render_topdown
from .scene import (
    AssetSpec,
    ConstraintSet,
    Layout,
    Placement,
    Pose,
    Room,
    SceneError,
    constraint_from_json,
    constraint_to_json,
    cm_value,
    integrate_group,
)

logger = logging.getLogger(__name__)


class TraceError(ValueError):
    """A trace is malformed, truncated, or does not replay to its recorded result."""


def _pose(p: Pose) -> list:
    return [cm_value(p.x), cm_value(p.y), p.theta]


def _unpose(v: Sequence) -> Pose:
    return Pose(float(v[0]), float(v[1]), int(v[2]))


def snapshot(layout: Layout) -> dict[str, list]:
    return {name: _pose(p) for name, p in layout.poses().items()}


@dataclass
class Trace:
    events: list[dict] = field(default_factory=list)
    sink: Path | None = None

    def add(self, event: str, **payload) -> dict:
        entry = {"event": event, **payload}
        self.events.append(entry)
        if self.sink is not None:
            with self.sink.open("a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        return entry

    def to_ndjson(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    @classmethod
    def from_ndjson(cls, text: str) -> "Trace":
        events = []
        for i, line in enumerate(text.splitlines()):
            if not line.strip():
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise TraceError(f"line {i + 1} is not JSON: {exc}") from exc
        return cls(events)

    def of(self, event: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event]


def make_backend(config: PipelineConfig) -> AgentBackend:
    if config.backend == "mock":
        return MockBackend(config.seed, config.mock_noise, config.grid_spacing, config.relation)
    r = config.remote
    return RemoteBackend(
        r.endpoint,
        r.model,
        api_key_env=r.api_key_env,
        temperature=r.temperature,
        timeout=r.timeout,
        max_retries=r.max_retries,
        backoff=r.backoff,
        max_in_flight=r.max_in_flight,
    )


RenderSink = Callable[[str, object], None]


def synthesize(
    prompt: str,
    assets: Sequence[AssetSpec],
    room: Room,
    config: PipelineConfig = PipelineConfig(),
    backend: AgentBackend | None = None,
    room_type: str = "",
    render_sink: RenderSink | None = None,
    trace: Trace | None = None,
) -> tuple[Layout, Trace, SceneScore]:
    """Run the whole pipeline for one scene.

    ``render_sink(tag, image)`` receives the committed render of every
    group (tag ``group{k}``) and of the final layout (tag ``final``).
    On a backend failure the exception propagates and ``trace`` keeps
    everything recorded up to that point.
    """
    if not assets:
        raise ValueError("synthesize needs at least one asset")
    if backend is None:
        backend = make_backend(config)
    trace = trace if trace is not None else Trace()
    by_name = {a.object_name: a for a in assets}
    if len(by_name) != len(assets):
        raise SceneError("duplicate object_name in assets")
    wants_images = not isinstance(backend, MockBackend)
    grid = build_grid(room, config.grid_spacing)
    calls = CallLog()

    def flush_calls(**where) -> None:
        for entry in calls.entries:
            trace.add("call", **where, **entry)
        calls.entries.clear()

    def image(layout: Layout) -> bytes | None:
        if not wants_images:
            return None
        return encode_image(render_topdown(layout, config.render))

    trace.add(
        "start",
        prompt=prompt,
        room_type=room_type,
        room={"width": cm_value(room.width), "depth": cm_value(room.depth)},
        assets=[
            {"object_name": a.object_name, "size": [cm_value(a.footprint_w), cm_value(a.footprint_d), cm_value(a.height)]}
            for a in assets
        ],
        backend=getattr(backend, "name", "unknown"),
        config=config.to_dict(),
    )
    groups, constraints = plan(prompt, list(assets), backend, room_type, calls)
    flush_calls(stage="plan")
    cons_by = {c.subject: c for c in constraints}
    trace.add(
        "plan",
        groups=[list(g) for g in groups.groups],
        constraints={c.subject: constraint_to_json(c) for c in constraints},
    )
    walls = wall_flags(constraints)
    layout = Layout(room)
    deleted: list[str] = []

    for k, group in enumerate(groups.groups, start=1):
        started = time.perf_counter()
        members = [n for n in group]
        png = image(layout)
        proposal = design(prompt, members, cons_by, layout, png, backend, by_name, room_type, calls)
        flush_calls(stage="design", group=k)
        trace.add("design", group=k, poses={n: _pose(proposal[n]) for n in members})
        layout = integrate_group(layout, {n: Placement(by_name[n], proposal[n]) for n in members})

        group_cons = [cons_by[n] for n in members if n in cons_by]
        checked = [c for c in checks(group_cons) if evaluable(c, layout)]
        verdict = evaluate(layout, image(layout), group_cons, backend, constraints, room_type, calls)
        flush_calls(stage="evaluate", group=k, round=0)
        trace.add("evaluate", group=k, round=0, checked=len(checked), verdict=verdict.to_json())

        rounds = 0
        while verdict.s_sem and rounds < config.max_semantic_rounds:
            rounds += 1
            before = layout
            layout = semantic_refine(layout, verdict.failed_semantic, backend, constraints, room_type, image(layout), calls)
            flush_calls(stage="semantic_refine", group=k, round=rounds)
            changes = {n: _pose(layout.pose(n)) for n in layout.names() if layout.pose(n) != before.pose(n)}
            trace.add("srt", group=k, round=rounds, changes=changes)
            verdict = evaluate(layout, image(layout), group_cons, backend, constraints, room_type, calls)
            flush_calls(stage="evaluate", group=k, round=rounds)
            trace.add("evaluate", group=k, round=rounds, checked=len(checked), verdict=verdict.to_json())

        if verdict.s_sem:
            trace.add("flagged", group=k, failed=[f.to_json() for f in verdict.failed_semantic])
            logger.info("group %d: %d semantic checks still failing", k, len(verdict.failed_semantic))

        invalid = invalid_objects(layout, walls)
        if verdict.s_phy or invalid:
            forced = not verdict.s_phy
            layout, report = refine(layout, constraints, grid)
            for name in report.deleted:
                logger.warning("group %d: %s had no valid grid placement and was removed", k, name)
            deleted.extend(report.deleted)
            trace.add("refine", group=k, forced=forced, report=_report_json(report))

        extra = {"elapsed_s": round(time.perf_counter() - started, 4)} if config.trace_timing else {}
        if render_sink is not None:
            render_sink(f"group{k}", render_topdown(layout, config.render))
        trace.add("commit", group=k, layout=snapshot(layout), **extra)

    score = score_scene(layout, constraints, config.relation, deleted)
    if render_sink is not None:
        final_img = render_topdown(layout, config.render)
        render_sink("final", final_img)
    trace.add("final", layout=snapshot(layout), deleted=deleted, score=score.to_json())
    return layout, trace, score


def _report_json(report: RefineReport) -> dict:
    doc = report.to_json()
    for m in doc["moved"]:
        m["old"] = [cm_value(v) for v in m["old"][:2]] + [m["old"][2]]
        m["new"] = [cm_value(v) for v in m["new"][:2]] + [m["new"][2]]
    return doc


def replay(trace: Trace | Iterable[dict]) -> Layout:
    """Rebuild the final layout from a trace's recorded events.

    Every commit snapshot and the final snapshot are checked against the
    reconstruction; any disagreement or missing event raises TraceError.
    """
    events = trace.events if isinstance(trace, Trace) else list(trace)
    if not events or events[0].get("event") != "start":
        raise TraceError("trace is missing its 'start' event")
    start = events[0]
    room = Room(float(start["room"]["width"]), float(start["room"]["depth"]))
    assets = {
        a["object_name"]: AssetSpec(a["object_name"], float(a["size"][0]), float(a["size"][1]), float(a["size"][2]))
        for a in start["assets"]
    }
    plans = [e for e in events if e["event"] == "plan"]
    if not plans:
        raise TraceError("trace is missing its 'plan' event")
    groups = plans[0]["groups"]
    # constraints are parsed to validate the plan record
    for subject, doc in plans[0]["constraints"].items():
        constraint_from_json(subject, doc)

    layout = Layout(room)
    by_group: dict[int, list[dict]] = {}
    final = None
    for e in events:
        if "group" in e and e["event"] != "call":
            by_group.setdefault(int(e["group"]), []).append(e)
        if e["event"] == "final":
            final = e

    for k in range(1, len(groups) + 1):
        group_events = by_group.get(k)
        if not group_events:
            raise TraceError(f"trace is missing the 'design' event for group {k}")
        committed = False
        for e in group_events:
            kind = e["event"]
            if kind == "design":
                layout = integrate_group(
                    layout, {n: Placement(assets[n], _unpose(p)) for n, p in e["poses"].items()}
                )
            elif kind == "srt":
                for n, p in e["changes"].items():
                    layout = layout.with_pose(n, _unpose(p))
            elif kind == "refine":
                report = e["report"]
                for m in report["moved"]:
                    name = m["object_name"]
                    if name not in layout or _pose(layout.pose(name)) != list(m["old"]):
                        raise TraceError(f"group {k}: refine move of {name} does not match the replayed pose")
                    layout = layout.with_pose(name, _unpose(m["new"]))
                for name in report["deleted"]:
                    layout = layout.without(name)
            elif kind == "commit":
                if snapshot(layout) != e["layout"]:
                    raise TraceError(f"replay diverged from the commit of group {k}")
                committed = True
        if not committed:
            raise TraceError(f"trace is missing the 'commit' event for group {k}")

    if final is None:
        raise TraceError("trace is truncated: missing the 'final' event")
    if snapshot(layout) != final["layout"]:
        raise TraceError("replayed layout differs from the recorded final layout")
    return layout


def verdict_from(entry: dict) -> EvalVerdict:
    return EvalVerdict.from_json(entry["verdict"])


def constraints_from_trace(trace: Trace) -> list[ConstraintSet]:
    plans = trace.of("plan")
    if not plans:
        raise TraceError("trace is missing its 'plan' event")
    return [constraint_from_json(s, d) for s, d in plans[0]["constraints"].items()]
