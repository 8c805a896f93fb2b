"""Deterministic offline backend.

The mock reads the structured ``context`` each role passes next to its
prompt and writes the reply a well-behaved model would, as text, so the
parsing path is exercised end to end. Its designer is a greedy heuristic
with optional seeded noise that imitates imperfect model placements; its
evaluator is exact.
"""

from __future__ import annotations

import json
import random
from typing import Sequence

from ..catalog import lookup
from ..geometry import pull_to_wall, wall2rotation
from ..grid_refine import (
    DEFAULT_SPACING,
    GridSet,
    build_grid,
    invalid_objects,
    is_valid_placement,
    rank_points,
    wall_flags,
)
from ..relations import (
    FailedConstraint,
    RelationParams,
    around_groups,
    eval_check,
    eval_relation,
    snap_facing,
    snap_toward,
)
from ..scene import (
    WALL_ORDER,
    AssetSpec,
    ConstraintSet,
    Layout,
    Placement,
    Pose,
    RelationKind,
    cm_value,
)
from .backends import BackendError, Message

# grid points farther than this from a relation target are never probed
SEARCH_RADIUS = 450.0


def _with(layout: Layout, asset: AssetSpec, pose: Pose) -> Layout:
    placed = dict(layout.placed)
    placed[asset.object_name] = Placement(asset, pose)
    return Layout(layout.room, placed)


def _entry(asset: AssetSpec, pose: Pose) -> dict:
    return {
        "object_name": asset.object_name,
        "size": {"x": cm_value(asset.footprint_w), "y": cm_value(asset.footprint_d), "z": cm_value(asset.height)},
        "position": {"X": cm_value(pose.x), "Y": cm_value(pose.y)},
        "rotation": pose.theta,
    }


class MockBackend:
    name = "mock"
    endpoint = "offline"

    def __init__(
        self,
        seed: int = 0,
        noise: float = 0.25,
        spacing: float = DEFAULT_SPACING,
        params: RelationParams = RelationParams(),
    ):
        self.seed = seed
        self.noise = noise
        self.spacing = spacing
        self.params = params
        self.rng = random.Random(seed)
        self._grids: dict[tuple[float, float], GridSet] = {}

    def grid(self, layout: Layout) -> GridSet:
        key = (layout.room.width, layout.room.depth)
        if key not in self._grids:
            self._grids[key] = build_grid(layout.room, self.spacing)
        return self._grids[key]

    def complete(self, messages: list[Message], expect: str, context: dict | None = None) -> str:
        if context is None:
            raise BackendError("the mock backend needs the structured call context")
        handler = getattr(self, "_" + expect, None)
        if handler is None:
            raise BackendError(f"mock backend cannot answer {expect!r}")
        return handler(context)

    # -- planner -------------------------------------------------------------

    def _plan(self, ctx: dict) -> str:
        assets: list[AssetSpec] = ctx["assets"]
        by_cat: dict[str, list[str]] = {}
        for a in assets:
            by_cat.setdefault(a.category, []).append(a.object_name)

        def pick(subject: AssetSpec, category: str) -> str | None:
            pool = [n for n in by_cat.get(category, []) if n != subject.object_name]
            if not pool:
                return None
            if category == subject.category:
                # chain same-category items to their predecessor
                idx = by_cat[category].index(subject.object_name)
                return by_cat[category][idx - 1] if idx > 0 else None
            idx = by_cat[subject.category].index(subject.object_name)
            return pool[idx % len(pool)]

        constraints: dict[str, dict] = {}
        edges: dict[str, set[str]] = {a.object_name: set() for a in assets}
        for a in assets:
            info = lookup(a.category)
            entry = {"against_wall": False, "relative_position": None, "relative_object": None, "rotation": None}
            if info is not None:
                entry["against_wall"] = info.against_wall
                words, objs = [], []
                for kind, cat in info.relations:
                    target = pick(a, cat)
                    if target is not None:
                        words.append(kind.phrase)
                        objs.append(target)
                if words:
                    entry["relative_position"] = [[w, o] for w, o in zip(words, objs)]
                    entry["relative_object"] = objs
                if info.facing and not info.against_wall:
                    entry["rotation"] = pick(a, info.facing)
            constraints[a.object_name] = entry
            for t in (entry["relative_object"] or []) + ([entry["rotation"]] if entry["rotation"] else []):
                edges[a.object_name].add(t)
                edges[t].add(a.object_name)

        order = {a.object_name: i for i, a in enumerate(assets)}
        area = {a.object_name: a.area for a in assets}
        seen: set[str] = set()
        groups = []
        for a in assets:
            if a.object_name in seen:
                continue
            stack, comp = [a.object_name], []
            seen.add(a.object_name)
            while stack:
                n = stack.pop()
                comp.append(n)
                for m in sorted(edges[n]):
                    if m not in seen:
                        seen.add(m)
                        stack.append(m)
            groups.append(comp)

        def depth(name: str, comp: set[str], trail: frozenset = frozenset()) -> int:
            entry = constraints[name]
            deps = [t for t in (entry["relative_object"] or []) + [entry["rotation"]] if t in comp and t not in trail]
            return 1 + max((depth(t, comp, trail | {name}) for t in deps), default=-1)

        ordered = []
        for comp in groups:
            members = set(comp)
            ordered.append(sorted(comp, key=lambda n: (depth(n, members), order[n])))
        ordered.sort(key=lambda g: (-max(area[n] for n in g), order[g[0]]))
        reply = {"constraints": constraints, "groups": {f"group{i + 1}": g for i, g in enumerate(ordered)}}
        return "```json\n" + json.dumps(reply, indent=2) + "\n```"

    # -- designer ------------------------------------------------------------

    def _theta_for(self, cons: ConstraintSet | None, layout: Layout, point: tuple[float, float]) -> int:
        if cons is None:
            return 0
        if cons.facing is not None and cons.facing in layout:
            t = layout.pose(cons.facing)
            return snap_toward(point, (t.x, t.y))
        for kind, target in cons.relations:
            if target not in layout:
                continue
            t = layout.pose(target)
            if kind in (RelationKind.IN_FRONT_OF, RelationKind.AROUND):
                return snap_toward(point, (t.x, t.y))
            if kind in (RelationKind.ALIGNED_WITH, RelationKind.SIDE_OF, RelationKind.NEAR):
                return t.theta
            if kind is RelationKind.OPPOSITE:
                return (t.theta + 180) % 360
        return 0

    def _satisfies(
        self, cons: ConstraintSet | None, layout: Layout, name: str, groups: dict, only: Sequence | None = None
    ) -> bool:
        if cons is None:
            return True
        rels = only if only is not None else cons.relations
        for kind, target in rels:
            if target in layout and not eval_relation(kind, name, target, layout, self.params, groups.get(target, ())):
                return False
        if only is None and cons.facing is not None and cons.facing in layout:
            if not eval_check((name, "facing", cons.facing), layout, self.params, groups):
                return False
        return True

    def _wall_candidates(self, asset: AssetSpec, layout: Layout) -> list[tuple[object, list[Pose]]]:
        grid = self.grid(layout)
        out = []
        for wall in WALL_ORDER:
            turned = Pose(0.0, 0.0, wall2rotation(wall))
            out.append((wall, [pull_to_wall(g, asset, turned) for g in grid.per_wall[wall]]))
        return out

    def _place_wall(self, asset: AssetSpec, cons: ConstraintSet | None, layout: Layout, groups: dict) -> Pose:
        name = asset.object_name
        room = layout.room
        walls = self._wall_candidates(asset, layout)
        anchors = [t for _, t in (cons.relations if cons else ()) if t in layout]
        if anchors:
            t = layout.pose(anchors[0])
            pool = [p for _, poses in walls for p in poses]
            pool.sort(key=lambda p: ((p.x - t.x) ** 2 + (p.y - t.y) ** 2, p.y, p.x))
            for p in pool:
                if is_valid_placement(asset, p, layout, room, True) and self._satisfies(
                    cons, _with(layout, asset, p), name, groups
                ):
                    return p
        # widest free run of valid wall slots
        best: tuple[int, int, Pose] | None = None
        for rank, (_, poses) in enumerate(walls):
            run: list[Pose] = []
            for p in poses + [None]:
                if p is not None and is_valid_placement(asset, p, layout, room, True):
                    run.append(p)
                    continue
                if run and (best is None or len(run) > best[0]):
                    best = (len(run), rank, run[len(run) // 2])
                run = []
        if best is not None:
            return best[2]
        return Pose(room.width / 2, room.depth / 2, 0)

    def _place_free(self, asset: AssetSpec, cons: ConstraintSet | None, layout: Layout, groups: dict) -> Pose:
        name = asset.object_name
        room = layout.room
        grid = self.grid(layout)
        anchors = []
        if cons is not None:
            anchors = [t for _, t in cons.relations if t in layout]
            if cons.facing is not None and cons.facing in layout:
                anchors.append(cons.facing)
        if anchors:
            t = layout.pose(anchors[0])
            for g in rank_points(grid.interior, (t.x, t.y)):
                if (g[0] - t.x) ** 2 + (g[1] - t.y) ** 2 > SEARCH_RADIUS**2:
                    break
                p = Pose(g[0], g[1], self._theta_for(cons, layout, g))
                if is_valid_placement(asset, p, layout, room) and self._satisfies(
                    cons, _with(layout, asset, p), name, groups
                ):
                    return p
        center = (room.width / 2, room.depth / 2)
        for g in rank_points(grid.interior, center):
            p = Pose(g[0], g[1], self._theta_for(cons, layout, g))
            if is_valid_placement(asset, p, layout, room):
                return p
        return Pose(center[0], center[1], 0)

    def _design(self, ctx: dict) -> str:
        layout: Layout = ctx["layout"]
        group: list[str] = ctx["group"]
        constraints: dict[str, ConstraintSet] = ctx["constraints"]
        assets: dict[str, AssetSpec] = ctx["assets"]
        groups = around_groups(constraints.values())
        pending = list(group)
        work = layout
        placed: list[str] = []
        while pending:
            # members whose targets are settled go first
            ready = [
                n
                for n in pending
                if all(t in work or t not in pending for t in (constraints.get(n) or ConstraintSet(n)).targets())
            ]
            name = (ready or pending)[0]
            pending.remove(name)
            asset, cons = assets[name], constraints.get(name)
            if cons is not None and cons.against_wall:
                pose = self._place_wall(asset, cons, work, groups)
            else:
                pose = self._place_free(asset, cons, work, groups)
            work = _with(work, asset, pose)
            placed.append(name)

        out = []
        room = layout.room
        for name in group:
            pose = work.pose(name)
            if self.noise and self.rng.random() < self.noise:
                if self.rng.random() < 0.5:
                    x = pose.x + self.rng.randint(-60, 60)
                    y = pose.y + self.rng.randint(-60, 60)
                    pose = Pose(min(max(x, 0.0), room.width), min(max(y, 0.0), room.depth), pose.theta)
                else:
                    pose = Pose(pose.x, pose.y, (pose.theta + self.rng.choice((90, 180, 270))) % 360)
            out.append(_entry(assets[name], pose))
        return json.dumps(out, indent=2)

    # -- evaluator -----------------------------------------------------------

    def _evaluate_semantic(self, ctx: dict) -> str:
        layout: Layout = ctx["layout"]
        groups = around_groups(ctx["constraints"])
        answers = []
        for subject, kind, target in ctx["checks"]:
            ok = eval_check((subject, kind, target), layout, self.params, groups)
            answers.append(
                {
                    "question": f"{subject} {kind} {target}",
                    "objects": [subject, target],
                    "reason": "geometric check passed" if ok else "geometric check failed",
                    "answer": "yes" if ok else "no",
                }
            )
        return "```json\n" + json.dumps(answers, indent=2) + "\n```"

    def _evaluate_physical(self, ctx: dict) -> str:
        bad = invalid_objects(ctx["layout"], wall_flags(ctx["constraints"]))
        return "True" if bad else "False"

    # -- semantic refinement -------------------------------------------------

    def _semantic_refine(self, ctx: dict) -> str:
        layout: Layout = ctx["layout"]
        failed: list[FailedConstraint] = ctx["failed"]
        cons_by = {c.subject: c for c in ctx["constraints"]}
        groups = around_groups(ctx["constraints"])
        work = layout
        changed: dict[str, None] = {}
        for f in failed:
            name, target = f.subject, f.targets[0]
            if name not in work or target not in work:
                continue
            asset, pose = work.placed[name]
            if f.kind == "facing":
                new = Pose(pose.x, pose.y, snap_facing(work, name, target))
            else:
                new = self.relation_fix(work, name, RelationKind(f.kind), target, cons_by.get(name), groups)
            if new is not None and new != pose:
                work = work.with_pose(name, new)
                changed[name] = None
        return json.dumps([_entry(work.asset(n), work.pose(n)) for n in changed], indent=2)

    def relation_fix(
        self,
        layout: Layout,
        name: str,
        kind: RelationKind,
        target: str,
        cons: ConstraintSet | None,
        groups: dict,
    ) -> Pose | None:
        """Nearest grid placement satisfying the relation, physically valid ones preferred."""
        asset, pose = layout.placed[name]
        room = layout.room
        against_wall = cons is not None and cons.against_wall
        if against_wall:
            pool = [p for _, poses in self._wall_candidates(asset, layout) for p in poses]
            pool.sort(key=lambda p: ((p.x - pose.x) ** 2 + (p.y - pose.y) ** 2, p.y, p.x))
        else:
            ranked = rank_points(self.grid(layout).interior, (pose.x, pose.y))
            pool = [Pose(g[0], g[1], self._facing_theta(cons, layout, g, pose.theta)) for g in ranked]
        fallback = None
        for p in pool:
            trial = layout.with_pose(name, p)
            if not eval_relation(kind, name, target, trial, self.params, groups.get(target, ())):
                continue
            if is_valid_placement(asset, p, layout, room, against_wall):
                return p
            if fallback is None:
                fallback = p
        return fallback

    def _facing_theta(
        self, cons: ConstraintSet | None, layout: Layout, point: tuple[float, float], theta: int
    ) -> int:
        if cons is not None and cons.facing is not None and cons.facing in layout:
            t = layout.pose(cons.facing)
            return snap_toward(point, (t.x, t.y))
        return theta


__all__ = ["MockBackend"]
