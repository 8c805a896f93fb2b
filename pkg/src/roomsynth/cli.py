"""Command line entry point.

Exit codes: 0 success, 1 pipeline or runtime failure, 2 usage or
configuration failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .agents import AgentError, BackendError, MissingAPIKeyError
from .config import PipelineConfig
from .generator import MAX_SIDE, MIN_SIDE, write_corpus
from .grid_refine import build_grid, refine
from .metrics import score_json, score_scene, scores_csv
from .orchestrator import Trace, constraints_from_trace, make_backend, synthesize
from .render import encode_image, render_topdown
from .scene import Scene, SceneError, dumps_scene, load_scene

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

class UsageError(Exception):
    pass


def _config(args: argparse.Namespace) -> PipelineConfig:
    try:
        cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot load config {args.config}: {exc}") from exc
    overrides = {"backend": getattr(args, "backend", None), "seed": getattr(args, "seed", None)}
    if getattr(args, "spacing", None) is not None:
        overrides["grid_spacing"] = args.spacing
    try:
        cfg = cfg.with_overrides(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if getattr(args, "endpoint", None) or getattr(args, "model", None):
        remote = replace(
            cfg.remote,
            endpoint=args.endpoint or cfg.remote.endpoint,
            model=args.model or cfg.remote.model,
        )
        cfg = replace(cfg, remote=remote)
    return cfg


def _load(path: str) -> Scene:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"scene file not found: {path}")
    try:
        return load_scene(p)
    except SceneError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _out_dir(args: argparse.Namespace, scene_path: str) -> Path:
    out = Path(args.out) if args.out else Path(scene_path).parent
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(args: argparse.Namespace, text: str) -> None:
    print(text, flush=True)


# -- synth -------------------------------------------------------------------


def _synth_one(path: str, args: argparse.Namespace, cfg: PipelineConfig, shared_backend) -> tuple[int, str]:
    scene = _load(path)
    out = _out_dir(args, path)
    stem = Path(path).stem
    trace_path = out / f"{stem}-trace.ndjson"
    trace_path.write_text("")
    trace = Trace(sink=trace_path)
    backend = shared_backend if shared_backend is not None else make_backend(cfg)

    def sink(tag: str, img) -> None:
        encode_image(img, out / f"{stem}-{tag}.png")

    try:
        layout, trace, score = synthesize(
            scene.prompt, scene.assets, scene.room, cfg, backend, scene.room_type, sink, trace
        )
    except (AgentError, BackendError) as exc:
        print(f"{path}: pipeline failed: {exc}", file=sys.stderr)
        return EXIT_FAIL, ""
    result = Scene(
        room=scene.room,
        assets=scene.assets,
        prompt=scene.prompt,
        room_type=scene.room_type,
        poses=layout.poses(),
        constraints=constraints_from_trace(trace),
        extra=scene.extra,
    )
    (out / f"{stem}-layout.json").write_text(dumps_scene(result))
    report = score_json(score)
    (out / f"{stem}-score.json").write_text(report + "\n")
    ok = score.collision_rate == 0 and score.oob_rate == 0
    return (EXIT_OK if ok else EXIT_FAIL), report


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _config(args)
    for path in args.scenes:
        _load(path)
    shared = None
    if cfg.backend == "remote":
        try:
            shared = make_backend(cfg)
        except MissingAPIKeyError as exc:
            raise UsageError(f"remote backend needs {exc.var} to be set") from exc
    if args.jobs > 1 and len(args.scenes) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(lambda p: _synth_one(p, args, cfg, shared), args.scenes))
    else:
        results = [_synth_one(p, args, cfg, shared) for p in args.scenes]
    for path, (code, report) in zip(args.scenes, results):
        if report:
            _emit(args, report if args.quiet else f"{path}: {report}")
    return max(code for code, _ in results)


# -- refine ------------------------------------------------------------------


def cmd_refine(args: argparse.Namespace) -> int:
    cfg = _config(args)
    scene = _load(args.scene)
    if not scene.poses:
        raise UsageError(f"{args.scene} has no placed objects in its layout block")
    out = _out_dir(args, args.scene)
    stem = Path(args.scene).stem
    layout = scene.layout()
    try:
        grid = build_grid(scene.room, cfg.grid_spacing)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    fixed, report = refine(layout, scene.constraints, grid)
    result = replace(scene, poses=fixed.poses())
    (out / f"{stem}-refined.json").write_text(dumps_scene(result))
    (out / f"{stem}-refine-report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n")
    score = score_scene(fixed, scene.constraints or (), cfg.relation, report.deleted)
    text = score_json(score)
    _emit(args, text if args.quiet else f"{args.scene}: {text}")
    return EXIT_OK if score.collision_rate == 0 and score.oob_rate == 0 else EXIT_FAIL


# -- eval --------------------------------------------------------------------


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config(args)
    rows = []
    for path in args.scenes:
        scene = _load(path)
        score = score_scene(scene.layout(), scene.constraints or (), cfg.relation)
        rows.append((path, score))
        if not args.csv:
            text = score_json(score)
            _emit(args, text if args.quiet else f"{path}: {text}")
    if args.csv:
        csv_text = scores_csv(rows)
        if args.csv == "-":
            sys.stdout.write(csv_text)
        else:
            Path(args.csv).write_text(csv_text)
    return EXIT_OK


# -- render ------------------------------------------------------------------


def cmd_render(args: argparse.Namespace) -> int:
    cfg = _config(args)
    scene = _load(args.scene)
    try:
        options = replace(
            cfg.render,
            long_side=args.long_side or cfg.render.long_side,
            show_grid=args.grid or cfg.render.show_grid,
            show_labels=not args.no_labels and cfg.render.show_labels,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    target = Path(args.out) if args.out else Path(args.scene).with_suffix(".png")
    if target.suffix.lower() != ".png":
        target.mkdir(parents=True, exist_ok=True)
        target = target / (Path(args.scene).stem + ".png")
    encode_image(render_topdown(scene.layout(), options), target)
    if not args.quiet:
        print(target)
    return EXIT_OK


# -- gen ---------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if not 0 < args.min_side <= args.max_side:
        raise UsageError("--min-side must be positive and not above --max-side")
    paths = write_corpus(args.out or ".", args.count, args.seed, args.min_side, args.max_side)
    if not args.quiet:
        for p in paths:
            print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="pipeline config JSON")
    shared.add_argument("--backend", choices=("mock", "remote"))
    shared.add_argument("--seed", type=int)
    shared.add_argument("--out", help="output directory (or .png path for render)")
    shared.add_argument("--quiet", action="store_true", help="print only score JSON on stdout")
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="roomsynth", description="Furniture layout synthesis and repair.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[shared], help="run the full pipeline on scene files")
    p.add_argument("scenes", nargs="+")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--spacing", type=float, help="grid spacing in cm")
    p.add_argument("--endpoint", help="chat-completions endpoint for --backend remote")
    p.add_argument("--model", help="model name for --backend remote")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("refine", parents=[shared], help="grid-repair the layout stored in a scene file")
    p.add_argument("scene")
    p.add_argument("--spacing", type=float, help="grid spacing in cm")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("eval", parents=[shared], help="score the layouts stored in scene files")
    p.add_argument("scenes", nargs="+")
    p.add_argument("--csv", help="write a CSV table to this path ('-' for stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", parents=[shared], help="draw a top-down PNG of a scene's layout")
    p.add_argument("scene")
    p.add_argument("--long-side", type=int)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--no-labels", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen", parents=[shared], help="write a procedural scene corpus")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--min-side", type=int, default=MIN_SIDE)
    p.add_argument("--max-side", type=int, default=MAX_SIDE)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "gen" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
