"""Regenerate the render golden fixtures.

Writes five scene files, a manifest of render options, and the PNG each
one renders to. Review the images by eye before committing new goldens.

    python scripts/make_goldens.py --out tests/fixtures/golden
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict
from pathlib import Path

from roomsynth.config import PipelineConfig
from roomsynth.generator import generate_corpus
from roomsynth.orchestrator import constraints_from_trace, synthesize
from roomsynth.render import RenderOptions, encode_image, render_topdown
from roomsynth.scene import AssetSpec, Layout, Placement, Pose, Room, Scene, dumps_scene, load_scene


def _options_json(opts: RenderOptions) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(opts).items()}


def options_from_json(doc: dict) -> RenderOptions:
    return RenderOptions(**{k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()})


def golden_scenes() -> list[tuple[str, Scene, RenderOptions]]:
    out = []
    out.append(("empty_room", Scene(Room(400, 300), [], "an empty room", "empty", poses={}), RenderOptions()))

    sofa = AssetSpec("sofa-0", 200, 90, 80)
    out.append(
        ("one_sofa", Scene(Room(500, 400), [sofa], "a sofa", "living room", poses={"sofa-0": Pose(250, 45, 0)}), RenderOptions())
    )

    assets = [AssetSpec("desk-0", 120, 60, 75), AssetSpec("chair-0", 50, 50, 90), AssetSpec("shelf-0", 80, 30, 180), AssetSpec("lamp-0", 30, 30, 150)]
    poses = {"desk-0": Pose(570, 200, 270), "chair-0": Pose(500, 200, 90), "shelf-0": Pose(15, 300, 90), "lamp-0": Pose(300, 385, 180)}
    out.append(
        ("rotations_grid", Scene(Room(600, 400), assets, "a study", "office", poses=poses), RenderOptions(long_side=512, show_grid=True))
    )

    corpus = generate_corpus(9, 7)
    for name, scene, opts in (
        ("bedroom_synth", corpus[1], RenderOptions()),
        ("gym_nolabels", corpus[6], RenderOptions(long_side=768, show_labels=False)),
    ):
        layout, trace, _ = synthesize(scene.prompt, scene.assets, scene.room, PipelineConfig(seed=7), room_type=scene.room_type)
        done = Scene(scene.room, scene.assets, scene.prompt, scene.room_type, layout.poses(), constraints_from_trace(trace))
        out.append((name, done, opts))
    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="tests/fixtures/golden")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, scene, opts in golden_scenes():
        (out / f"{name}.json").write_text(dumps_scene(scene))
        # render from the file as the test will, so the round trip is part of the golden
        layout = load_scene(out / f"{name}.json").layout()
        encode_image(render_topdown(layout, opts), out / f"{name}.png")
        manifest.append({"name": name, "options": _options_json(opts)})
        print(out / f"{name}.png")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
