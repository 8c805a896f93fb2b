"""Procedural scene corpus: seeded rooms and furniture lists from the catalog."""

from __future__ import annotations

import random
from pathlib import Path

from .catalog import FURNITURE, ROOM_TYPES
from .scene import AssetSpec, Room, Scene, dumps_scene

MIN_SIDE, MAX_SIDE = 300, 800
MIN_ASSETS, MAX_ASSETS = 5, 20
# footprint budget as a share of floor area; keeps rooms furnishable
MAX_FILL = 0.3


def _counts(template, rng: random.Random) -> list[tuple[str, int]]:
    counts = [(cat, rng.randint(lo, hi)) for cat, lo, hi in template.items]
    total = sum(n for _, n in counts)
    optional = [i for i, (cat, lo, hi) in enumerate(template.items) if hi > lo]
    while total < MIN_ASSETS and optional:
        i = rng.choice(optional)
        cat, n = counts[i]
        if n < template.items[i][2]:
            counts[i] = (cat, n + 1)
            total += 1
        else:
            optional.remove(i)
    while total > MAX_ASSETS:
        i = rng.choice([i for i, (cat, n) in enumerate(counts) if n > template.items[i][1]])
        cat, n = counts[i]
        counts[i] = (cat, n - 1)
        total -= 1
    return counts


def generate_scene(
    rng: random.Random,
    room_type: str | None = None,
    min_side: int = MIN_SIDE,
    max_side: int = MAX_SIDE,
) -> Scene:
    if room_type is None:
        room_type = rng.choice(sorted(ROOM_TYPES))
    template = ROOM_TYPES[room_type]
    counts = _counts(template, rng)
    assets = []
    for cat, n in counts:
        f = FURNITURE[cat]
        for i in range(n):
            assets.append(AssetSpec(f"{cat}-{i}", f.w, f.d, f.h))
    need = sum(a.area for a in assets) / MAX_FILL
    longest = max(max(a.footprint_w, a.footprint_d) for a in assets)
    low = min(max(min_side, int(longest) + 60), max_side)
    for _ in range(200):
        width = rng.randrange(low, max_side + 1, 10)
        depth = rng.randrange(low, max_side + 1, 10)
        if width * depth >= need:
            break
    else:
        width = depth = max_side
    return Scene(
        room=Room(width, depth),
        assets=assets,
        prompt=rng.choice(template.prompts),
        room_type=room_type,
    )


def generate_corpus(count: int, seed: int, min_side: int = MIN_SIDE, max_side: int = MAX_SIDE) -> list[Scene]:
    if count < 1:
        raise ValueError("count must be at least 1")
    if not 0 < min_side <= max_side:
        raise ValueError("need 0 < min_side <= max_side")
    rng = random.Random(seed)
    types = sorted(ROOM_TYPES)
    # cycle through room types so every category is represented
    return [generate_scene(rng, types[i % len(types)], min_side, max_side) for i in range(count)]


def write_corpus(
    out_dir: str | Path, count: int, seed: int, min_side: int = MIN_SIDE, max_side: int = MAX_SIDE
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, scene in enumerate(generate_corpus(count, seed, min_side, max_side)):
        slug = scene.room_type.replace(" ", "_").replace("'", "")
        path = out_dir / f"scene_{i:03d}_{slug}.json"
        path.write_text(dumps_scene(scene))
        paths.append(path)
    return paths
