"""Record chat-completion transcripts for the remote-backend replay tests.

Each scene runs the full pipeline through ``RemoteBackend`` against a local
stub server. By default the stub answers with the offline mock's replies,
decorated the way chat models tend to decorate JSON (fences, prose,
trailing commas, Python literals), with occasional malformed replies that
need a repair round and occasional 429/500 responses. Pass ``--endpoint``
and ``--model`` to record against a real model instead (needs DISCO_API_KEY).

    python scripts/record_transcripts.py --count 20 --out tests/fixtures/transcripts
"""

from __future__ import annotations

import argparse
import json
import queue
import random
import re
from pathlib import Path

from roomsynth.agents import Message, MockBackend, RemoteBackend
from roomsynth.agents.replay import ChatStub, completion_body, request_digest
from roomsynth.config import PipelineConfig
from roomsynth.generator import generate_corpus
from roomsynth.orchestrator import snapshot, synthesize
from roomsynth.scene import scene_to_dict


def decorate(text: str, rng: random.Random) -> str:
    """Rewrap a clean reply in one of the styles models actually produce."""
    body = text.strip()
    if body.startswith("```"):
        body = re.sub(r"^```[a-z]*\n|\n```$", "", body)
    if body in ("True", "False"):
        return rng.choice([body, f"{body}.", f"**{body}**", f"Answer: {body}"])
    style = rng.choice(["plain", "fence", "prose", "trailing_comma", "python"])
    if style == "fence":
        return f"```json\n{body}\n```"
    if style == "prose":
        return f"Here is the result.\n{body}\nLet me know if you want any changes."
    if style == "trailing_comma":
        return re.sub(r"\}(\s*)\]\s*$", r"},\1]", body) if body.endswith("]") else body
    if style == "python":
        try:
            return repr(json.loads(body))
        except json.JSONDecodeError:
            return body
    return body


def corrupt(text: str, expect: str) -> str | None:
    """A malformed variant of ``text`` that forces one repair round, if one applies."""
    if expect in ("design", "semantic_refine"):
        out, n = re.subn(r'"rotation": (0|90|180|270)', '"rotation": 45', text, count=1)
        return out if n else None
    if expect == "evaluate_semantic":
        out, n = re.subn(r'"answer": "(yes|no)"', '"answer": "maybe"', text, count=1)
        return out if n else None
    if expect == "evaluate_physical":
        return "It is hard to say from the image."
    return None


class MockRelay:
    """Backend wrapper: asks the mock, queues the (decorated) reply for the stub, then calls remote."""

    def __init__(self, mock: MockBackend, remote: RemoteBackend, replies: "queue.Queue", rng: random.Random):
        self.mock, self.remote, self.replies, self.rng = mock, remote, replies, rng
        self.name = remote.name
        self.endpoint = remote.endpoint

    def complete(self, messages: list[Message], expect: str, context: dict | None = None) -> str:
        clean = self.mock.complete(messages, expect, context)
        first_try = len(messages) == 1
        if first_try and self.rng.random() < 0.08:
            self.replies.put((self.rng.choice([429, 500]), "temporarily unavailable"))
        bad = corrupt(clean, expect) if first_try and self.rng.random() < 0.1 else None
        self.replies.put((200, bad if bad is not None else decorate(clean, self.rng)))
        return self.remote.complete(messages, expect, context)


def record_scene(scene, seed: int, endpoint: str | None = None, model: str | None = None) -> dict:
    config = PipelineConfig(seed=seed, backend="remote")
    rng = random.Random(seed)
    replies: "queue.Queue" = queue.Queue()

    def respond(payload: dict) -> tuple[int, str]:
        status, text = replies.get_nowait()
        return (status, completion_body(text)) if status == 200 else (status, json.dumps({"error": text}))

    if endpoint:
        remote = RemoteBackend(endpoint, model or config.remote.model)
        layout, trace, score = synthesize(scene.prompt, scene.assets, scene.room, config, remote, scene.room_type)
        calls = remote.transcript
    else:
        with ChatStub(respond) as stub:
            remote = RemoteBackend(stub.url, "stub", api_key="recording", sleep=lambda s: None)
            backend = MockRelay(MockBackend(seed, config.mock_noise, config.grid_spacing, config.relation), remote, replies, rng)
            layout, trace, score = synthesize(scene.prompt, scene.assets, scene.room, config, backend, scene.room_type)
            digests = [request_digest(r["messages"]) for r in stub.requests]
        calls = remote.transcript
        for call, digest in zip(calls, digests):
            call["request_sha256"] = digest
    return {
        "scene": scene_to_dict(scene),
        "seed": seed,
        "calls": [
            {
                "expect": c["expect"],
                "status": c["status"],
                "request_sha256": c.get("request_sha256"),
                "response": c["response"],
            }
            for c in calls
        ],
        "final": snapshot(layout),
        "score": score.to_json(),
    }


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="tests/fixtures/transcripts")
    ap.add_argument("--max-assets", type=int, default=8, help="keep fixtures small")
    ap.add_argument("--endpoint")
    ap.add_argument("--model")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenes = [s for s in generate_corpus(args.count * 4, args.seed) if len(s.assets) <= args.max_assets]
    for i, scene in enumerate(scenes[: args.count]):
        doc = record_scene(scene, args.seed + i, args.endpoint, args.model)
        path = out / f"transcript_{i:02d}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        statuses = [c["status"] for c in doc["calls"]]
        print(f"{path}: {len(statuses)} calls, {sum(s != 200 for s in statuses)} retried")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
