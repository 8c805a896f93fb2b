import base64
import json
from pathlib import Path

import httpx
import pytest

from roomsynth.agents import BackendError, Message, MissingAPIKeyError, ParseError, RemoteBackend, parse_model_output
from roomsynth.agents.backends import to_wire
from roomsynth.agents.replay import ChatStub, ReplayResponder, completion_body, request_digest
from roomsynth.agents.roles import SCHEMA_FOR
from roomsynth.config import PipelineConfig
from roomsynth.orchestrator import snapshot, synthesize
from roomsynth.scene import scene_from_dict

TRANSCRIPTS = sorted((Path(__file__).parent / "fixtures" / "transcripts").glob("transcript_*.json"))


def _ok(text):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


def test_wire_format_attaches_png():
    png = b"\x89PNG fake"
    wire = to_wire([Message("user", "look", png), Message("user", "plain")])
    parts = wire[0]["content"]
    assert parts[0] == {"type": "text", "text": "look"}
    assert parts[1]["image_url"]["url"] == "data:image/png;base64," + base64.b64encode(png).decode()
    assert wire[1] == {"role": "user", "content": "plain"}


def test_missing_key_names_the_variable(monkeypatch):
    monkeypatch.delenv("DISCO_API_KEY", raising=False)
    with pytest.raises(MissingAPIKeyError) as info:
        RemoteBackend("http://localhost", "m")
    assert info.value.var == "DISCO_API_KEY"
    assert "DISCO_API_KEY" in str(info.value)


def test_retries_with_backoff_then_succeeds():
    statuses = iter([429, 503])
    seen = []

    def handler(request):
        seen.append(request)
        code = next(statuses, 200)
        return _ok("fine") if code == 200 else httpx.Response(code, text="busy")

    sleeps = []
    backend = RemoteBackend(
        "http://api.test/v1", "m", api_key="sk-secret", backoff=0.5, transport=httpx.MockTransport(handler), sleep=sleeps.append
    )
    assert backend.complete([Message("user", "hi")], "design") == "fine"
    assert sleeps == [0.5, 1.0]
    assert len(seen) == 3
    assert seen[0].headers["Authorization"] == "Bearer sk-secret"
    assert str(seen[0].url) == "http://api.test/v1/chat/completions"
    assert json.loads(seen[0].content)["temperature"] == 0.0
    dumped = json.dumps(backend.transcript)
    assert "sk-secret" not in dumped and "[REDACTED]" in dumped


def test_retry_budget_exhausted():
    backend = RemoteBackend(
        "http://api.test", "m", api_key="k", max_retries=2,
        transport=httpx.MockTransport(lambda r: httpx.Response(500)), sleep=lambda s: None,
    )
    with pytest.raises(BackendError, match="3 attempts"):
        backend.complete([Message("user", "hi")], "plan")


def test_client_error_is_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401, text="bad key")

    backend = RemoteBackend("http://api.test", "m", api_key="k", transport=httpx.MockTransport(handler), sleep=lambda s: None)
    with pytest.raises(BackendError, match="401"):
        backend.complete([Message("user", "hi")], "plan")
    assert calls == [1]


def test_transport_errors_are_retried():
    attempts = []

    def handler(request):
        attempts.append(1)
        if len(attempts) < 2:
            raise httpx.ConnectError("refused")
        return _ok("back")

    backend = RemoteBackend("http://api.test", "m", api_key="k", transport=httpx.MockTransport(handler), sleep=lambda s: None)
    assert backend.complete([Message("user", "hi")], "plan") == "back"


def test_image_digest_in_transcript():
    backend = RemoteBackend("http://api.test", "m", api_key="k", transport=httpx.MockTransport(lambda r: _ok("x")))
    backend.complete([Message("user", "see", b"png-bytes")], "design")
    entry = backend.transcript[0]["request"]["messages"][0]
    assert "image_sha256" in entry and "base64" not in json.dumps(entry)


def test_stub_server_round_trip():
    with ChatStub(lambda payload: (200, completion_body("pong"))) as stub:
        backend = RemoteBackend(stub.url, "m", api_key="k")
        assert backend.complete([Message("user", "ping")], "plan") == "pong"
        assert stub.requests[0]["_authorization"] == "Bearer k"
        assert request_digest(stub.requests[0]["messages"]) == request_digest([{"role": "user", "content": "ping"}])


def test_twenty_transcripts_recorded():
    assert len(TRANSCRIPTS) == 20


@pytest.mark.parametrize("path", TRANSCRIPTS, ids=lambda p: p.stem)
def test_every_recorded_reply_parses_or_is_diagnosed(path):
    doc = json.loads(path.read_text())
    for call in doc["calls"]:
        if call["status"] != 200:
            continue
        try:
            parse_model_output(call["response"], SCHEMA_FOR[call["expect"]])
        except ParseError as exc:
            assert exc.diagnosis


@pytest.mark.parametrize("path", TRANSCRIPTS, ids=lambda p: p.stem)
def test_replay_transcript_through_stub(path):
    doc = json.loads(path.read_text())
    scene = scene_from_dict(doc["scene"])
    responder = ReplayResponder(doc["calls"])
    with ChatStub(responder) as stub:
        backend = RemoteBackend(stub.url, "stub", api_key="replay", sleep=lambda s: None)
        config = PipelineConfig(seed=doc["seed"], backend="remote")
        layout, trace, score = synthesize(scene.prompt, scene.assets, scene.room, config, backend, scene.room_type)
    assert responder.mismatches == []
    assert responder.exhausted
    assert snapshot(layout) == doc["final"]
    assert score.collision_rate == 0 and score.oob_rate == 0
