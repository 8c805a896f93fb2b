"""A local chat-completions server for offline runs of the remote backend.

``ChatStub`` speaks just enough of the OpenAI wire format for
:class:`~roomsynth.agents.backends.RemoteBackend`: it accepts POSTs to
``/chat/completions`` and answers with whatever its responder returns.
``ReplayResponder`` serves a recorded transcript in order and checks that
each incoming request matches the recorded request digest.
"""

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Sequence

Responder = Callable[[dict], "tuple[int, str]"]


def request_digest(wire_messages: Sequence[dict]) -> str:
    """Digest of a request's roles and texts; attached images count only by presence."""
    canon = []
    for m in wire_messages:
        content = m.get("content")
        if isinstance(content, list):
            text = "".join(p.get("text", "") for p in content if p.get("type") == "text")
            has_image = any(p.get("type") == "image_url" for p in content)
        else:
            text, has_image = str(content), False
        canon.append([m.get("role"), text, has_image])
    return hashlib.sha256(json.dumps(canon, ensure_ascii=False).encode("utf-8")).hexdigest()


def completion_body(text: str, model: str = "stub") -> str:
    return json.dumps(
        {
            "id": "stub",
            "object": "chat.completion",
            "model": model,
            "choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
        }
    )


class ChatStub:
    """Threaded HTTP server on 127.0.0.1 with an ephemeral port."""

    def __init__(self, responder: Responder):
        self.responder = responder
        self.requests: list[dict] = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802 (http.server naming)
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                payload["_authorization"] = self.headers.get("Authorization", "")
                stub.requests.append(payload)
                if not self.path.rstrip("/").endswith("/chat/completions"):
                    status, body = 404, json.dumps({"error": "not found"})
                else:
                    status, body = stub.responder(payload)
                data = body.encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args) -> None:
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/v1"

    def start(self) -> "ChatStub":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "ChatStub":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


class ReplayResponder:
    """Serves recorded ``calls`` (``status``, ``response``, ``request_sha256``) in order."""

    def __init__(self, calls: Sequence[dict]):
        self.calls = list(calls)
        self.position = 0
        self.mismatches: list[int] = []
        self._lock = threading.Lock()

    def __call__(self, payload: dict) -> tuple[int, str]:
        with self._lock:
            if self.position >= len(self.calls):
                return 500, json.dumps({"error": "transcript exhausted"})
            call = self.calls[self.position]
            expected = call.get("request_sha256")
            if expected is not None and expected != request_digest(payload.get("messages", [])):
                self.mismatches.append(self.position)
            self.position += 1
        if call["status"] != 200:
            return call["status"], json.dumps({"error": call["response"]})
        return 200, completion_body(call["response"], payload.get("model", "stub"))

    @property
    def exhausted(self) -> bool:
        return self.position == len(self.calls)


__all__ = ["ChatStub", "ReplayResponder", "completion_body", "request_digest"]
