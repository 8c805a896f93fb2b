"""Chat-model backends.

A backend turns a list of messages into reply text. ``RemoteBackend`` talks
to any OpenAI-compatible chat-completions endpoint; ``MockBackend`` (in
:mod:`roomsynth.agents.mock`) answers offline from the structured context
each agent call passes along.
"""

from __future__ import annotations

import base64
import hashlib
import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Protocol

import httpx

logger = logging.getLogger(__name__)

API_KEY_ENV = "DISCO_API_KEY"


class BackendError(RuntimeError):
    """The backend could not produce a reply."""


class MissingAPIKeyError(BackendError):
    def __init__(self, var: str):
        super().__init__(f"environment variable {var} is not set")
        self.var = var


@dataclass(frozen=True)
class Message:
    role: str
    text: str
    image: bytes | None = None  # PNG bytes


class AgentBackend(Protocol):
    name: str
    endpoint: str

    def complete(self, messages: list[Message], expect: str, context: dict | None = None) -> str: ...


def image_part(png: bytes) -> dict:
    b64 = base64.b64encode(png).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}}


def to_wire(messages: list[Message]) -> list[dict]:
    out = []
    for m in messages:
        if m.image is None:
            out.append({"role": m.role, "content": m.text})
        else:
            out.append({"role": m.role, "content": [{"type": "text", "text": m.text}, image_part(m.image)]})
    return out


def _loggable(messages: list[Message]) -> list[dict]:
    """Wire messages with image payloads replaced by their digest."""
    out = []
    for m in messages:
        entry: dict[str, Any] = {"role": m.role, "content": m.text}
        if m.image is not None:
            entry["image_sha256"] = hashlib.sha256(m.image).hexdigest()
        out.append(entry)
    return out


class RemoteBackend:
    """OpenAI-compatible chat completions over HTTP.

    Retries transport errors, 429 and 5xx with exponential backoff. A
    semaphore caps concurrent requests across threads sharing the backend.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        api_key: str | None = None,
        api_key_env: str = API_KEY_ENV,
        temperature: float = 0.0,
        timeout: float = 120.0,
        max_retries: int = 3,
        backoff: float = 1.0,
        max_in_flight: int = 4,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if api_key is None:
            api_key = os.environ.get(api_key_env)
            if not api_key:
                raise MissingAPIKeyError(api_key_env)
        self.endpoint = endpoint
        self.name = model
        self.temperature = temperature
        self.max_retries = max_retries
        self.backoff = backoff
        self._key = api_key
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self._lock = threading.Lock()
        self.transcript: list[dict] = []

    @property
    def url(self) -> str:
        base = self.endpoint.rstrip("/")
        return base if base.endswith("/chat/completions") else base + "/chat/completions"

    def _record(self, entry: dict) -> None:
        with self._lock:
            self.transcript.append(entry)

    def complete(self, messages: list[Message], expect: str, context: dict | None = None) -> str:
        payload = {"model": self.name, "messages": to_wire(messages), "temperature": self.temperature}
        headers = {"Authorization": f"Bearer {self._key}"}
        last_error: str = ""
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            with self._slots:
                try:
                    resp = self._client.post(self.url, json=payload, headers=headers)
                except httpx.TransportError as exc:
                    last_error = f"transport error: {exc}"
                    logger.warning("%s attempt %d: %s", self.url, attempt + 1, last_error)
                    continue
            entry = {
                "expect": expect,
                "url": self.url,
                "headers": {"Authorization": "Bearer [REDACTED]"},
                "request": {"model": self.name, "temperature": self.temperature, "messages": _loggable(messages)},
                "status": resp.status_code,
            }
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                entry["response"] = resp.text[:2000]
                self._record(entry)
                continue
            if resp.status_code >= 400:
                entry["response"] = resp.text[:2000]
                self._record(entry)
                raise BackendError(f"{self.url} returned HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"unexpected response shape from {self.url}: {exc!r}") from exc
            entry["response"] = text
            self._record(entry)
            return text if isinstance(text, str) else str(text)
        raise BackendError(f"{self.url} failed after {self.max_retries + 1} attempts ({last_error})")

    def close(self) -> None:
        self._client.close()
