"""Pipeline configuration, loadable from a JSON document."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .grid_refine import DEFAULT_SPACING
from .relations import RelationParams
from .render import RenderOptions


@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4o"
    api_key_env: str = "DISCO_API_KEY"
    temperature: float = 0.0
    timeout: float = 120.0
    max_retries: int = 3
    backoff: float = 1.0
    max_in_flight: int = 4


@dataclass(frozen=True)
class PipelineConfig:
    grid_spacing: float = DEFAULT_SPACING
    relation: RelationParams = field(default_factory=RelationParams)
    max_semantic_rounds: int = 2
    backend: str = "mock"
    remote: RemoteConfig = field(default_factory=RemoteConfig)
    render: RenderOptions = field(default_factory=RenderOptions)
    seed: int = 0
    mock_noise: float = 0.25
    trace_timing: bool = False

    def __post_init__(self) -> None:
        if not self.grid_spacing > 0:
            raise ValueError("grid_spacing must be positive")
        if self.max_semantic_rounds < 0:
            raise ValueError("max_semantic_rounds must be non-negative")
        if self.backend not in ("mock", "remote"):
            raise ValueError(f"backend must be 'mock' or 'remote', got {self.backend!r}")
        if not 0 <= self.mock_noise <= 1:
            raise ValueError("mock_noise must be within [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        doc = asdict(self)
        doc["render"] = {k: list(v) if isinstance(v, tuple) else v for k, v in doc["render"].items()}
        return doc

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if "relation" in kwargs:
            kwargs["relation"] = RelationParams(**kwargs["relation"])
        if "remote" in kwargs:
            kwargs["remote"] = RemoteConfig(**kwargs["remote"])
        if "render" in kwargs:
            kwargs["render"] = RenderOptions(
                **{k: tuple(v) if isinstance(v, list) else v for k, v in kwargs["render"].items()}
            )
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_overrides(self, **changes: Any) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
