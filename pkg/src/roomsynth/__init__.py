"""Furniture layout synthesis for rectangular rooms with deterministic grid repair."""

from .config import PipelineConfig
from .grid_refine import GridSet, RefineReport, build_grid, refine
from .metrics import SceneScore, score_scene
from .orchestrator import Trace, replay, synthesize
from .render import RenderOptions, encode_image, render_topdown
from .scene import AssetSpec, ConstraintSet, Layout, Pose, RelationKind, Room, Scene, load_scene, save_scene

__all__ = [
    "AssetSpec",
    "ConstraintSet",
    "GridSet",
    "Layout",
    "PipelineConfig",
    "Pose",
    "RefineReport",
    "RelationKind",
    "RenderOptions",
    "Room",
    "Scene",
    "SceneScore",
    "Trace",
    "build_grid",
    "encode_image",
    "load_scene",
    "refine",
    "render_topdown",
    "replay",
    "save_scene",
    "score_scene",
    "synthesize",
]
