"""Recovering structured values from chat-model replies.

Replies are expected to be JSON but arrive wrapped in markdown fences,
followed by commentary, or written with Python literals. ``parse_model_output``
extracts the first top-level JSON value, validates it against one of the
named schemas, and normalizes it. Failures raise :class:`ParseError` whose
``diagnosis`` is phrased so it can be sent back to the model verbatim.
"""

from __future__ import annotations

import ast
import json
import re
from typing import Any

import jsonschema

VALID_ROTATIONS = (0, 90, 180, 270)

_FENCE = re.compile(r"```[a-zA-Z]*[ \t]*\n?(.*?)```", re.DOTALL)


class ParseError(ValueError):
    def __init__(self, diagnosis: str, text: str = ""):
        super().__init__(diagnosis)
        self.diagnosis = diagnosis
        self.text = text


_POSITION = {
    "type": "object",
    "properties": {"X": {"type": ["number", "string"]}, "Y": {"type": ["number", "string"]}},
    "required": ["X", "Y"],
}

SCHEMAS: dict[str, dict] = {
    "plan": {
        "type": "object",
        "properties": {
            "constraints": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "properties": {"against_wall": {"type": ["boolean", "string", "null"]}},
                },
            },
            "groups": {
                "anyOf": [
                    {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
                    {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
                ]
            },
        },
        "required": ["constraints", "groups"],
    },
    "poses": {
        "type": "array",
        "items": {
            "type": "object",
            "properties": {
                "object_name": {"type": "string"},
                "position": _POSITION,
                "rotation": {"type": ["number", "string", "null"]},
            },
            "required": ["object_name", "position"],
        },
    },
    "answers": {
        "type": "array",
        "items": {
            "type": "object",
            "properties": {"answer": {"type": ["string", "boolean"]}},
            "required": ["answer"],
        },
    },
}


def strip_fences(text: str) -> str:
    m = _FENCE.search(text)
    if m:
        return m.group(1).strip()
    return text.strip()


def _balanced_span(text: str, start: int) -> str | None:
    """Substring from ``start`` to its matching bracket, honoring quoted strings."""
    pairs = {"{": "}", "[": "]"}
    stack = []
    quote = None
    escape = False
    for i in range(start, len(text)):
        ch = text[i]
        if quote:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
        elif ch in pairs:
            stack.append(pairs[ch])
        elif ch in "}]":
            if not stack or ch != stack[-1]:
                return None
            stack.pop()
            if not stack:
                return text[start : i + 1]
    return None


_PY_LITERALS = re.compile(r"\b(true|false|null)\b")
_TRAILING_COMMA = re.compile(r",\s*([}\]])")


def _lenient(span: str) -> Any:
    cleaned = _TRAILING_COMMA.sub(r"\1", span)
    try:
        return json.loads(cleaned)
    except json.JSONDecodeError:
        pass
    pythonish = _PY_LITERALS.sub(lambda m: {"true": "True", "false": "False", "null": "None"}[m.group(1)], cleaned)
    return ast.literal_eval(pythonish)


def extract_json(text: str) -> Any:
    """First top-level JSON value in ``text``; raises ParseError if there is none."""
    body = strip_fences(text)
    starts = [i for i in (body.find("{"), body.find("[")) if i >= 0]
    if not starts:
        raise ParseError("The reply contains no JSON object or array.", text)
    start = min(starts)
    try:
        value, _ = json.JSONDecoder().raw_decode(body, start)
        return value
    except json.JSONDecodeError as exc:
        first_error = exc
    span = _balanced_span(body, start)
    if span is not None:
        try:
            return _lenient(span)
        except (ValueError, SyntaxError):
            pass
    raise ParseError(
        f"The reply is not valid JSON ({first_error.msg} at line {first_error.lineno} "
        f"column {first_error.colno}).",
        text,
    )


def _number(value: Any, what: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{what} must be a number, got {value!r}.") from None
    if out != out or out in (float("inf"), float("-inf")):
        raise ParseError(f"{what} must be finite, got {value!r}.")
    return out


def _rotation(value: Any, name: str) -> int:
    if value is None:
        return 0
    angle = _number(value, f"rotation of {name}")
    if angle not in VALID_ROTATIONS:
        raise ParseError(f"rotation {value!r} for {name} is not one of 0, 90, 180, 270.")
    return int(angle)


def _normalize_poses(value: Any) -> list[dict]:
    if isinstance(value, dict):
        for key in ("objects", "layout", "placements", "modified_objects"):
            if isinstance(value.get(key), list):
                value = value[key]
                break
        else:
            if "object_name" in value:
                value = [value]
            elif value and all(isinstance(v, dict) for v in value.values()):
                value = [{"object_name": k, **v} for k, v in value.items()]
    try:
        jsonschema.validate(value, SCHEMAS["poses"])
    except jsonschema.ValidationError as exc:
        raise ParseError(f"Each entry needs object_name, position {{X, Y}} and rotation: {exc.message}.") from None
    out = []
    for item in value:
        name = item["object_name"]
        x = _number(item["position"]["X"], f"position X of {name}")
        y = _number(item["position"]["Y"], f"position Y of {name}")
        if x < 0 or y < 0:
            raise ParseError(f"position of {name} must be non-negative, got ({x}, {y}).")
        out.append({"object_name": name, "x": x, "y": y, "rotation": _rotation(item.get("rotation"), name)})
    return out


def _yes_no(value: Any, index: int) -> bool:
    if isinstance(value, bool):
        return value
    word = re.sub(r"[^a-z]", "", str(value).lower())
    if word in ("yes", "true"):
        return True
    if word in ("no", "false"):
        return False
    raise ParseError(f"answer {index + 1} is {value!r}; answer only yes or no.")


def _normalize_answers(value: Any) -> list[dict]:
    if isinstance(value, dict):
        for key in ("answers", "results", "questions"):
            if isinstance(value.get(key), list):
                value = value[key]
                break
        else:
            value = [value]
    try:
        jsonschema.validate(value, SCHEMAS["answers"])
    except jsonschema.ValidationError as exc:
        raise ParseError(f"Each answer entry needs an 'answer' field: {exc.message}.") from None
    return [
        {
            "question": item.get("question", ""),
            "answer": _yes_no(item["answer"], i),
            "reason": str(item.get("reason", "") or ""),
        }
        for i, item in enumerate(value)
    ]


def _group_order(key: str) -> tuple[int, str]:
    digits = re.findall(r"\d+", key)
    return (int(digits[-1]) if digits else 1 << 30, key)


def _normalize_plan(value: Any) -> dict:
    try:
        jsonschema.validate(value, SCHEMAS["plan"])
    except jsonschema.ValidationError as exc:
        raise ParseError(f"The plan needs 'constraints' and 'groups' keys: {exc.message}.") from None
    groups = value["groups"]
    if isinstance(groups, dict):
        groups = [groups[k] for k in sorted(groups, key=_group_order)]
    return {"constraints": value["constraints"], "groups": [list(g) for g in groups]}


def _parse_boolean(text: str) -> bool:
    body = strip_fences(text)
    words = re.findall(r"[A-Za-z]+", body)
    verdicts = [w.lower() for w in words if w.lower() in ("true", "false")]
    if len(set(verdicts)) != 1:
        raise ParseError("Output only True or False.", text)
    return verdicts[0] == "true"


def parse_model_output(text: str, schema: str) -> Any:
    """Parse ``text`` as the named schema: plan, poses, answers or boolean."""
    if schema == "boolean":
        return _parse_boolean(text)
    value = extract_json(text)
    try:
        if schema == "plan":
            return _normalize_plan(value)
        if schema == "poses":
            return _normalize_poses(value)
        if schema == "answers":
            return _normalize_answers(value)
    except ParseError as exc:
        exc.text = text
        raise
    raise ValueError(f"unknown schema {schema!r}")
