"""Minimal JSON-schema subset validator for the shipped report schema.

Supports: type (object, array, string, number, integer, boolean, null),
required, properties, additionalProperties (boolean), items, and enum.  That
subset covers the shipped report schema without pulling in a dependency.
"""

from __future__ import annotations

import functools
import json
from importlib import resources

_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "boolean": bool,
    "null": type(None),
}


def _type_ok(value, type_name: str) -> bool:
    if type_name == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if type_name == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, _TYPES[type_name])


def validate_schema(instance, schema: dict, path: str = "$") -> list[str]:
    """Return a list of violation messages (empty when valid)."""
    errors: list[str] = []
    stated = schema.get("type")
    if stated is not None:
        allowed = stated if isinstance(stated, list) else [stated]
        if not any(_type_ok(instance, t) for t in allowed):
            errors.append(f"{path}: expected type {stated}, got {type(instance).__name__}")
            return errors
    if "enum" in schema and instance not in schema["enum"]:
        errors.append(f"{path}: value {instance!r} not in enum")
    if isinstance(instance, dict):
        for key in schema.get("required", []):
            if key not in instance:
                errors.append(f"{path}: missing required key {key!r}")
        props = schema.get("properties", {})
        for key, sub in props.items():
            if key in instance:
                errors.extend(validate_schema(instance[key], sub, f"{path}.{key}"))
        if schema.get("additionalProperties") is False:
            for key in instance:
                if key not in props:
                    errors.append(f"{path}: unexpected key {key!r}")
    if isinstance(instance, list) and "items" in schema:
        for k, item in enumerate(instance):
            errors.extend(validate_schema(item, schema["items"], f"{path}[{k}]"))
    return errors


@functools.lru_cache(maxsize=1)
def load_report_schema() -> dict:
    text = resources.files("gentensor").joinpath("report_schema.json").read_text()
    return json.loads(text)
