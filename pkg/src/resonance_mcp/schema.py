"""JSON schema of the run configuration document.

``validate_document`` checks a decoded document with ``jsonschema`` and
re-raises the first violation as ``ConfigError`` naming the field path,
e.g. ``scene.inclusions[0].gamma``. Checks that relate several fields
(region ordering, material definiteness) stay with the builders in
``config``.
"""

from collections.abc import Iterable
from typing import Any

import jsonschema

from .core.geometry import CURVE_KINDS
from .errors import ConfigError

SCHEMA_VERSION = 1
TASKS: tuple[str, ...] = ("resonances", "polarization", "sweep", "validate", "oracle")
JUMP_MODES: tuple[str, ...] = ("derived", "literal")
SHIFT_MODES: tuple[str, ...] = ("residue", "averaged")
CONTRAST_MODES: tuple[str, ...] = ("trace", "mean")

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_GRID_SIZE = {"type": "integer", "minimum": 16, "multipleOf": 2}


def _vector(length: int, items: dict[str, Any] = _NUMBER) -> dict[str, Any]:
    return {"type": "array", "items": items, "minItems": length, "maxItems": length}


_PAIR = _vector(2)

CURVE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(CURVE_KINDS)},
        "radius": _POSITIVE,
        "semi_axes": _vector(2, _POSITIVE),
        "amplitude": _NUMBER,
        "arms": {"type": "integer", "minimum": 1},
        "center": _PAIR,
        "orientation": _NUMBER,
        "scale": _POSITIVE,
        "linear": _vector(4),
    },
    "if": {"properties": {"kind": {"const": "star"}}},
    "then": {"properties": {"amplitude": {"exclusiveMinimum": -1, "exclusiveMaximum": 1}}},
}

MATERIAL_SCHEMA: dict[str, Any] = {
    "anyOf": [_NUMBER, _vector(2, _vector(2))],
}

TOLERANCE_FIELDS: dict[str, dict[str, Any]] = {
    "beyn_rank": _POSITIVE,
    "null_space": _POSITIVE,
    "newton_step": _POSITIVE,
    "newton_max_iter": {"type": "integer", "minimum": 1},
    "residual": _POSITIVE,
    "contact": _POSITIVE,
    "system_condition": _POSITIVE,
    "pole_condition": _POSITIVE,
    "singular_floor": _POSITIVE,
    "dedupe": _POSITIVE,
}

RUN_CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "resonance run configuration",
    "type": "object",
    "required": ["task", "scene"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "task": {"enum": list(TASKS)},
        "scene": {
            "type": "object",
            "required": ["outer", "gamma1", "gamma2"],
            "additionalProperties": False,
            "properties": {
                "outer": CURVE_SCHEMA,
                "gamma1": _POSITIVE,
                "gamma2": _POSITIVE,
                "epsilon": {"type": "number", "minimum": 0},
                "inclusions": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["center", "shape", "gamma"],
                        "additionalProperties": False,
                        "properties": {
                            "center": _PAIR,
                            "shape": CURVE_SCHEMA,
                            "gamma": MATERIAL_SCHEMA,
                        },
                    },
                },
            },
        },
        "contours": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["center", "radius"],
                "additionalProperties": False,
                "properties": {
                    "center": _PAIR,
                    "radius": _POSITIVE,
                    "points": {"type": "integer", "minimum": 8},
                    "probe_rank": {"type": "integer", "minimum": 1},
                },
            },
        },
        "n_outer": _GRID_SIZE,
        "n_inclusion": _GRID_SIZE,
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "jump_mode": {"enum": list(JUMP_MODES)},
        "contrast": {"enum": list(CONTRAST_MODES)},
        "polarization": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["shape", "gamma_bg", "trace_gamma_d"],
                "additionalProperties": False,
                "properties": {
                    "shape": CURVE_SCHEMA,
                    "gamma_bg": _POSITIVE,
                    "trace_gamma_d": _POSITIVE,
                    "n_grid": _GRID_SIZE,
                },
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilons": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0},
                    "minItems": 1,
                },
                "target": {"anyOf": [{"type": "null"}, _PAIR]},
                "probe_omega": _PAIR,
                "shift_mode": {"enum": list(SHIFT_MODES)},
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "modes": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "region": _vector(4),
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": TOLERANCE_FIELDS,
        },
        "output_dir": {"type": "string"},
    },
}


def field_path(parts: Iterable[str | int], prefix: str = "") -> str:
    """Dotted path with list indices, e.g. ``contours[0].center``."""
    path = prefix
    for part in parts:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path = f"{path}.{part}" if path else str(part)
    return path


def _error_field(error: jsonschema.ValidationError, prefix: str) -> str:
    parts = list(error.absolute_path)
    if error.validator == "additionalProperties" and isinstance(error.instance, dict):
        known = error.schema.get("properties", {})
        parts.append(sorted(key for key in error.instance if key not in known)[0])
    elif error.validator == "required" and isinstance(error.instance, dict):
        parts.append(next(key for key in error.validator_value if key not in error.instance))
    return field_path(parts, prefix) or "config"


def validate_document(data: Any, schema: dict[str, Any] = RUN_CONFIG_SCHEMA, prefix: str = "") -> None:
    """Validate ``data`` against ``schema``.

    Args:
        data: Decoded JSON document.
        schema: Schema to check against (the run configuration by default).
        prefix: Path of ``data`` inside a larger document, used in messages.

    Raises:
        ConfigError: At the first violation, with ``field`` set to its path.
    """
    try:
        jsonschema.validate(instance=data, schema=schema)
    except jsonschema.ValidationError as e:
        path = _error_field(e, prefix)
        if e.validator == "additionalProperties":
            message = f"Unknown field {path}"
        elif e.validator == "required":
            message = f"Missing required field {path}"
        else:
            message = f"{path}: {e.message}"
        raise ConfigError(message, field=path, validator=str(e.validator)) from e
