"""Run-configuration schema and validation.

Configurations are JSON objects validated against SCHEMA before any
computation; unknown keys are rejected. validate_config normalizes a
file (fills defaults) and returns the canonical form used for the
reproducibility hash.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import ConfigError

LATTICE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "Lx": {"type": "integer", "minimum": 3},
        "Ly": {"type": "integer", "minimum": 3},
        "J": {"type": "number"},
        # the protected middle gap needs eta < 0
        "eta": {"type": "number", "exclusiveMaximum": 0},
        "G": {"type": "number", "minimum": 0},
        "boundary": {"enum": ["open", "periodic"]},
        "disorder": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "seed": {"type": "integer"},
                        "W_intra": {"type": "number", "minimum": 0},
                        "W_inter": {"type": "number", "minimum": 0},
                        "W_diag": {"type": "number", "minimum": 0},
                    },
                    "required": ["seed"],
                },
            ]
        },
    },
}

EMITTER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "delta": {"type": "number"},
        "points": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "prefixItems": [
                    {"enum": [1, 2]},
                    {"type": "integer"},
                    {"type": "integer"},
                    {"type": "number"},
                ],
                "minItems": 4,
                "maxItems": 4,
            },
        },
    },
}

SPIN_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "layer": {"enum": [1, 2]},
            "nx": {"type": "integer"},
            "ny": {"type": "integer"},
        },
        "required": ["layer", "nx", "ny"],
    },
}

NUMERICS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n_k": {"type": "integer", "minimum": 1},
        "n_bins": {"type": "integer", "minimum": 16},
        "seeds": {"type": "array", "items": {"type": "integer"}},
        "g": {"type": "number"},
        "snap_tol": {"type": "number", "exclusiveMinimum": 0},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "subcommand": {"type": "string"},
        "lattice": LATTICE_SCHEMA,
        "emitter": EMITTER_SCHEMA,
        "spins": SPIN_SCHEMA,
        "numerics": NUMERICS_SCHEMA,
        "output_dir": {"type": "string"},
    },
}

DEFAULTS = {
    "lattice": {"Lx": 21, "Ly": 21, "J": 1.0, "eta": -1.0, "G": 0.25,
                "boundary": "open", "disorder": None},
    "numerics": {"n_k": 256, "n_bins": 200},
}


def validate_config_dict(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        pointer = "/" + "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"config schema violation at {pointer}: {exc.message}")
    out = json.loads(json.dumps(cfg))  # deep copy
    for block, defaults in DEFAULTS.items():
        merged = dict(defaults)
        merged.update(out.get(block, {}))
        out[block] = merged
    return out


def validate_config(path) -> dict:
    """Load, validate and normalize a JSON config file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return validate_config_dict(cfg)


def canonical_json(obj) -> str:
    """Stable key order and separators, for echoing and hashing."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
