"""Model configuration: JSON schema, loading, and schedule construction.

One configuration object drives every CLI command.  Matrices travel as
nested ``[re, im]`` pairs; configurations round-trip losslessly through
JSON, and identical configurations produce byte-identical outputs (no
randomness, no timestamps, sorted keys).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import jsonschema
import numpy as np

from .errors import ConfigError
from .ioutil import json_to_matrix
from .metric_flow import SolverConfig
from .switching import Constant, ExponentialSwitch, LinearRamp, SmoothSwitch
from .two_level import TwoLevelParams

_MATRIX = {
    "type": "array",
    "items": {
        "type": "array",
        "items": {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 2,
            "maxItems": 2,
        },
    },
}

_SCHEDULE = {
    "type": "object",
    "properties": {
        "type": {
            "enum": ["constant", "exponential-switch", "linear-ramp", "smooth-switch"]
        },
        "h": _MATRIX,
        "h0": _MATRIX,
        "h1": _MATRIX,
        "h_int": _MATRIX,
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "width": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["type"],
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "adiametric model configuration",
    "type": "object",
    "properties": {
        "model": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["matrix", "two-level", "cubic"]},
                # matrix kind
                "h": _MATRIX,
                "schedule": _SCHEDULE,
                "theta0": _MATRIX,
                "t0": {"type": "number"},
                "t1": {"type": "number"},
                # two-level kind
                "v": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
                "w": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
                "ramp": {
                    "type": "object",
                    "properties": {
                        "duration": {"type": "number", "exclusiveMinimum": 0},
                        "amplitude": {"type": "number"},
                        "w3": {"type": "number"},
                        "v0": {"type": "number"},
                    },
                    "required": ["duration"],
                },
                "initial": {
                    "type": "object",
                    "properties": {
                        "theta0": {"type": "number"},
                        "alpha": {"type": "number"},
                        "components": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 4,
                            "maxItems": 4,
                        },
                    },
                },
                # cubic kind
                "g": {"type": "number"},
                "duration": {"type": "number", "exclusiveMinimum": 0},
                # static-metric weights (matrix kind)
                "weights": {"type": "array", "items": {"type": "number"}},
            },
            "required": ["kind"],
        },
        "scattering": {
            "type": "object",
            "properties": {
                "h0": _MATRIX,
                "h_int": _MATRIX,
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "eps_ladder": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 1,
                },
                "theta0": _MATRIX,
                "compare_shapes": {"type": "boolean"},
                "horizon_factor": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "sweep": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["two-level-deviation", "smatrix-defect"]},
                "durations": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 1,
                },
                "eps_ladder": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 1,
                },
                "amplitude": {"type": "number"},
                "w3": {"type": "number"},
                "h0": _MATRIX,
                "h_int": _MATRIX,
            },
            "required": ["kind"],
        },
        "solver": {
            "type": "object",
            "properties": {
                "rtol": {"type": "number", "exclusiveMinimum": 0},
                "atol": {"type": "number", "exclusiveMinimum": 0},
                "samples": {"type": "integer", "minimum": 2},
            },
        },
        "output": {
            "type": "object",
            "properties": {"format": {"enum": ["csv", "json"]}},
        },
    },
    "required": ["model"],
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "adiametric JSON report",
    "type": "object",
    "properties": {
        "config": {"type": "object"},
        "result": {"type": "object"},
        "diagnostics": {"type": "object"},
    },
    "required": ["config", "result", "diagnostics"],
}


@dataclass(frozen=True)
class ModelConfig:
    """Validated configuration with the raw document kept for reports."""

    raw: dict
    kind: str
    solver: SolverConfig
    output_format: str

    @property
    def model(self) -> dict:
        return self.raw["model"]

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})


def parse_config(document: Any) -> ModelConfig:
    """Validate a configuration document and wrap it."""
    try:
        jsonschema.validate(document, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from exc
    solver = document.get("solver", {})
    cfg = SolverConfig(
        rtol=float(solver.get("rtol", 1e-9)),
        atol=float(solver.get("atol", 1e-12)),
        samples=int(solver.get("samples", 201)),
    )
    fmt = document.get("output", {}).get("format", "csv")
    return ModelConfig(
        raw=document,
        kind=document["model"]["kind"],
        solver=cfg,
        output_format=fmt,
    )


def load_config(path) -> ModelConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    return parse_config(document)


def matrix_from(section: dict, key: str, required=True):
    if section.get(key) is None:
        if required:
            raise ConfigError(f"missing matrix field {key!r}")
        return None
    try:
        return json_to_matrix(section[key])
    except ValueError as exc:
        raise ConfigError(f"bad matrix field {key!r}: {exc}") from exc


def build_schedule(spec: dict):
    """Instantiate a Hamiltonian schedule from its JSON description."""
    kind = spec["type"]
    if kind == "constant":
        return Constant(matrix_from(spec, "h"))
    if kind == "exponential-switch":
        return ExponentialSwitch(
            matrix_from(spec, "h0"), matrix_from(spec, "h_int"), float(spec["eps"])
        )
    if kind == "linear-ramp":
        return LinearRamp(
            matrix_from(spec, "h0"), matrix_from(spec, "h1"), float(spec["duration"])
        )
    if kind == "smooth-switch":
        return SmoothSwitch(
            matrix_from(spec, "h0"), matrix_from(spec, "h_int"), float(spec["width"])
        )
    raise ConfigError(f"unknown schedule type {kind!r}")


def two_level_params(model: dict) -> TwoLevelParams:
    if "v" not in model or "w" not in model:
        raise ConfigError("two-level model needs 'v' and 'w' 4-vectors")
    return TwoLevelParams(
        v=np.asarray(model["v"], dtype=float), w=np.asarray(model["w"], dtype=float)
    )

