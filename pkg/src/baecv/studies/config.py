"""Experiment configuration: schema validation and canonical configs."""

import json
from importlib import resources

import jsonschema

from ..errors import ConfigError

_PRIOR_SCHEMA = {
    "type": "object",
    "required": ["space", "mean", "gamma", "kappa", "theta"],
    "properties": {
        "space": {"type": "string"},
        "mean": {"type": "number"},
        "gamma": {"type": "number", "minimum": 0},
        "kappa": {"type": "number", "minimum": 0},
        "theta": {},
        "constraint": {
            "type": ["object", "null"],
            "properties": {"min": {"type": "number"}},
        },
    },
}

SCHEMA = {
    "type": "object",
    "required": ["problem", "mesh", "labels", "priors", "model", "surrogate",
                 "observations", "noise", "factor", "study"],
    "properties": {
        "problem": {"enum": ["robin", "semilinear"]},
        "mesh": {
            "type": "object",
            "required": ["nx", "ny", "lx", "ly"],
            "properties": {
                "nx": {"type": "integer", "minimum": 2},
                "ny": {"type": "integer", "minimum": 2},
                "lx": {"type": "number", "exclusiveMinimum": 0},
                "ly": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "labels": {"type": "object"},
        "priors": {
            "type": "object",
            "required": ["m", "beta"],
            "properties": {"m": _PRIOR_SCHEMA, "beta": _PRIOR_SCHEMA},
        },
        "model": {"type": "object"},
        "surrogate": {"type": "object"},
        "observations": {"type": "object"},
        "noise": {
            "type": "object",
            "properties": {
                "relative_range": {"type": "number", "exclusiveMinimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "truth_seed": {"type": "integer"},
            },
        },
        "factor": {
            "type": "object",
            "properties": {
                "trace_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_rank": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "study": {
            "type": "object",
            "required": ["estimators", "n_grid", "reference_n", "n_seeds"],
            "properties": {
                "estimators": {"type": "array", "items": {"type": "string"}},
                "n_grid": {"type": "array", "items": {"type": "integer", "minimum": 2}},
                "reference_n": {"type": "integer", "minimum": 2},
                "n_seeds": {"type": "integer", "minimum": 1},
                "n_data": {"type": "integer", "minimum": 1},
                "posterior_estimators": {"type": "array"},
                "posterior_n_grid": {"type": "array"},
                "posterior_seeds": {"type": "integer", "minimum": 1},
                "posterior_reference_n": {"type": "integer", "minimum": 2},
            },
        },
    },
}

_KNOWN_ESTIMATORS = {"mc", "cv-lin", "cv-quad", "sample-free-lin", "sample-free-quad"}


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    grid = cfg["study"]["n_grid"]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("study n_grid must be strictly increasing")
    unknown = set(cfg["study"]["estimators"]) - _KNOWN_ESTIMATORS
    if unknown:
        raise ConfigError(f"unknown estimators: {sorted(unknown)}")
    return cfg


def load_config(path):
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(cfg)


def canonical_config(name):
    """Built-in experiment configs: ``robin`` (strip) or ``semilinear``."""
    if name not in ("robin", "semilinear"):
        raise ConfigError(f"no canonical config named {name!r}")
    text = resources.files("baecv.configs").joinpath(f"{name}.json").read_text()
    return validate_config(json.loads(text))
