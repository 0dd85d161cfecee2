"""JSON analysis configs: schema, validation and construction of the objects they describe."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import jsonschema

from .measure import (
    FAMILIES,
    MeasureSpace,
    Transformation,
    as_fraction,
    identity_map,
    make_builtin_space,
    make_finite_map,
    make_finite_space,
)
from .operators import MultiplicationOperator
from .rearrangement import LorentzIndex, SimpleFunction
from .verdict import HIGH_RATIO, LOW_RATIO

ANALYSES = (
    "check_injective",
    "composition_bound",
    "orbit",
    "li_yorke_criterion",
    "injective_li_yorke_criterion",
    "finite_measure_equivalences",
    "irregular_vector_search",
    "multiplication_li_yorke",
    "positively_expansive",
    "uniformly_positively_expansive",
    "expansive_invertible",
    "uniformly_expansive_split",
    "sphere_divergence_probe",
)

_rational = {
    "anyOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*-?\d+(\.\d+)?([eE]-?\d+)?(\s*/\s*\d+)?\s*$"},
    ]
}
_exponent = {"oneOf": [_rational, {"type": "string", "enum": ["inf"]}]}
_atom = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string"},
        {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
    ]
}
_atom_set = {"type": "array", "items": _atom}
_pairs = {"type": "array", "items": {"type": "array", "prefixItems": [_atom, _rational], "items": False, "minItems": 2}}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["space", "analyses"],
    "properties": {
        "space": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["family"],
                    "properties": {"family": {"enum": list(FAMILIES)}, "r": _rational},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["atoms"],
                    "properties": {"atoms": {**_pairs, "minItems": 1}},
                },
            ]
        },
        "transformation": {
            "oneOf": [
                {"const": "identity"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["map"],
                    "properties": {
                        "map": {"type": "array", "items": {"type": "array", "prefixItems": [_atom, _atom],
                                                           "items": False, "minItems": 2}}
                    },
                },
            ]
        },
        "multiplier": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"theta": _pairs, "default": _rational},
        },
        "lorentz": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["p", "q"],
                "properties": {"p": _exponent, "q": _exponent},
            },
        },
        "horizon": {"type": "integer", "minimum": 1},
        "window": {"type": "integer", "minimum": 1},
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"low": _rational, "high": _rational, "divergence": _rational},
        },
        "analyses": {"type": "array", "minItems": 1, "items": {"enum": list(ANALYSES)}},
        "candidate_sets": {"type": "array", "items": _atom_set},
        "probe_sets": {"type": "array", "items": _atom_set},
        "set": _atom_set,
        "vector": _pairs,
        "ratio_target": _rational,
        "samples": {"type": "integer", "minimum": 1},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"report": {"type": "string"}, "orbit_csv": {"type": "string"}},
        },
        "seed": {"type": "integer"},
    },
}


class ConfigError(ValueError):
    """The config violates the schema or describes an invalid object."""


def atom_from_json(x):
    return tuple(x) if isinstance(x, list) else x


def _atoms(xs):
    return [atom_from_json(x) for x in xs]


@dataclass
class AnalysisConfig:
    raw: dict
    space: MeasureSpace
    tau: Optional[Transformation]
    multiplier: Optional[MultiplicationOperator]
    indices: list
    horizon: int = 64
    window: int = 256
    low: Fraction = LOW_RATIO
    high: Fraction = HIGH_RATIO
    divergence: Fraction = Fraction(2)
    analyses: list = field(default_factory=list)
    candidate_sets: Optional[list] = None
    probe_sets: Optional[list] = None
    target_set: Optional[list] = None
    vector: Optional[SimpleFunction] = None
    ratio_target: Fraction = HIGH_RATIO
    samples: int = 8
    report_path: Optional[str] = None
    csv_path: Optional[str] = None


def parse_config(raw: dict) -> AnalysisConfig:
    """Validate ``raw`` and build the space, map, multiplier and indices."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from None
    try:
        sp = raw["space"]
        if "family" in sp:
            space, tau = make_builtin_space(sp["family"], sp.get("r"))
        else:
            space = make_finite_space((atom_from_json(a), w) for a, w in sp["atoms"])
            tau = None
        tr = raw.get("transformation")
        if tr == "identity":
            tau = identity_map(space)
        elif isinstance(tr, dict):
            if "family" in sp:
                raise ConfigError("explicit maps are only supported on finite spaces")
            tau = make_finite_map(space, {atom_from_json(a): atom_from_json(b) for a, b in tr["map"]})
        mult = None
        if "multiplier" in raw:
            m = raw["multiplier"]
            mult = MultiplicationOperator(space, {atom_from_json(a): v for a, v in m.get("theta", [])},
                                          m.get("default", 1))
        indices = [LorentzIndex(x["p"], x["q"]) for x in raw.get("lorentz", [{"p": 2, "q": 2}])]
        th = raw.get("thresholds", {})
        cfg = AnalysisConfig(
            raw=raw,
            space=space,
            tau=tau,
            multiplier=mult,
            indices=indices,
            horizon=raw.get("horizon", 64),
            window=raw.get("window", 256),
            low=as_fraction(th.get("low", LOW_RATIO)),
            high=as_fraction(th.get("high", HIGH_RATIO)),
            divergence=as_fraction(th.get("divergence", 2)),
            analyses=list(raw["analyses"]),
            candidate_sets=[_atoms(s) for s in raw["candidate_sets"]] if "candidate_sets" in raw else None,
            probe_sets=[_atoms(s) for s in raw["probe_sets"]] if "probe_sets" in raw else None,
            target_set=_atoms(raw["set"]) if "set" in raw else None,
            vector=SimpleFunction({atom_from_json(a): v for a, v in raw["vector"]}) if "vector" in raw else None,
            ratio_target=as_fraction(raw.get("ratio_target", HIGH_RATIO)),
            samples=raw.get("samples", 8),
            report_path=raw.get("output", {}).get("report"),
            csv_path=raw.get("output", {}).get("orbit_csv"),
        )
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    if not cfg.low < cfg.high:
        raise ConfigError("thresholds: low must be below high")
    if cfg.vector is not None:
        for a in cfg.vector.support:
            if a not in space:
                raise ConfigError(f"vector: atom {a!r} not in space")
    return cfg


def load_config(path) -> AnalysisConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from None
    return parse_config(raw)
