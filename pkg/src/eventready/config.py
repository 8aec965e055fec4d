"""Experiment configuration: JSON schema, parsing, cross-reference checks.

A config is a plain JSON document.  Validation reports every schema
violation at once, not just the first, and then checks label
cross-references (element ports, detector groups, herald names, kept
arms) against the declared spatial labels.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import jsonschema

SCHEMA_VERSION = 1

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "spatial_labels", "sources"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "spatial_labels": {
            "type": "array",
            "items": {"type": "string", "minLength": 1},
            "minItems": 1,
        },
        "bins": {"type": "integer", "minimum": 1, "maximum": 8},
        "photon_budget": {"type": "integer", "minimum": 1, "maximum": 6},
        "convention": {"enum": ["perm", "i-reflect"]},
        "aliases": {"type": "object", "additionalProperties": {"type": "string"}},
        "sources": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "branches": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["photons"],
                        "additionalProperties": False,
                        "properties": {
                            "amplitude": {"$ref": "#/$defs/complexish"},
                            "photons": {
                                "type": "array",
                                "minItems": 1,
                                "items": {"$ref": "#/$defs/photon"},
                            },
                        },
                    },
                }
            },
            "required": ["branches"],
        },
        "elements": {"type": "array", "items": {"$ref": "#/$defs/element"}},
        "detectors": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["spatial"],
                "additionalProperties": False,
                "properties": {
                    "spatial": {"type": "string"},
                    "pol": {"enum": ["H", "V"]},
                },
            },
        },
        "heralds": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "require"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "require": {
                        "type": "object",
                        "minProperties": 1,
                        "additionalProperties": {"type": "integer", "minimum": 0},
                    },
                    "zero": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "kept": {
            "type": "array",
            "items": {"type": "string"},
            "minItems": 2,
            "maxItems": 2,
        },
        "analyzers": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "theta_a_deg": {"type": "number"},
                "theta_b_deg": {"type": "number"},
            },
            "required": ["theta_a_deg", "theta_b_deg"],
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "coherence_length_um": {"type": "number", "exclusiveMinimum": 0},
                "fringe_period_um": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "sampling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "shots": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "mode": {"enum": ["multinomial", "poisson"]},
            },
        },
    },
    "$defs": {
        "complexish": {
            "anyOf": [
                {"type": "number"},
                {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
            ]
        },
        "photon": {
            "type": "object",
            "required": ["spatial"],
            "additionalProperties": False,
            "properties": {
                "spatial": {"type": "string"},
                "pol_angle_deg": {"type": "number"},
                "pol_amps": {
                    "type": "array",
                    "items": {"$ref": "#/$defs/complexish"},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "overlap": {"$ref": "#/$defs/complexish"},
                "bins": {
                    "type": "array",
                    "items": {"$ref": "#/$defs/complexish"},
                    "minItems": 1,
                },
            },
        },
        "element": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {
                    "enum": [
                        "pbs",
                        "rpbs",
                        "hwp",
                        "polarizer",
                        "phase",
                        "beamsplitter",
                        "delay",
                        "bin_mixer",
                    ]
                },
                "port": {"type": "string"},
                "ports": {
                    "type": "array",
                    "items": {"type": "string"},
                    "minItems": 1,
                    "maxItems": 2,
                },
                "angle_deg": {"type": "number"},
                "phi": {"type": "number"},
                "transmissivity": {"type": "number", "minimum": 0, "maximum": 1},
                "delta_um": {"type": "number"},
                "overlap": {"$ref": "#/$defs/complexish"},
                "pol": {"enum": ["H", "V"]},
                "loss": {"type": "string"},
                "bin_map": {
                    "type": "object",
                    "additionalProperties": {"type": "integer", "minimum": 0},
                },
            },
            "additionalProperties": False,
        },
    },
}


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass
class ExperimentConfig:
    spatial_labels: tuple
    source_branches: list
    elements: list = field(default_factory=list)
    detectors: dict = field(default_factory=dict)
    heralds: list = field(default_factory=list)
    kept: tuple | None = None
    analyzers: dict | None = None
    model: dict = field(default_factory=dict)
    sampling: dict = field(default_factory=dict)
    bins: int = 4
    photon_budget: int = 4
    convention: str = "perm"
    aliases: dict = field(default_factory=dict)
    name: str = ""

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        violations = validate_config_dict(raw)
        if violations:
            raise ConfigError(violations)
        return ExperimentConfig(
            spatial_labels=tuple(raw["spatial_labels"]),
            source_branches=copy.deepcopy(raw["sources"]["branches"]),
            elements=copy.deepcopy(raw.get("elements", [])),
            detectors=copy.deepcopy(raw.get("detectors", {})),
            heralds=copy.deepcopy(raw.get("heralds", [])),
            kept=tuple(raw["kept"]) if raw.get("kept") else None,
            analyzers=copy.deepcopy(raw.get("analyzers")),
            model=copy.deepcopy(raw.get("model", {})),
            sampling=copy.deepcopy(raw.get("sampling", {})),
            bins=int(raw.get("bins", 4)),
            photon_budget=int(raw.get("photon_budget", 4)),
            convention=raw.get("convention", "perm"),
            aliases=copy.deepcopy(raw.get("aliases", {})),
            name=raw.get("name", ""),
        )

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "spatial_labels": list(self.spatial_labels),
            "sources": {"branches": copy.deepcopy(self.source_branches)},
        }
        if self.name:
            out["name"] = self.name
        if self.elements:
            out["elements"] = copy.deepcopy(self.elements)
        if self.detectors:
            out["detectors"] = copy.deepcopy(self.detectors)
        if self.heralds:
            out["heralds"] = copy.deepcopy(self.heralds)
        if self.kept:
            out["kept"] = list(self.kept)
        if self.analyzers:
            out["analyzers"] = copy.deepcopy(self.analyzers)
        if self.model:
            out["model"] = copy.deepcopy(self.model)
        if self.sampling:
            out["sampling"] = copy.deepcopy(self.sampling)
        if self.bins != 4:
            out["bins"] = self.bins
        if self.photon_budget != 4:
            out["photon_budget"] = self.photon_budget
        if self.convention != "perm":
            out["convention"] = self.convention
        if self.aliases:
            out["aliases"] = copy.deepcopy(self.aliases)
        return out

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _cross_reference_violations(raw: dict):
    labels = set(raw.get("spatial_labels", []))
    problems = []
    for b, branch in enumerate(raw.get("sources", {}).get("branches", [])):
        for p, photon in enumerate(branch.get("photons", [])):
            s = photon.get("spatial")
            if s not in labels:
                problems.append(
                    f"$.sources.branches[{b}].photons[{p}].spatial: dangling label {s!r}"
                )
    for i, el in enumerate(raw.get("elements", [])):
        ports = el.get("ports") or ([el["port"]] if "port" in el else [])
        if not ports:
            problems.append(f"$.elements[{i}]: element binds no port")
        for port in ports:
            if port not in labels:
                problems.append(f"$.elements[{i}]: dangling label {port!r}")
        loss = el.get("loss")
        if loss is not None and loss not in labels:
            problems.append(f"$.elements[{i}].loss: dangling label {loss!r}")
    detector_names = set()
    for name, det in raw.get("detectors", {}).items():
        detector_names.add(name)
        if det.get("spatial") not in labels:
            problems.append(f"$.detectors.{name}.spatial: dangling label {det.get('spatial')!r}")
    for i, herald_spec in enumerate(raw.get("heralds", [])):
        for key in herald_spec.get("require", {}):
            if key not in detector_names:
                problems.append(f"$.heralds[{i}].require: unknown detector {key!r}")
        for key in herald_spec.get("zero", []):
            if key not in detector_names:
                problems.append(f"$.heralds[{i}].zero: unknown detector {key!r}")
    for arm in raw.get("kept", []) or []:
        if arm not in labels:
            problems.append(f"$.kept: dangling label {arm!r}")
    return problems


def validate_config_dict(raw: dict):
    """Every schema violation plus cross-reference problems, as strings."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    problems = []
    for err in sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path)):
        path = "$." + ".".join(str(p) for p in err.absolute_path) if err.absolute_path else "$"
        problems.append(f"{path}: {err.message}")
    if not problems:
        problems.extend(_cross_reference_violations(raw))
    return problems


def parse_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"JSON parse error: {exc}"]) from exc
    return ExperimentConfig.from_dict(raw)


def schema_json() -> str:
    """The published config schema, as formatted JSON."""
    return json.dumps(CONFIG_SCHEMA, indent=2, sort_keys=True)
