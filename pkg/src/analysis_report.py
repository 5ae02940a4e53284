#!/usr/bin/env python3
"""
Analysis Report Module
JSON report of one analysis run, with its published schema
"""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema

from .equilibrium_classifier import DirectionSpectrum
from .equilibrium_finder import Equilibrium, Region
from .flow_integrator import IntegrationConfig
from .limit_set_classifier import (
    ConnectionType, FedWitness, LimitDescriptor, OrbitClassification, PbReport
)

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_NULLABLE_POINT = {"oneOf": [_POINT, {"type": "null"}]}

_DESCRIPTOR = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["SingleEquilibrium", "PeriodicSelf", "Escapes", "Unknown"]},
        "equilibrium": _NULLABLE_POINT,
        "direction": {"type": ["number", "null"]},
        "spiral": {"type": "boolean"},
        "budget": {"type": ["number", "null"]},
    },
    "required": ["kind", "equilibrium", "direction", "spiral", "budget"],
    "additionalProperties": False,
}

_CONNECTION = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["Homoclinic", "Heteroclinic", "NotAConnection"]},
        "from": _NULLABLE_POINT,
        "to": _NULLABLE_POINT,
    },
    "required": ["kind", "from", "to"],
    "additionalProperties": False,
}

REPORT_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "holoflow analysis report",
    "type": "object",
    "properties": {
        "function": {"type": "string"},
        "region": {
            "type": "object",
            "properties": {"lo": _POINT, "hi": _POINT},
            "required": ["lo", "hi"],
            "additionalProperties": False,
        },
        "equilibria": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "location": _POINT,
                    "order": {"type": "integer", "minimum": 1},
                    "index": {"type": "integer"},
                    "kind": {"type": "string"},
                    "directions": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {
                                "theta": {"type": "number"},
                                "lambda": {"type": "number"},
                                "time_sign": {"enum": ["Forward", "Backward"]},
                            },
                            "required": ["theta", "lambda", "time_sign"],
                            "additionalProperties": False,
                        },
                    },
                },
                "required": ["location", "order", "index", "kind", "directions"],
                "additionalProperties": False,
            },
        },
        "orbits": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "seed": _POINT,
                    "alpha": _DESCRIPTOR,
                    "omega": _DESCRIPTOR,
                    "connection": _CONNECTION,
                    "bounded": {"type": "boolean"},
                },
                "required": ["seed", "alpha", "omega", "connection"],
                "additionalProperties": False,
            },
        },
        "fed_witnesses": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "equilibrium": _POINT,
                    "sector_count": {"type": "integer"},
                    "witness_radius": {"type": "number"},
                    "success": {"type": "boolean"},
                    "failed_sector": {"type": ["integer", "null"]},
                    "sectors": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {
                                "lower_direction": {"type": "number"},
                                "upper_direction": {"type": "number"},
                                "sample_seeds": {"type": "array", "items": _POINT},
                                "verdicts": {"type": "array", "items": _CONNECTION},
                            },
                            "required": ["lower_direction", "upper_direction", "sample_seeds", "verdicts"],
                            "additionalProperties": False,
                        },
                    },
                },
                "required": ["equilibrium", "sector_count", "witness_radius", "success",
                             "failed_sector", "sectors"],
                "additionalProperties": False,
            },
        },
        "pb_violations": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"seed": _POINT, "reason": {"type": "string"}},
                "required": ["seed", "reason"],
                "additionalProperties": False,
            },
        },
        "pb_hypothesis_satisfied": {"type": "boolean"},
        "config": {
            "type": "object",
            "properties": {
                "rel_tol": {"type": "number"},
                "abs_tol": {"type": "number"},
                "max_time": {"type": "number"},
                "escape_radius": {"type": "number"},
                "equilibrium_capture_radius": {"type": "number"},
                "min_step": {"type": "number"},
                "max_samples": {"type": "integer"},
                "escape_center": _POINT,
                "seeds": {"type": "string"},
            },
            "required": ["rel_tol", "abs_tol", "max_time", "escape_radius",
                         "equilibrium_capture_radius", "min_step", "max_samples"],
            "additionalProperties": False,
        },
        "version": {"type": "string"},
        "wall_time_ms": {"type": "number", "minimum": 0},
    },
    "required": ["function", "region", "equilibria", "orbits", "fed_witnesses",
                 "pb_violations", "config", "version", "wall_time_ms"],
    "additionalProperties": False,
}


def point(z: Optional[complex]) -> Optional[List[float]]:
    return None if z is None else [float(z.real), float(z.imag)]


def descriptor_record(descriptor: LimitDescriptor) -> Dict[str, Any]:
    eq = descriptor.equilibrium
    return {
        "kind": descriptor.kind.value,
        "equilibrium": point(eq.location) if eq is not None else None,
        "direction": descriptor.direction,
        "spiral": descriptor.spiral,
        "budget": descriptor.budget,
    }


def connection_record(connection: ConnectionType) -> Dict[str, Any]:
    return {
        "kind": connection.kind.value,
        "from": point(connection.source.location) if connection.source is not None else None,
        "to": point(connection.target.location) if connection.target is not None else None,
    }


def equilibrium_record(eq: Equilibrium, spectrum: Optional[DirectionSpectrum]) -> Dict[str, Any]:
    directions = [] if spectrum is None else [
        {"theta": d.theta, "lambda": d.lam, "time_sign": d.time_sign.value}
        for d in spectrum.directions
    ]
    return {
        "location": point(eq.location),
        "order": eq.order,
        "index": eq.index,
        "kind": eq.kind or "",
        "directions": directions,
    }


def witness_record(witness: FedWitness) -> Dict[str, Any]:
    return {
        "equilibrium": point(witness.equilibrium.location),
        "sector_count": witness.sector_count,
        "witness_radius": witness.witness_radius,
        "success": witness.success,
        "failed_sector": witness.failed_sector,
        "sectors": [
            {
                "lower_direction": sector.lower_direction,
                "upper_direction": sector.upper_direction,
                "sample_seeds": [point(s) for s in sector.sample_seeds],
                "verdicts": [connection_record(v) for v in sector.verdicts],
            }
            for sector in witness.sectors
        ],
    }


def config_record(config: IntegrationConfig, seeds: Optional[str] = None) -> Dict[str, Any]:
    record = {f.name: getattr(config, f.name) for f in fields(config)}
    record["escape_center"] = point(config.escape_center)
    if seeds is not None:
        record["seeds"] = seeds
    return record


@dataclass
class AnalysisReport:
    """Serializable result of one analysis run (plain JSON-ready data)"""

    function: str
    region: Dict[str, List[float]]
    equilibria: List[Dict[str, Any]] = field(default_factory=list)
    orbits: List[Dict[str, Any]] = field(default_factory=list)
    fed_witnesses: List[Dict[str, Any]] = field(default_factory=list)
    pb_violations: List[Dict[str, Any]] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    version: str = ""
    wall_time_ms: float = 0.0
    pb_hypothesis_satisfied: bool = True

    @classmethod
    def build(cls, function: str, region: Region, equilibria: Sequence[Equilibrium],
              spectra: Dict[complex, DirectionSpectrum], classifications: Sequence[OrbitClassification],
              witnesses: Sequence[FedWitness], pb: Optional[PbReport], config: IntegrationConfig,
              version: str, wall_time_ms: float = 0.0, seeds: Optional[str] = None) -> 'AnalysisReport':
        """Assemble a report from analysis results"""
        orbits = [
            {
                "seed": point(item.seed),
                "alpha": descriptor_record(item.verdict.alpha),
                "omega": descriptor_record(item.verdict.omega),
                "connection": connection_record(item.connection),
                "bounded": item.bounded,
            }
            for item in sorted(classifications, key=lambda c: (c.seed.real, c.seed.imag))
        ]
        return cls(
            function=function,
            region={"lo": point(region.lo), "hi": point(region.hi)},
            equilibria=[equilibrium_record(eq, spectra.get(eq.location)) for eq in equilibria],
            orbits=orbits,
            fed_witnesses=[witness_record(w) for w in witnesses],
            pb_violations=[] if pb is None else [
                {"seed": point(v.seed), "reason": v.reason} for v in pb.violations
            ],
            config=config_record(config, seeds),
            version=version,
            wall_time_ms=wall_time_ms,
            pb_hypothesis_satisfied=True if pb is None else pb.hypothesis_satisfied,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AnalysisReport':
        validate_report(data)
        return cls(**data)

    def to_json(self) -> str:
        """Report as JSON text (shortest round-trip floats, NaN rejected)"""
        data = self.to_dict()
        validate_report(data)
        return json.dumps(data, indent=2, allow_nan=False) + "\n"

    def write(self, path: Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def read(cls, path: Path) -> 'AnalysisReport':
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def validate_report(data: Dict[str, Any]) -> None:
    """Raise jsonschema.ValidationError if data does not follow REPORT_SCHEMA"""
    jsonschema.validate(instance=data, schema=REPORT_SCHEMA)
