"""Configuration loading, report schema and CSV tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import jsonschema

from ..model import ModelConfig, SimReport, StatsTable

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "group": {"type": "string"},
        "K": {"type": "number", "exclusiveMinimum": 0},
        "R": {"type": "number", "exclusiveMinimum": 0},
        "n_steps": {"type": "integer", "minimum": 1},
        "replicas": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
        "mode": {"enum": ["quenched", "annealed"]},
        "statistics": {"type": "boolean"},
        "discard_outside": {"type": "boolean"},
    },
    "additionalProperties": False,
}

_NUM_LIST = {"type": "array", "items": {"type": "number"}}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["config", "group", "mode", "summary", "replicas"],
    "properties": {
        "config": CONFIG_SCHEMA,
        "group": {"type": "string"},
        "mode": {"enum": ["quenched", "annealed"]},
        "summary": {
            "type": "object",
            "required": ["replicas", "E_R_frequency", "F_R_frequency", "redraws", "mean_punctures"],
        },
        "replicas": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["replica", "holonomy", "simpler_product", "class_coord", "simpler_class_coord",
                             "n_punctures", "delta", "E_R", "F_R", "redraws", "word_length"],
                "properties": {
                    "replica": {"type": "integer", "minimum": 0},
                    "holonomy": _NUM_LIST,
                    "simpler_product": _NUM_LIST,
                    "class_coord": _NUM_LIST,
                    "simpler_class_coord": _NUM_LIST,
                    "n_punctures": {"type": "integer", "minimum": 0},
                    "delta": {"type": ["number", "null"]},
                    "E_R": {"type": "boolean"},
                    "F_R": {"type": "boolean"},
                    "redraws": {"type": "integer", "minimum": 0},
                    "word_length": {"type": "integer"},
                    "class_counts": {"type": ["object", "null"]},
                },
            },
        },
    },
}

WINDINGS_COLUMNS = ("puncture_id", "x", "y", "theta", "theta_half", "beta1", "beta2", "S2", "S5", "class")


def load_config(path: str | Path | None, **overrides) -> ModelConfig:
    """Read and validate a JSON config; keyword overrides that are not None win."""
    data = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
        jsonschema.validate(data, CONFIG_SCHEMA)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ModelConfig.from_dict(data)


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, REPORT_SCHEMA)


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n")


def write_windings_csv(path: Path, table: StatsTable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=WINDINGS_COLUMNS)
        w.writeheader()
        for row in table.rows():
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def holonomy_columns(dim: int) -> list[str]:
    return (["replica"] + [f"class_coord_{k}" for k in range(dim)]
            + [f"simpler_class_coord_{k}" for k in range(dim)] + ["E_R", "F_R"])


def write_holonomy_csv(path: Path, report: SimReport) -> None:
    cc = report.class_coords()
    sc = report.simpler_class_coords()
    dim = cc.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(holonomy_columns(dim))
        for i, r in enumerate(report.replicas):
            w.writerow([r.replica, *map(repr, map(float, cc[i])), *map(repr, map(float, sc[i])),
                        int(r.E_R), int(r.F_R)])


def write_samples_csv(path: Path, samples, prefix: str = "z") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"{prefix}{k}" for k in range(samples.shape[1])])
        for row in samples:
            w.writerow([repr(float(v)) for v in row])
