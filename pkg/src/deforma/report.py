"""JSON reports: schema, validation and atomic writes."""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

__all__ = ["SCHEMA_VERSION", "REPORT_SCHEMA", "Check", "Report", "to_jsonable", "from_jsonable", "validate_report", "write_report", "read_report"]

SCHEMA_VERSION = 1

_NUM_OR_NULL = {"type": ["number", "null"]}

REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "inputs", "outputs", "wall_time_ms", "checks", "status", "error"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"type": "array", "items": {"type": "string"}},
        "inputs": {"type": "object"},
        "outputs": {"type": "object"},
        "wall_time_ms": {
            "oneOf": [
                {"type": "number", "minimum": 0},
                {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
            ]
        },
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "pass"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "pass": {"type": "boolean"},
                    "max_residual": _NUM_OR_NULL,
                    "tolerance": _NUM_OR_NULL,
                    "detail": {"type": "string"},
                },
            },
        },
        "status": {"enum": ["ok", "failed", "error"]},
        "error": {"type": ["string", "null"]},
    },
}


@dataclass
class Check:
    name: str
    passed: bool
    max_residual: float | None = None
    tolerance: float | None = None
    detail: str = ""

    @classmethod
    def residual(cls, name: str, residual: float, tolerance: float, detail: str = "") -> "Check":
        residual = float(residual)
        return cls(name, bool(residual <= tolerance), residual, float(tolerance), detail)

    def to_dict(self) -> dict:
        d = {"name": self.name, "pass": bool(self.passed)}
        d["max_residual"] = _clean(self.max_residual)
        d["tolerance"] = _clean(self.tolerance)
        if self.detail:
            d["detail"] = self.detail
        return d


def _float(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def from_jsonable(obj: Any) -> Any:
    """Inverse of :func:`to_jsonable` for the non-finite float markers."""
    if isinstance(obj, dict):
        return {k: from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [from_jsonable(v) for v in obj]
    if obj in _NONFINITE:
        return float(obj)
    return obj


_NONFINITE = ("inf", "-inf", "nan")


def _clean(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class Report:
    command: list[str]
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    wall_time_ms: float | dict = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return "ok" if self.passed else "failed"

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": list(self.command),
            "inputs": to_jsonable(self.inputs),
            "outputs": to_jsonable(self.outputs),
            "wall_time_ms": to_jsonable(self.wall_time_ms),
            "checks": [c.to_dict() for c in self.checks],
            "status": self.status,
            "error": self.error,
        }


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become ``"inf"``/``"-inf"``/``"nan"`` and complex numbers ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def validate_report(report: Report | dict) -> dict:
    """Plain-data form of ``report``; raises ``jsonschema.ValidationError`` if it breaks the schema."""
    data = report.to_dict() if isinstance(report, Report) else report
    jsonschema.validate(data, REPORT_SCHEMA)
    return data


def write_report(report: Report | dict, path: str | Path) -> dict:
    """Validate against the schema, then write atomically (temp file + rename)."""
    data = validate_report(report)
    text = json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return data


def read_report(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text())
    jsonschema.validate(data, REPORT_SCHEMA)
    return data
