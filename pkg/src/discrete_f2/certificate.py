"""Serializable verification records."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema

PRODUCER_VERSION = "discrete_f2 0.1.0"

CERTIFICATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["claim_id", "inputs", "witnesses", "status", "tolerances", "producer_version"],
    "properties": {
        "claim_id": {"type": "string", "minLength": 1},
        "inputs": {"type": "object"},
        "witnesses": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["description", "values"],
                "properties": {"description": {"type": "string"}},
            },
        },
        "status": {"enum": ["pass", "fail"]},
        "tolerances": {
            "type": "array",
            "items": {"type": "object", "required": ["name", "value"]},
        },
        "producer_version": {"type": "string"},
        "timestamp": {"type": "string"},
        "summary": {"type": "object"},
    },
}


def frac(value: Any) -> Any:
    """JSON-friendly form: fractions become ``"p/q"`` strings, recursively."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return frac(value.item())  # numpy scalars
    if isinstance(value, dict):
        return {str(k): frac(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [frac(v) for v in value]
    return value if isinstance(value, str) else str(value)


@dataclass
class Certificate:
    claim_id: str
    inputs: dict
    witnesses: list[dict]
    status: str
    tolerances: list[dict]
    producer_version: str = PRODUCER_VERSION
    timestamp: str = ""
    summary: dict = field(default_factory=dict)

    @classmethod
    def make(cls, claim_id: str, inputs: dict, witnesses: list[dict], passed: bool, tolerances: list[dict] | None = None, summary: dict | None = None) -> "Certificate":
        cert = cls(
            claim_id=claim_id,
            inputs=frac(inputs),
            witnesses=frac(witnesses),
            status="pass" if passed else "fail",
            tolerances=frac(tolerances or []),
            timestamp=datetime.now(timezone.utc).isoformat(),
            summary=frac(summary or {}),
        )
        if not passed and not cert.witnesses:
            raise ValueError("a failing certificate needs a witness")
        return cert

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "inputs": self.inputs,
            "witnesses": self.witnesses,
            "status": self.status,
            "tolerances": self.tolerances,
            "producer_version": self.producer_version,
            "timestamp": self.timestamp,
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def content(self) -> dict:
        """Everything except the timestamp."""
        d = self.to_dict()
        d.pop("timestamp")
        return d

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        validate(d)
        return cls(
            claim_id=d["claim_id"],
            inputs=d["inputs"],
            witnesses=d["witnesses"],
            status=d["status"],
            tolerances=d["tolerances"],
            producer_version=d["producer_version"],
            timestamp=d.get("timestamp", ""),
            summary=d.get("summary", {}),
        )

    @classmethod
    def read(cls, path: str | Path) -> "Certificate":
        return cls.from_dict(json.loads(Path(path).read_text()))


def validate(d: dict) -> None:
    """Raise ``jsonschema.ValidationError`` when ``d`` is not a certificate."""
    jsonschema.validate(d, CERTIFICATE_SCHEMA)
    if d["status"] == "fail" and not d["witnesses"]:
        raise jsonschema.ValidationError("failing certificate without witnesses")
