"""Run configuration and result records with canonical serialization.

Every float in emitted JSON is written with 17 significant digits (lossless
round-trip); keys are sorted; records are appended as JSON lines.  The
wall_time_s field is the only part of a record that may differ between
byte-identical reruns.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

RECORD_SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps_canonical(obj) -> str:
    """JSON text with sorted keys and 17-significant-digit floats."""
    buf = io.StringIO()
    _write(obj, buf)
    return buf.getvalue()


def _write(obj, buf) -> None:
    if obj is None or isinstance(obj, bool):
        buf.write(json.dumps(obj))
    elif isinstance(obj, int):
        buf.write(str(obj))
    elif isinstance(obj, float):
        buf.write(format_float(obj))
    elif isinstance(obj, complex):
        _write({"re": obj.real, "im": obj.imag}, buf)
    elif isinstance(obj, str):
        buf.write(json.dumps(obj))
    elif isinstance(obj, dict):
        buf.write("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                buf.write(",")
            buf.write(json.dumps(str(key)))
            buf.write(":")
            _write(obj[key], buf)
        buf.write("}")
    elif isinstance(obj, (list, tuple)):
        buf.write("[")
        for i, item in enumerate(obj):
            if i:
                buf.write(",")
            _write(item, buf)
        buf.write("]")
    else:
        try:
            import numpy as np

            if isinstance(obj, np.integer):
                buf.write(str(int(obj)))
                return
            if isinstance(obj, np.floating):
                buf.write(format_float(float(obj)))
                return
            if isinstance(obj, np.complexfloating):
                _write(complex(obj), buf)
                return
            if isinstance(obj, np.ndarray):
                _write(obj.tolist(), buf)
                return
        except ImportError:
            pass
        raise TypeError(f"cannot serialize {type(obj)!r}")


@dataclass
class RunConfig:
    """Per-invocation configuration; round-trips losslessly through JSON."""

    group_path: str
    command: str
    params: dict = field(default_factory=dict)
    cache_dir: str | None = None
    jobs: int = 1
    output_format: str = "json"

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.output_format not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        for key, val in self.params.items():
            if key.endswith("tol") and not (isinstance(val, (int, float)) and val > 0):
                raise ValueError(f"tolerance {key} must be positive, got {val!r}")

    def to_json(self) -> str:
        return dumps_canonical(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


@dataclass
class ResultRecord:
    """One appended output line: inputs echoed, outputs with their tails."""

    group_hash: str
    command: str
    inputs: dict
    outputs: dict
    wall_time_s: float
    schema_version: int = RECORD_SCHEMA_VERSION

    def to_json_line(self) -> str:
        doc = {
            "schema_version": self.schema_version,
            "group_hash": self.group_hash,
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_time_s": self.wall_time_s,
        }
        return dumps_canonical(doc)


def csv_lines(rows: list[dict], columns: list[str]) -> list[str]:
    """CSV with a frozen column order; floats in 17-digit form."""
    def cell(v):
        if isinstance(v, float):
            return format_float(v)
        return str(v)

    out = [",".join(columns)]
    for row in rows:
        out.append(",".join(cell(row.get(c, "")) for c in columns))
    return out
