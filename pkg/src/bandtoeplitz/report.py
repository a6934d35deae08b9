"""Canonical JSON persistence for experiment reports.

Keys are sorted and every float is written with 17 significant digits, so a
report is a pure function of its content and reloads bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .errors import SchemaError

SCHEMA_VERSION = 1


@dataclass
class ExperimentReport:
    config: dict
    results: list = field(default_factory=list)
    references: dict = field(default_factory=dict)
    trend: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    complete: bool = True
    errors: list = field(default_factory=list)
    timing: dict | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def hard_failures(self):
        return [c for c in self.checks if c["hard"] and not c["passed"]]

    def summary_lines(self):
        for c in self.checks:
            status = "PASS" if c["passed"] else ("FAIL" if c["hard"] else "FLAG")
            yield f"{status} {c['name']}: {c['detail']}"


def _format_float(x):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = ",\n".join(f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in items)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, bool)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        body = ",\n".join(pad + _encode(v, indent, level + 1) for v in obj)
        return "[\n" + body + "\n" + end + "]"
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj, indent=1):
    return _encode(obj, indent, 0) + "\n"


def persist_report(report, path):
    text = dumps_canonical(asdict(report))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def report_from_dict(data):
    if not isinstance(data, dict):
        raise SchemaError("report root must be a JSON object")
    found = data.get("schema_version")
    if found != SCHEMA_VERSION:
        raise SchemaError(f"report schema version mismatch: expected {SCHEMA_VERSION}, found {found}")
    names = {f.name for f in fields(ExperimentReport)}
    unknown = set(data) - names
    if unknown or "config" not in data:
        raise SchemaError(f"report fields do not match the schema (unknown: {sorted(unknown)})")
    return ExperimentReport(**data)


def load_report(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read report ({exc})") from exc
    return report_from_dict(data)
