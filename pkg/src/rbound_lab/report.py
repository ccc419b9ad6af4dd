"""Canonical report serialization.

JSON output has sorted keys, no insignificant whitespace choices left to the encoder,
and every float written with 17 significant digits, so equal reports are equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

import numpy as np


def _canonical_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    # keep floats recognisable as floats after a parse round trip
    if all(c in "-0123456789" for c in text):
        text += ".0"
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ","
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _canonical_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = sep.join(f"{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in items)
        return "{" + pad + body + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ",".join(_encode(v, 0, 0) for v in obj) + "]" if _flat(obj) else \
            "[" + pad + sep.join(_encode(v, indent, level + 1) for v in obj) + end + "]"
    if hasattr(obj, "to_dict"):
        return _encode(obj.to_dict(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flat(seq) -> bool:
    """Numeric vectors and matrices are written on one line."""
    return all(isinstance(v, (int, float, np.integer, np.floating, bool, str, type(None))) or
               (isinstance(v, (list, tuple)) and _flat(v)) for v in seq)


def to_canonical_json(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def _table_rows(report: dict) -> list[dict]:
    results = report.get("results", report)
    if isinstance(results, dict) and isinstance(results.get("table"), list):
        return results["table"]
    flat = {}

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        elif isinstance(v, (int, float, str, bool, np.integer, np.floating)) or v is None:
            flat[prefix] = v

    walk("", results)
    return [flat]


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _canonical_float(float(v)).strip('"')
    if v is None:
        return ""
    return str(v)


def to_csv(report: dict) -> str:
    """One header row plus one row per table entry (or a single flattened row)."""
    rows = _table_rows(report)
    header: list[str] = []
    for r in rows:
        header += [k for k in r if k not in header]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(r.get(k)) for k in header])
    return buf.getvalue()


def emit_report(report: dict, fmt: str = "json") -> bytes:
    if fmt == "json":
        return to_canonical_json(report).encode()
    if fmt == "csv":
        return to_csv(report).encode()
    raise ValueError(f"unknown format {fmt!r}")
