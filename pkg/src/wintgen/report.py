"""Deterministic report documents and their table/JSON/CSV renderings.

A report is a plain dict::

    {"meta": {...}, "scenarios": [{"name": ..., "inputs": {...}, "results": [row, ...],
                                   "certificate": {...}?, ...}]}

where every row carries ``id, lhs, rhs, gap, equality, tol`` plus the
context columns ``n, m, ambient`` and an ``instance`` label.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

import numpy as np

from . import __version__

CSV_COLUMNS = ("id", "n", "m", "ambient", "lhs", "rhs", "gap", "equality")
FORMATS = ("table", "json", "csv")


def make_meta(command: str, **extra) -> dict:
    meta = {"tool": "wintgen", "version": __version__, "command": command}
    meta.update(extra)
    return meta


def result_row(result, n: int, m: int, ambient: str, instance: str = "") -> dict:
    row = {"id": str(result.inequality_id), "instance": instance, "n": n, "m": m, "ambient": ambient}
    row.update(result.as_dict())
    return row


# -- JSON ---------------------------------------------------------------------


def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    if all(ch in "-0123456789" for ch in s):
        s += ".0"
    return s


def _emit(obj: Any, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), indent, level, out)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, val) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(val, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            parts: list[str] = []
            for v in obj:
                _emit(v, indent, level + 1, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for k, val in enumerate(obj):
            out.append(pad)
            _emit(val, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits (exact round trip)."""
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


# -- CSV / table --------------------------------------------------------------


def _rows(report: dict):
    for sc in report.get("scenarios", []):
        for row in sc.get("results", []):
            yield sc, row


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for _, row in _rows(report):
        w.writerow([_cell(row.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _float(v)
    return "" if v is None else str(v)


def _short(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6e}"
    return "" if v is None else str(v)


def render_table(report: dict) -> str:
    lines = []
    meta = report.get("meta", {})
    lines.append(f"# wintgen {meta.get('version', '?')} {meta.get('command', '')}".rstrip())
    cols = ("id", "instance", "lhs", "rhs", "gap", "equality")
    for sc in report.get("scenarios", []):
        lines.append("")
        lines.append(f"== {sc.get('name', 'scenario')} ==")
        rows = [[_short(r.get(c)) for c in cols] for r in sc.get("results", [])]
        if rows:
            widths = [max(len(c), *(len(r[k]) for r in rows)) for k, c in enumerate(cols)]
            lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
            lines.append("  ".join("-" * w for w in widths))
            lines.extend("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows)
        for key in ("summary", "search", "certificate"):
            block = sc.get(key)
            if isinstance(block, dict):
                flat = ", ".join(f"{k}={_short(v)}" for k, v in block.items()
                                 if not isinstance(v, (list, dict)))
                lines.append(f"{key}: {flat}")
        if sc.get("offending") is not None:
            lines.append("offending instance: see JSON output")
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "table":
        return render_table(report)
    raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
