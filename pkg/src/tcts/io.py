"""Deterministic CSV/JSON emission with a fixed number of significant digits."""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = ["format_number", "dumps", "csv_table"]


def format_number(x: Any, digits: int) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0"
    return format(x, f".{digits}g")


def _encode(obj: Any, digits: int, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return format_number(obj, digits)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], digits, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), digits, indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, digits, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number, bool)) for v in obj):
            return "[" + ", ".join(format_number(v, digits) for v in obj) + "]"
        items = [pad + _encode(v, digits, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, digits: int = 17, indent: int = 2) -> str:
    """JSON text with every float written to ``digits`` significant digits."""
    return _encode(obj, digits, indent, 0) + "\n"


def csv_table(header: Sequence[str], rows: Iterable[Sequence[Any]], digits: int = 12) -> str:
    """Comma-delimited, LF-terminated, unquoted numeric table."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_number(v, digits) for v in row))
    return "\n".join(lines) + "\n"
