"""Byte-stable text output: fixed-precision reals for CSV and JSON."""

from __future__ import annotations

import json
import math
from typing import Any


def csv_real(x: float) -> str:
    """Format a real with 10 significant digits."""
    if isinstance(x, bool):
        raise TypeError("bool is not a real")
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return _normalize(f"{x:.10g}")


def json_real(x: float) -> str:
    # 17 significant digits round-trip every double exactly.
    if not math.isfinite(x):
        raise ValueError(f"non-finite real {x!r} has no JSON encoding")
    return _normalize(f"{x:.17g}")


def _normalize(text: str) -> str:
    return "0" if text == "-0" else text


def dumps(obj: Any, indent: int = 2) -> str:
    """Serialize ``obj`` to JSON with insertion-ordered keys and 17-digit reals.

    Integers stay integers; floats always carry 17 significant digits.
    """
    return _dump(obj, indent, 0) + "\n"


def _dump(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return json_real(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _dump(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
