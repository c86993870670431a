"""Deterministic text rendering shared by the CSV and JSON exporters.

Reals are rendered with 17 significant digits so exported files are
byte-identical across reruns and round-trip to the exact double.
"""
from __future__ import annotations

import json
import math
from typing import Any

__all__ = ["fmt_real", "dumps_json", "dump_json"]


def fmt_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot render non-finite real {x!r}")
    return format(float(x), ".17g")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """Serialize like :func:`json.dumps` but render floats via :func:`fmt_real`."""
    out: list[str] = []
    _write(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def dump_json(obj: Any, path_or_file) -> None:
    """Write :func:`dumps_json` output to a path or an open text stream."""
    if hasattr(path_or_file, "write"):
        path_or_file.write(dumps_json(obj))
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(dumps_json(obj))


def _write(obj: Any, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, int)) and not isinstance(obj, float):
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        out.append(fmt_real(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            out.append(pad + json.dumps(key) + ": ")
            _write(value, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(obj):
            out.append(pad)
            _write(value, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")
