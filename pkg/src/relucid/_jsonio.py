"""Deterministic JSON writer with round-trip-exact float formatting."""

import json
import math

import numpy as np


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    text = format(x, ".17g")
    # keep floats recognisable as floats after parsing
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def _encode(obj, indent, level, out):
    pad = " " * (indent * (level + 1)) if indent else ""
    sep = ("\n" if indent else "")
    close_pad = " " * (indent * level) if indent else ""
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + sep)
        for i, (key, value) in enumerate(obj.items()):
            out.append(pad + json.dumps(str(key)) + ": ")
            _encode(value, indent, level + 1, out)
            out.append(("," if i < len(obj) - 1 else "") + sep)
        out.append(close_pad + "}")
    elif isinstance(obj, (list, tuple)):
        flat = all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj)
        if flat or not indent:
            out.append("[")
            for i, value in enumerate(obj):
                if i:
                    out.append(", ")
                _encode(value, 0, 0, out)
            out.append("]")
            return
        out.append("[" + sep)
        for i, value in enumerate(obj):
            out.append(pad)
            _encode(value, indent, level + 1, out)
            out.append(("," if i < len(obj) - 1 else "") + sep)
        out.append(close_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Serialize ``obj``; floats carry 17 significant digits, keys keep insertion order."""
    out: list[str] = []
    _encode(obj, indent, 0, out)
    return "".join(out) + "\n"
