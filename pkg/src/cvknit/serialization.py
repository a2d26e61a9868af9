"""Deterministic JSON and CSV output.

JSON objects are written with sorted keys and floats with 17 significant
digits, so equal inputs give byte-identical files. CSV follows RFC 4180
(CRLF line endings, minimal quoting).
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InputError


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"cannot serialize non-finite float {x}")
    # shortest string that round-trips exactly
    return repr(x)


def _encode(o: Any, indent: int, level: int) -> str:
    if isinstance(o, np.generic):
        o = o.item()
    if isinstance(o, np.ndarray):
        o = o.tolist()
    if o is None:
        return "null"
    if isinstance(o, bool):
        return "true" if o else "false"
    if isinstance(o, int):
        return str(o)
    if isinstance(o, float):
        return format_float(o)
    if isinstance(o, complex):
        return _encode({"re": o.real, "im": o.imag}, indent, level)
    if isinstance(o, str):
        return json.dumps(o)
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = sorted((str(k), v) for k, v in o.items())
        body = sep.join(f"{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in items)
        return "{" + pad + body + end + "}"
    if isinstance(o, (list, tuple)):
        if not o:
            return "[]"
        if all(isinstance(v, (int, float, np.generic)) and not isinstance(v, bool) for v in o):
            return "[" + ", ".join(_encode(v, 0, 0) for v in o) + "]"
        return "[" + pad + sep.join(_encode(v, indent, level + 1) for v in o) + end + "]"
    raise InputError(f"cannot serialize object of type {type(o).__name__}")


def stable_dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with sorted keys, round-trip floats and a trailing newline."""
    return _encode(obj, indent, 0) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise InputError("CSV row length does not match header")
        w.writerow(["" if v is None else format_float(v) if isinstance(v, (float, np.floating))
                    else v for v in row])
    return buf.getvalue()


def dataclass_rows(items, fields: Sequence[str]) -> list[list[Any]]:
    return [[getattr(it, f) for f in fields] for it in items]
