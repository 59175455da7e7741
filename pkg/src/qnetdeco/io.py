"""Text formats: 12-significant-digit floats, ``re+imi`` matrix cells, JSON reports."""

from __future__ import annotations

import ast
import csv
import io
import json
import math
import operator
from enum import Enum
from typing import Any

import numpy as np

SIG = 12


def fmt_float(x: float) -> str:
    return f"{float(x):.{SIG}g}"


def fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.{SIG}g}{z.imag:+.{SIG}g}i"


def matrix_dump(m) -> list[list[str]]:
    """Row-major list of ``re+imi`` cell strings."""
    return [[fmt_complex(c) for c in row] for row in np.asarray(m)]


def parse_complex(v) -> complex:
    """Accept a number, ``[re, im]`` pair, or a string like ``"0.5-1e-3i"``."""
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(float(re), float(im))
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    return complex(v)


def matrix_load(rows) -> np.ndarray:
    return np.array([[parse_complex(c) for c in row] for row in rows], dtype=complex)


def matrix_csv(m) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(matrix_dump(m))
    return buf.getvalue()


def read_matrix_csv(text: str) -> np.ndarray:
    return matrix_load(list(csv.reader(io.StringIO(text))))


def _round(x: float) -> float | str:
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(fmt_float(x))


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars/enums/tuples to JSON types, floats to 12 digits."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def parse_angle(v) -> float:
    """A number, or an arithmetic string over numbers and ``pi`` (e.g. ``"2*pi/3"``)."""
    if not isinstance(v, str):
        return float(v)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            x = ev(node.operand)
            return -x if isinstance(node.op, ast.USub) else x
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported angle expression {v!r}")

    return ev(ast.parse(v, mode="eval"))
