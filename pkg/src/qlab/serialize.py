"""JSON wire formats.

Matrix:   {"rows": n, "cols": m, "data": [[re, im], ...]} row-major; floats
          round-trip exactly through repr.
Channel:  {"kind": "kraus", "ops": [matrix, ...]} or
          {"kind": "superop", "matrix": matrix, "dims": [d_in, d_out],
           "convention": "column-stacking"}.
Function: {"name": "...", "params": [...]}.

Non-finite floats are encoded as the strings "Infinity" / "-Infinity" so
reports stay strict-JSON parseable.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .channels import Channel
from .errors import ValidationError
from .functions import SpectralFunction, make_function
from .linalg import as_matrix


def matrix_to_json(m) -> dict:
    mm = as_matrix(m)
    rows, cols = mm.shape
    data = [[float(mm[i, j].real), float(mm[i, j].imag)]
            for i in range(rows) for j in range(cols)]
    return {"rows": rows, "cols": cols, "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix JSON: {exc}") from exc
    if len(data) != rows * cols:
        raise ValidationError("matrix JSON entry count mismatch")
    out = np.empty((rows, cols), dtype=complex)
    for idx, pair in enumerate(data):
        i, j = divmod(idx, cols)
        out[i, j] = complex(float(pair[0]), float(pair[1]))
    return out


def channel_to_json(phi: Channel) -> dict:
    if phi.kraus is not None:
        return {"kind": "kraus", "ops": [matrix_to_json(v) for v in phi.kraus]}
    return {"kind": "superop", "matrix": matrix_to_json(phi.smat),
            "dims": [phi.dim_in, phi.dim_out],
            "convention": "column-stacking"}


def channel_from_json(obj: dict) -> Channel:
    kind = obj.get("kind")
    if kind == "kraus":
        return Channel.from_kraus([matrix_from_json(o) for o in obj["ops"]])
    if kind == "superop":
        if obj.get("convention", "column-stacking") != "column-stacking":
            raise ValidationError("unsupported vectorization convention")
        d_in, d_out = obj["dims"]
        return Channel.from_superop(matrix_from_json(obj["matrix"]),
                                    (int(d_in), int(d_out)))
    raise ValidationError(f"unknown channel kind {kind!r}")


def function_to_json(f: SpectralFunction) -> dict:
    return {"name": f.name, "params": list(f.params)}


def function_from_json(obj: dict) -> SpectralFunction:
    return make_function(obj["name"], *[float(p) for p in obj.get("params", [])])


def jsonable(x: Any) -> Any:
    """Recursively convert report values into strict-JSON-safe data."""
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return v
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, complex):
        return {"re": jsonable(x.real), "im": jsonable(x.imag)}
    if isinstance(x, np.ndarray):
        return matrix_to_json(x)
    return x


def dumps(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, repr floats."""
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)
