"""JSON tuple files.

Format::

    {"p": 4, "q": 5, "mode": "float" | "rational", "matrices": [M_1, ..., M_p]}

Each ``M_a`` is a list of q rows (a flat row-major list of q*q entries is also
accepted on read). Rational entries are strings ``"a/b"``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import SkewTuple, check_range


class TupleFileError(ValueError):
    pass


def tuple_to_json(C: SkewTuple) -> dict:
    if C.mode == "rational":
        mats = [[[str(Fraction(x)) for x in row] for row in M] for M in C.mats]
    else:
        mats = [[[float(x) for x in row] for row in M] for M in C.mats]
    return {"p": C.p, "q": C.q, "mode": C.mode, "matrices": mats}


def _entry(x, mode: str):
    if mode == "rational":
        if isinstance(x, bool) or not isinstance(x, (str, int)):
            raise TupleFileError(f"rational entries must be strings 'a/b' or integers, got {x!r}")
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise TupleFileError(f"bad rational entry {x!r}") from exc
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise TupleFileError(f"float entries must be numbers, got {x!r}")
    return float(x)


def tuple_from_json(data: dict) -> SkewTuple:
    try:
        p, q, mode, mats = data["p"], data["q"], data.get("mode", "float"), data["matrices"]
    except (KeyError, TypeError) as exc:
        raise TupleFileError(f"missing field: {exc}") from exc
    if not isinstance(p, int) or not isinstance(q, int):
        raise TupleFileError("p and q must be integers")
    if mode not in ("float", "rational"):
        raise TupleFileError(f"unknown mode {mode!r}")
    check_range(p, q)
    if not isinstance(mats, list) or len(mats) != p:
        raise TupleFileError(f"expected {p} matrices")
    arr = np.empty((p, q, q), dtype=object if mode == "rational" else float)
    for a, M in enumerate(mats):
        if not isinstance(M, list):
            raise TupleFileError("matrix must be a list")
        if len(M) == q * q and all(not isinstance(x, list) for x in M):
            rows = [M[i * q:(i + 1) * q] for i in range(q)]
        else:
            rows = M
        if len(rows) != q or any(not isinstance(r, list) or len(r) != q for r in rows):
            raise TupleFileError(f"matrix {a} is not {q} x {q}")
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                arr[a, i, j] = _entry(x, mode)
    return SkewTuple(p, q, arr, mode)


def write_tuple(C: SkewTuple, path) -> None:
    Path(path).write_text(json.dumps(tuple_to_json(C), indent=1) + "\n")


def read_tuple(path) -> SkewTuple:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TupleFileError(f"malformed JSON in {path}: {exc}") from exc
    return tuple_from_json(data)
