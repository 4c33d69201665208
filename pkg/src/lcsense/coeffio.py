"""Coefficient vector files: a dense CSV row or a sparse JSON list."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidArgument


def dumps_csv(coeffs) -> str:
    return ",".join(repr(float(v)) for v in np.asarray(coeffs, dtype=float)) + "\n"


def loads_csv(text: str) -> np.ndarray:
    rows = [r for r in text.splitlines() if r.strip()]
    if len(rows) != 1:
        raise InvalidArgument(f"expected one CSV row of coefficients, got {len(rows)}")
    return np.array([float(v) for v in rows[0].split(",")])


def dumps_json(coeffs) -> str:
    a = np.asarray(coeffs, dtype=float)
    return json.dumps([{"n": int(n), "a": float(a[n])} for n in np.flatnonzero(a)])


def loads_json(text: str, length: int | None = None) -> np.ndarray:
    """Parse the sparse form; `length` defaults to the highest index + 1."""
    entries = json.loads(text)
    if not isinstance(entries, list):
        raise InvalidArgument("sparse coefficient JSON must be a list of {n, a} objects")
    idx = [int(e["n"]) for e in entries]
    size = length if length is not None else (max(idx) + 1 if idx else 0)
    if idx and (min(idx) < 0 or max(idx) >= size):
        raise InvalidArgument(f"coefficient index out of range for length {size}")
    out = np.zeros(size)
    for e, n in zip(entries, idx):
        out[n] = float(e["a"])
    return out


def save(path, coeffs) -> None:
    path = Path(path)
    path.write_text(dumps_json(coeffs) if path.suffix == ".json" else dumps_csv(coeffs))


def load(path, length: int | None = None) -> np.ndarray:
    path = Path(path)
    text = path.read_text()
    return loads_json(text, length) if path.suffix == ".json" else loads_csv(text)
