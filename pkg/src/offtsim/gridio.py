"""Plain-text numeric grids: one row per line, whitespace-separated entries.

An entry is a real number or a ``re,im`` pair.  Writing always emits
``re,im`` with round-trip precision.
"""
from __future__ import annotations

import numpy as np

from .core import OfftError


def parse_grid(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        row = []
        for tok in line.split():
            parts = tok.split(",")
            try:
                if len(parts) == 1:
                    row.append(complex(float(parts[0]), 0.0))
                elif len(parts) == 2:
                    row.append(complex(float(parts[0]), float(parts[1])))
                else:
                    raise ValueError(tok)
            except ValueError:
                raise OfftError(f"line {lineno}: cannot parse entry {tok!r}") from None
        rows.append(row)
    if not rows:
        raise OfftError("grid is empty")
    if any(len(r) != len(rows[0]) for r in rows):
        raise OfftError("grid rows have unequal lengths")
    return np.array(rows, dtype=np.complex128)


def format_grid(values) -> str:
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim != 2:
        raise OfftError(f"grid must be 2-D, got shape {values.shape}")
    lines = [" ".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row) for row in values]
    return "\n".join(lines) + "\n"


def read_grid(path) -> np.ndarray:
    with open(path) as fh:
        return parse_grid(fh.read())


def write_grid(path, values):
    with open(path, "w") as fh:
        fh.write(format_grid(values))
