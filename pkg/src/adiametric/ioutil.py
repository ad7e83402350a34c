"""Serialization helpers: complex-matrix JSON encoding and the CSV format.

Complex matrices travel as nested lists of ``[re, im]`` pairs.  CSV files
carry a schema-versioned first line and 17-significant-digit decimals so
that values round-trip exactly and outputs are byte-identical for
identical configurations.
"""

from __future__ import annotations

import json

import numpy as np

CSV_HEADER = "# adiametric-csv v1"


def matrix_to_json(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def json_to_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix JSON must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def format_float(x) -> str:
    return f"{float(x):.17g}"


def write_csv(stream, columns, rows) -> None:
    """Write the versioned CSV: header comment, column row, data rows."""
    stream.write(CSV_HEADER + "\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(format_float(x) for x in row) + "\n")


def dump_json(stream, payload) -> None:
    json.dump(payload, stream, indent=2, sort_keys=True)
    stream.write("\n")
