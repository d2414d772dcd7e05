"""CSV ingestion and export of data matrices (rows are observations)."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class CsvFormatError(ValueError):
    """Malformed input file; the message names the offending line."""


@dataclass(frozen=True)
class CsvSpec:
    path: str
    has_header: bool = False
    delimiter: str = ","
    transpose: bool = False

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError(f"delimiter must be a single character, got {self.delimiter!r}")


def load_group(spec: CsvSpec) -> np.ndarray:
    """Read one group's ``n x p`` matrix.

    With ``transpose=True`` the file is read as variables-by-observations
    (typical for gene-expression tables) and transposed.
    """
    rows = []
    width = None
    with open(spec.path, newline="") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        for lineno, record in enumerate(reader, start=1):
            if lineno == 1 and spec.has_header:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise CsvFormatError(f"{spec.path}: line {lineno} has {len(record)} fields, expected {width}")
            values = []
            for col, cell in enumerate(record, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"{spec.path}: line {lineno}, column {col}: cannot parse {cell.strip()!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise CsvFormatError(f"{spec.path}: line {lineno}, column {col}: non-finite value {cell.strip()!r}")
                values.append(v)
            rows.append(values)
    if not rows:
        raise CsvFormatError(f"{spec.path}: no data rows")
    data = np.array(rows, dtype=np.float64)
    return np.ascontiguousarray(data.T if spec.transpose else data)


def write_matrix(path, x, delimiter: str = ",") -> None:
    """Write ``x`` with 17 significant digits so that reloading is exact."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        for row in x:
            fh.write(delimiter.join(f"{v:.17g}" for v in row) + "\n")
