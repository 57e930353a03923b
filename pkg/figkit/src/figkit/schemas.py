"""CSV schemas of the simulation outputs and a validating loader.

The plotting layer never recomputes model quantities; it consumes
exactly the documented column sets and fails loudly when a column is
missing or a file is empty.
"""

from __future__ import annotations

import csv

import numpy as np

STATE_COLUMNS = ("t", "c1", "c2", "chi", "h", "tau")
SNAPSHOT_COLUMNS = ("x_index", "y_index", "x_um", "y_um", "value")
RATES_COLUMNS = ("S", "alpha1_S", "alpha2_S", "chi", "alpha1_chi", "alpha2_chi")


class SchemaError(ValueError):
    """Input file does not match the documented CSV schema."""


def load_columns(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read a headered CSV and return the required columns as float arrays."""
    try:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file, expected columns {required}")
            header = [h.strip() for h in header]
            for col in required:
                if col not in header:
                    raise SchemaError(f"{path}: missing column {col!r} "
                                      f"(found {header})")
            idx = [header.index(col) for col in required]
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    rows.append([float(row[i]) for i in idx])
                except (ValueError, IndexError):
                    raise SchemaError(f"{path}: bad row at line {lineno}")
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.array(rows, dtype=float)
    return {col: arr[:, k] for k, col in enumerate(required)}
