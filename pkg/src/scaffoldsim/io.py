"""CSV and manifest writers.

Floats are written with shortest-roundtrip repr, so identical runs
produce byte-identical files and every value survives a parse round
trip. Nothing time- or host-dependent is ever written.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .grid import ScaffoldGrid
from .params import STATE_FIELDS

TRAJECTORY_HEADER = "t," + ",".join(STATE_FIELDS)
SNAPSHOT_HEADER = "x_index,y_index,x_um,y_um,value"


def _fmt(v) -> str:
    return repr(float(v))


def write_state_series(path: str, t: np.ndarray, y: np.ndarray):
    """Time series of the five state components (trajectory or probe series)."""
    with open(path, "w", newline="\n") as f:
        f.write(TRAJECTORY_HEADER + "\n")
        for k in range(len(t)):
            f.write(",".join([_fmt(t[k])] + [_fmt(v) for v in y[k]]) + "\n")


def write_snapshot(path: str, grid: ScaffoldGrid, values: np.ndarray):
    """One field over the interior cells, row-major in (x_index, y_index)."""
    with open(path, "w", newline="\n") as f:
        f.write(SNAPSHOT_HEADER + "\n")
        for k in range(grid.n_cells):
            f.write(f"{grid.cell_i[k]},{grid.cell_j[k]},"
                    f"{_fmt(grid.cell_x[k])},{_fmt(grid.cell_y[k])},"
                    f"{_fmt(values[k])}\n")


def snapshot_filename(field: str, t: float) -> str:
    return f"snapshot_{field}_t{t:g}.csv"


def write_manifest(path: str, payload: dict):
    with open(path, "w", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)}")


def ensure_dir(path: str):
    os.makedirs(path, exist_ok=True)
