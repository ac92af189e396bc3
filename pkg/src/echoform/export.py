"""File emitters: indicator grids (CSV, 16-bit PGM + JSON sidecar) and reports."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .inversion.indicators import GridSpec, IndicatorGrid

__all__ = ["write_grid_csv", "read_grid_csv", "write_pgm", "read_pgm", "write_json"]


def write_grid_csv(grid: IndicatorGrid, path) -> None:
    """Row-major values, first row at y_min; the header line carries the grid geometry."""
    s = grid.spec
    header = f"# x_min={s.x_min!r},x_max={s.x_max!r},y_min={s.y_min!r},y_max={s.y_max!r},h={s.h!r},name={grid.name}"
    body = "\n".join(",".join(f"{v:.10g}" for v in row) for row in grid.values)
    Path(path).write_text(header + "\n" + body + "\n")


def read_grid_csv(path) -> IndicatorGrid:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path}: missing grid header")
    meta = dict(item.split("=", 1) for item in lines[0][2:].split(","))
    spec = GridSpec(*(float(meta[k]) for k in ("x_min", "x_max", "y_min", "y_max", "h")))
    values = np.array([[float(v) for v in line.split(",")] for line in lines[1:] if line])
    return IndicatorGrid(spec, values, meta.get("name", ""))


def write_pgm(grid: IndicatorGrid, path) -> dict:
    """16-bit binary PGM, linear min-max scaling, top row = y_max.

    The scaling and orientation go to ``<path>.json`` so pixel values can be
    mapped back to indicator values.
    """
    v = grid.values
    lo, hi = float(np.min(v)), float(np.max(v))
    span = hi - lo if hi > lo else 1.0
    pix = np.rint((v - lo) / span * 65535).astype(">u2")[::-1]
    ny, nx = pix.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n65535\n".encode("ascii"))
        fh.write(pix.tobytes())
    s = grid.spec
    meta = {
        "name": grid.name,
        "width": nx,
        "height": ny,
        "min": lo,
        "max": hi,
        "maxval": 65535,
        "bounds": [s.x_min, s.x_max, s.y_min, s.y_max],
        "h": s.h,
        "top_row": "y_max",
    }
    write_json(meta, path.with_name(path.name + ".json"))
    return meta


def read_pgm(path) -> np.ndarray:
    """Pixel array (top row first) of a 16-bit P5 file."""
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None or int(m.group(3)) != 65535:
        raise ValueError(f"{path}: not a 16-bit P5 image")
    nx, ny = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data[m.end() : m.end() + 2 * nx * ny], dtype=">u2").reshape(ny, nx)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else ("inf" if f > 0 else "-inf" if f < 0 else None)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
