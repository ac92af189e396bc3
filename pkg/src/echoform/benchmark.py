"""Published far-field values for the radius-1.5 disk with d = (1, 0).

Each entry: (label, bc, lambda or None, k, xhat, theta, value).  Forward
entries have xhat = theta = d, backscatter entries xhat = -d, theta = d.
"""

from __future__ import annotations

import numpy as np

from .geometry import Disk
from .oracle import DiskSpec, disk_far_field
from .scatterer import make_scatterer
from .solver import SolveRequest, solve_far_field

__all__ = ["DISK_RADIUS", "DISK_BENCHMARK", "TOLERANCE", "benchmark_rows"]

DISK_RADIUS = 1.5
TOLERANCE = 2e-3

_D = (1.0, 0.0)
_B = (-1.0, 0.0)
_CASES = [
    ("neumann", None, "lambda=0"),
    ("impedance", 0.06, "lambda=0.06"),
    ("impedance", 12.06, "lambda=12.06"),
    ("dirichlet", None, "lambda=inf"),
]
_VALUES = {
    (20, "forward"): [-3.3288 + 3.8856j, -3.5254 + 3.9288j, -4.3081 + 3.6514j, -4.3184 + 3.6405j],
    (20, "backward"): [-0.8189 + 0.2814j, -0.7255 + 0.2493j, 0.7007 - 0.2172j, 0.8278 - 0.2555j],
    (50, "forward"): [-5.5900 + 6.0797j, -5.8112 + 6.1183j, -6.4356 + 5.8676j, -6.4422 + 5.8608j],
    (50, "backward"): [0.6111 + 0.6135j, 0.5418 + 0.5442j, -0.5109 - 0.5262j, -0.6030 - 0.6217j],
}

DISK_BENCHMARK = [
    (f"{label} k={k} {way}", bc, lam, float(k), _D if way == "forward" else _B, _D, vals[i])
    for (k, way), vals in _VALUES.items()
    for i, (bc, lam, label) in enumerate(_CASES)
]


def benchmark_rows(nodes: int | None = None) -> list[dict]:
    """Oracle and solver values next to the published ones, with per-component differences."""
    rows = []
    for label, bc, lam, k, xhat, theta, ref in DISK_BENCHMARK:
        oracle = disk_far_field(DiskSpec(DISK_RADIUS, bc=bc, lam=lam), xhat, theta, k)
        spec = make_scatterer(Disk(DISK_RADIUS).descriptor(), bc, lam)
        solver = complex(solve_far_field(SolveRequest(spec, k, np.array([theta]), np.array([xhat]), nodes))[0, 0])
        for source, val in (("oracle", oracle), ("solver", solver)):
            diff = max(abs(val.real - ref.real), abs(val.imag - ref.imag))
            rows.append({"case": label, "source": source, "value": val, "reference": ref, "diff": diff})
    return rows
