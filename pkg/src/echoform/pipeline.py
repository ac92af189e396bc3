"""End-to-end reconstruction: statistics, classification, indicator, sign test."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import BoundaryCurve, parameters
from .inversion.asymptotics import NoDetection, DegenerateHullError, HullPolygon, detect_tangent, hull_from_detections
from .inversion.calibration import ConventionCalibration, get_calibration
from .inversion.impedance import DN_LABEL, ImpedanceEstimate, estimate_impedance
from .inversion.indicators import (
    GridSpec,
    IndicatorGrid,
    RidgeCloud,
    SignTest,
    dn_sign_test,
    indicator_I,
    indicator_T,
    ridge_extract,
)
from .synthesis import FarFieldDataset

__all__ = ["PipelineConfig", "PipelineResult", "tangent_hull", "run_pipeline"]

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    indicator: str = "I"
    mode: str = "convex"
    rule: str | None = None  # None: mode default
    ridge_quantile: float = 0.98
    diam_bound: float = 6.0
    boundary: BoundaryCurve | None = None  # known geometry for the sign test


@dataclass
class PipelineResult:
    classification: str
    estimate: ImpedanceEstimate | None
    grid: IndicatorGrid
    hull: HullPolygon | None
    sign: SignTest | None
    ridge: RidgeCloud | None
    report: dict


def tangent_hull(data: FarFieldDataset, cal: ConventionCalibration, diam_bound: float = 6.0) -> tuple[HullPolygon, int]:
    """A1-hull from backscatter tangent detections; returns (hull, number of detections)."""
    obs = data.directions.observations()
    inc = data.directions.incidences()
    planes = []
    for i in range(data.directions.l):
        try:
            det = detect_tangent(data.ks, data.values[i, 0], diam_bound=diam_bound)
        except NoDetection as exc:
            logger.debug("direction %d: %s", i, exc)
            continue
        planes.append(det.half_plane(obs[i, 0], inc[i, 0], cal))
    return hull_from_detections(planes), len(planes)


def _hull_boundary(hull: HullPolygon, per_edge: int = 8) -> tuple[np.ndarray, np.ndarray]:
    v = hull.vertices
    e = np.roll(v, -1, axis=0) - v
    keep = np.hypot(e[:, 0], e[:, 1]) > 1e-9
    v, e = v[keep], e[keep]
    s = (np.arange(per_edge) + 0.5) / per_edge
    pts = (v[None] + s[:, None, None] * e[None]).reshape(-1, 2)
    nrm = np.stack([e[:, 1], -e[:, 0]], axis=1) / np.hypot(e[:, 0], e[:, 1])[:, None]
    return pts, np.broadcast_to(nrm[None], (per_edge,) + nrm.shape).reshape(-1, 2)


def run_pipeline(
    data: FarFieldDataset,
    config: PipelineConfig | None = None,
    cal: ConventionCalibration | None = None,
) -> PipelineResult:
    """Run the four reconstruction steps on a dataset.

    Steps 1-2 (L table, classification, lambda, gamma) need an A2 set.
    Step 3 builds the I grid, or the T grid with ``indicator="T"``.
    Step 4 (sign test) runs on the I grid along a boundary estimate: the
    known curve if given, else the tangent-line hull.
    """
    config = config or PipelineConfig()
    cal = cal or get_calibration()
    report: dict = {"dataset": data.manifest(), "calibration": {"s": cal.s, "rho": [cal.rho.real, cal.rho.imag], "mobius": cal.mobius}}

    estimate = None
    if data.directions.kind == "A2":
        estimate = estimate_impedance(data, mode=config.mode, rule=config.rule)
        report["impedance"] = estimate.to_dict()
        label = estimate.label
    else:
        label = None
        report["impedance"] = None

    hull, sign, ridge = None, None, None
    try:
        hull, ndet = tangent_hull(data, cal, config.diam_bound)
        report["hull"] = {"vertices": hull.vertices, "detections": ndet, "area": hull.area()}
    except DegenerateHullError as exc:
        logger.warning("tangent hull unavailable: %s", exc)
        report["hull"] = None

    if config.indicator == "T":
        grid = indicator_T(data, config.grid, cal)
        ridge = ridge_extract(grid, config.ridge_quantile)
        report["ridge_points"] = len(ridge)
    elif config.indicator == "I":
        if estimate is None:
            warnings.warn("no rotated pairs: gamma taken as 1 for every direction", RuntimeWarning, stacklevel=2)
            gamma = np.ones(data.directions.l)
        else:
            gamma = estimate.gamma
        grid = indicator_I(data, gamma, config.grid, cal)
        if config.boundary is not None:
            t = parameters(512)
            pts, nrm = config.boundary.point(t), config.boundary.normal(t)
            source = "known"
        elif hull is not None:
            pts, nrm = _hull_boundary(hull)
            source = "tangent-hull"
        else:
            ridge = ridge_extract(indicator_T(data, config.grid, cal), config.ridge_quantile)
            pts, nrm = ridge.points, ridge.normals
            source = "T-ridge"
        sign = dn_sign_test(grid, pts, nrm)
        report["sign_test"] = {"verdict": sign.verdict, "outer": sign.outer, "inner": sign.inner, "boundary": source}
    else:
        raise ValueError(f"unknown indicator {config.indicator!r}")
    report["indicator"] = {"name": grid.name, **grid.diagnostics}

    if label is None:
        final = sign.verdict if sign is not None and sign.verdict != "inconclusive" else "unknown"
    elif label == DN_LABEL:
        final = sign.verdict if sign is not None and sign.verdict != "inconclusive" else DN_LABEL
    else:
        final = label
    report["classification"] = final
    logger.info("pipeline classification: %s", final)
    return PipelineResult(final, estimate, grid, hull, sign, ridge, report)
