"""Phase-convention calibration against the disk oracle.

High-frequency formulas are written for a generic time convention.  Against
the far-field normalization used here they need three pieces of bookkeeping:

* ``s``: the sign in leading-order phases e^{s i k y.(xhat - theta)};
* ``rho``: a unit factor multiplying the leading term;
* ``mobius``: the map sending the band mean H to an impedance value.

All three are fitted once from exact disk data, so nothing downstream
depends on a hand-derived sign.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..geometry import Disk, reflection_point
from ..oracle import DiskSpec, disk_far_field_matrix

__all__ = [
    "CalibrationError",
    "MOBIUS_MAPS",
    "ConventionCalibration",
    "fit_calibration",
    "get_calibration",
    "ENV_VAR",
]

logger = logging.getLogger(__name__)

ENV_VAR = "ECHOFORM_CALIBRATION"

MOBIUS_MAPS = {
    "(1+H)/(1-H)": lambda h: (1 + h) / (1 - h),
    "(1-H)/(1+H)": lambda h: (1 - h) / (1 + h),
    "(H+1)/(H-1)": lambda h: (h + 1) / (h - 1),
    "(H-1)/(H+1)": lambda h: (h - 1) / (h + 1),
}
_UNIT_ROOTS = np.array([1, 1j, -1, -1j])


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConventionCalibration:
    s: int
    rho: complex
    mobius: str
    residual: float = 0.0

    def __post_init__(self):
        if self.s not in (1, -1):
            raise CalibrationError(f"phase sign must be +1 or -1, got {self.s}")
        if abs(abs(self.rho) - 1) > 1e-12:
            raise CalibrationError("rho must have unit modulus")
        if self.mobius not in MOBIUS_MAPS:
            raise CalibrationError(f"unknown Mobius map {self.mobius!r}")

    def to_lambda(self, h):
        return MOBIUS_MAPS[self.mobius](h)

    def to_json(self) -> str:
        d = asdict(self)
        d["rho"] = [self.rho.real, self.rho.imag]
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ConventionCalibration":
        d = json.loads(text)
        d["rho"] = complex(*d["rho"])
        return cls(**d)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "ConventionCalibration":
        return cls.from_json(Path(path).read_text())


def _leading_shape(curve, xhat, theta, ks, s):
    """Leading-term phase times |amplitude| for a Dirichlet disk (rho left out)."""
    yp = reflection_point(curve, xhat, theta)
    kappa = 1.0 / curve.radius
    diff = xhat - theta
    phi = -diff / np.linalg.norm(diff)
    refl = -np.linalg.norm(diff) ** -0.5 * (phi @ xhat)
    return np.exp(s * 1j * ks * (yp @ diff)) * kappa**-0.5 * refl


def fit_calibration(radius: float = 1.5) -> ConventionCalibration:
    """Fit (s, rho) from Dirichlet disk data, then the H -> lambda map from a lambda=2 disk."""
    curve = Disk(radius)
    ks = np.arange(60.0, 121.0, 2.0)
    pairs = [
        (np.array([-1.0, 0.0]), np.array([1.0, 0.0])),
        (np.array([-np.sqrt(0.5), -np.sqrt(0.5)]), np.array([np.sqrt(0.5), -np.sqrt(0.5)])),
    ]
    best = None
    for s in (1, -1):
        ratios = []
        for xhat, theta in pairs:
            u = np.array([disk_far_field_matrix(DiskSpec(radius), xhat, theta, k)[0, 0] for k in ks])
            ratios.append(u / _leading_shape(curve, xhat, theta, ks, s))
        ratios = np.concatenate(ratios)
        mean = ratios.mean()
        spread = float(np.abs(ratios - mean).max() / abs(mean))
        if best is None or spread < best[0]:
            best = (spread, s, mean)
    spread, s, mean = best
    rho = _UNIT_ROOTS[np.argmin(np.abs(_UNIT_ROOTS - mean / abs(mean)))]
    if abs(mean - rho) > 0.05:
        raise CalibrationError(f"leading-term ratio {mean:.4f} is not close to a unit root")
    logger.info("calibrated phase sign s=%+d, rho=%s (fit %.4f, spread %.2e)", s, rho, mean, spread)

    # impedance lambda = 2: which Mobius map turns H back into 2
    xhat = np.array([1.0, 0.0])
    band = np.arange(20.0, 50.05, 0.1)
    u = np.array([disk_far_field_matrix(DiskSpec(radius, bc="impedance", lam=2.0), xhat, -xhat, k)[0, 0] for k in band])
    yp = reflection_point(curve, xhat, -xhat)
    h = np.sqrt(2.0 / radius) * np.mean(u * np.exp(-s * 2j * band * (yp @ xhat)))
    scores = {name: abs(f(h) - 2.0) for name, f in MOBIUS_MAPS.items()}
    mobius = min(scores, key=scores.get)
    if scores[mobius] > 0.1:
        raise CalibrationError(f"no Mobius map reproduces lambda=2 (best {mobius}: {scores[mobius]:.3f})")
    return ConventionCalibration(int(s), complex(rho), mobius, residual=float(abs(mean - rho)))


@lru_cache(maxsize=1)
def _default() -> ConventionCalibration:
    return fit_calibration()


def get_calibration() -> ConventionCalibration:
    """Calibration from ``$ECHOFORM_CALIBRATION`` if set, else a fresh fit (cached)."""
    path = os.environ.get(ENV_VAR)
    if path:
        return ConventionCalibration.load(path)
    return _default()
