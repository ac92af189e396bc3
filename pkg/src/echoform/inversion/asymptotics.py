"""High-frequency leading term, band averaging and tangent-line detection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from ..geometry import BoundaryCurve, GeometryError, as_direction, reflect_normal, reflection_point
from .calibration import ConventionCalibration

__all__ = [
    "ConcavePointError",
    "NoDetection",
    "DegenerateHullError",
    "reflection_coefficient",
    "MajdaPrediction",
    "majda_prediction",
    "majda_leading",
    "band_average",
    "band_profile",
    "Detection",
    "detect_tangent",
    "HullPolygon",
    "hull_from_detections",
    "hausdorff_distance",
]

logger = logging.getLogger(__name__)

PEAK_TO_MEDIAN = 10.0
# leading amplitudes are O(1); a vanishing reflection coefficient leaves only O(1/k) residue
MIN_AMPLITUDE = 1e-2
HULL_BOX = 1e6


class ConcavePointError(GeometryError):
    pass


class NoDetection(RuntimeError):
    pass


class DegenerateHullError(ValueError):
    pass


def reflection_coefficient(lam: float, xhat, theta) -> float:
    """R = -|xhat - theta|^{-1/2} (phi.xhat) (lam + phi.xhat)/(lam - phi.xhat).

    ``lam = inf`` is the sound-soft limit and ``lam = 0`` the sound-hard one.
    """
    xhat, theta = as_direction(xhat), as_direction(theta)
    phi = reflect_normal(xhat, theta)
    c = float(phi @ xhat)
    if math.isinf(lam):
        ratio = 1.0
    else:
        ratio = (lam + c) / (lam - c)
    return -np.linalg.norm(xhat - theta) ** -0.5 * c * ratio


@dataclass(frozen=True)
class MajdaPrediction:
    y_plus: np.ndarray
    kappa: float
    coefficient: float
    xhat: np.ndarray
    theta: np.ndarray

    def leading(self, k, cal: ConventionCalibration):
        k = np.asarray(k, dtype=float)
        phase = np.exp(cal.s * 1j * k * (self.y_plus @ (self.xhat - self.theta)))
        return cal.rho * phase * self.kappa**-0.5 * self.coefficient


def majda_prediction(curve: BoundaryCurve, lam_at, xhat, theta) -> MajdaPrediction:
    """Leading-term data for a pair; ``lam_at`` maps the curve parameter to lambda."""
    xhat, theta = as_direction(xhat), as_direction(theta)
    y, t = reflection_point(curve, xhat, theta, return_parameter=True)
    kappa = float(curve.curvature(t))
    if kappa <= 0:
        raise ConcavePointError(f"curvature {kappa:.4g} <= 0 at the reflection point; asymptotics invalid")
    lam = lam_at(t) if callable(lam_at) else lam_at
    return MajdaPrediction(y, kappa, reflection_coefficient(float(lam), xhat, theta), xhat, theta)


def majda_leading(y_plus, kappa: float, lam: float, xhat, theta, k, cal: ConventionCalibration):
    """rho e^{s i k y+.(xhat - theta)} kappa^{-1/2} R^lam."""
    if not kappa > 0:
        raise ConcavePointError("leading term needs positive curvature")
    xhat, theta = as_direction(xhat), as_direction(theta)
    pred = MajdaPrediction(np.asarray(y_plus, dtype=float), float(kappa), reflection_coefficient(lam, xhat, theta), xhat, theta)
    return pred.leading(k, cal)


def _weights(ks: np.ndarray) -> np.ndarray:
    """Trapezoid weights normalized by the band width."""
    if ks.size < 2:
        raise ValueError("band averaging needs at least two samples")
    if np.any(np.diff(ks) <= 0):
        raise ValueError("wavenumbers must increase")
    w = np.zeros_like(ks)
    gaps = np.diff(ks)
    w[:-1] += gaps / 2
    w[1:] += gaps / 2
    return w / (ks[-1] - ks[0])


def band_profile(ks, values, ts) -> np.ndarray:
    """band_average evaluated on many shifts at once."""
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=complex)
    if values.shape != ks.shape:
        raise ValueError("values and wavenumbers differ in length")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return np.exp(-1j * np.outer(ts, ks)) @ (_weights(ks) * values)


def band_average(ks, values, t: float) -> complex:
    """(1/(K_hi - K_lo)) * integral of u(k) e^{-ikt} dk over the sampled band (trapezoid rule)."""
    return complex(band_profile(ks, values, [t])[0])


@dataclass(frozen=True)
class Detection:
    t: float
    amplitude: complex
    peak_ratio: float

    def half_plane(self, xhat, theta, cal: ConventionCalibration) -> tuple[np.ndarray, float]:
        """(phi, offset) such that the obstacle lies in {z : z.phi >= offset}."""
        xhat, theta = as_direction(xhat), as_direction(theta)
        return reflect_normal(xhat, theta), -cal.s * self.t / float(np.linalg.norm(xhat - theta))


def detect_tangent(
    ks,
    values,
    t_range: tuple[float, float] | None = None,
    t_step: float | None = None,
    diam_bound: float = 6.0,
    min_amplitude: float = MIN_AMPLITUDE,
) -> Detection:
    """Locate the peak of |band_average| over a shift grid.

    Defaults: step pi/(4 k_plus) and range [-2 diam_bound, 2 diam_bound].
    The grid maximum is refined by a three-point parabola.  Raises
    ``NoDetection`` when the peak is below ten times the median level or
    below ``min_amplitude`` in absolute terms.
    """
    ks = np.asarray(ks, dtype=float)
    kmax = float(ks.max())
    if t_step is None:
        t_step = math.pi / (4 * kmax)
    if t_step > math.pi / (2 * kmax) + 1e-15:
        raise ValueError(f"t_step {t_step:g} violates the band's Nyquist bound {math.pi / (2 * kmax):g}")
    lo, hi = t_range if t_range is not None else (-2 * diam_bound, 2 * diam_bound)
    ts = np.arange(lo, hi + 0.5 * t_step, t_step)
    mag = np.abs(band_profile(ks, values, ts))
    j = int(np.argmax(mag))
    median = float(np.median(mag))
    ratio = float(mag[j] / median) if median > 0 else (math.inf if mag[j] > 0 else 0.0)
    if not ratio >= PEAK_TO_MEDIAN:
        raise NoDetection(f"flat band response (peak/median = {ratio:.2f})")
    t_star = ts[j]
    if 0 < j < ts.size - 1:
        a, b, c = mag[j - 1], mag[j], mag[j + 1]
        denom = a - 2 * b + c
        if denom < 0:
            t_star += 0.5 * t_step * (a - c) / denom
    amp = band_average(ks, values, t_star)
    if abs(amp) < min_amplitude:
        raise NoDetection(f"peak amplitude {abs(amp):.3g} below {min_amplitude:g}")
    return Detection(float(t_star), amp, ratio)


@dataclass(frozen=True)
class HullPolygon:
    vertices: np.ndarray  # (n, 2), counterclockwise

    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def is_convex(self) -> bool:
        e = np.roll(self.vertices, -1, axis=0) - self.vertices
        cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        return bool(np.all(cross >= -1e-12) or np.all(cross <= 1e-12))

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(points)
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        rel = pts[:, None, :] - v[None, :, :]
        cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        return np.all(cross >= -tol, axis=1)

    def boundary_points(self, per_edge: int = 50) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        s = np.arange(per_edge)[:, None, None] / per_edge
        return (v[None] + s * (w - v)[None]).reshape(-1, 2)


def _clip(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of a convex polygon with z.normal >= offset."""
    if len(poly) == 0:
        return poly
    f = poly @ normal - offset
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = f[i], f[(i + 1) % n]
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0):
            out.append(p + (fp / (fp - fq)) * (q - p))
    return np.array(out).reshape(-1, 2)


def hull_from_detections(detections: Sequence[tuple[np.ndarray, float]]) -> HullPolygon:
    """Intersection of the half-planes {z : z.phi >= offset}.

    Normals must positively span the plane (largest angular gap below pi);
    otherwise the intersection is unbounded.
    """
    if len(detections) < 3:
        raise DegenerateHullError("at least three half-planes are needed")
    normals = np.array([as_direction(p) for p, _ in detections])
    ang = np.sort(np.arctan2(normals[:, 1], normals[:, 0]))
    gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
    if gaps.max() >= np.pi - 1e-12:
        raise DegenerateHullError("half-plane normals do not span the plane; intersection is unbounded")
    poly = HULL_BOX * np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    for phi, off in detections:
        poly = _clip(poly, as_direction(phi), float(off))
        if len(poly) < 3:
            raise DegenerateHullError("half-planes have an empty intersection")
    hull = HullPolygon(poly)
    if hull.area() <= 0:
        raise DegenerateHullError("half-planes have an empty intersection")
    return hull


def hausdorff_distance(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])
