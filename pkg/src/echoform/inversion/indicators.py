"""Direct sampling indicators on rectangular grids.

For a backscattering direction xhat the per-direction sums depend on a
probe point z only through xhat . z, and e^{a (x1 x + x2 y)} separates
into a product of an x factor and a y factor.  Each per-direction field is
therefore one complex matrix product (ny x M) @ (M x nx), exact to rounding.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.ndimage import gaussian_filter, map_coordinates

from ..solver import C2
from ..synthesis import FarFieldDataset
from .calibration import ConventionCalibration

__all__ = [
    "IndicatorError",
    "GridSpec",
    "parse_grid",
    "IndicatorGrid",
    "projected_sum",
    "direct_sum",
    "bojarski_V",
    "indicator_I",
    "indicator_T",
    "SignTest",
    "dn_sign_test",
    "RidgeCloud",
    "ridge_extract",
]

logger = logging.getLogger(__name__)

SUP_FLOOR = 1e-14
GAMMA_FLOOR = 1e-3


class IndicatorError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -3.0
    x_max: float = 3.0
    y_min: float = -3.0
    y_max: float = 3.0
    h: float = 0.01

    def __post_init__(self):
        if not self.h > 0 or self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise IndicatorError("grid needs x_min < x_max, y_min < y_max and h > 0")
        for lo, hi in ((self.x_min, self.x_max), (self.y_min, self.y_max)):
            n = (hi - lo) / self.h
            if abs(n - round(n)) > 1e-9 * max(1.0, n):
                raise IndicatorError(f"extent {hi - lo:g} is not a multiple of h={self.h:g}")

    @property
    def shape(self) -> tuple[int, int]:
        """(ny, nx)."""
        ny = int(round((self.y_max - self.y_min) / self.h)) + 1
        nx = int(round((self.x_max - self.x_min) / self.h)) + 1
        return ny, nx

    @property
    def xs(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.shape[1])

    @property
    def ys(self) -> np.ndarray:
        return self.y_min + self.h * np.arange(self.shape[0])

    def points(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys)
        return np.stack([X, Y], axis=-1)


def parse_grid(text: str) -> GridSpec:
    """'xmin:xmax:ymin:ymax:h'."""
    try:
        vals = [float(v) for v in text.split(":")]
    except ValueError as exc:
        raise IndicatorError(f"bad grid {text!r}") from exc
    if len(vals) != 5:
        raise IndicatorError(f"bad grid {text!r}: expected xmin:xmax:ymin:ymax:h")
    return GridSpec(*vals)


@dataclass
class IndicatorGrid:
    """Real indicator values; ``values[i, j]`` sits at (xs[j], ys[i])."""

    spec: GridSpec
    values: np.ndarray
    name: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != self.spec.shape:
            raise IndicatorError(f"values {self.values.shape} do not match grid {self.spec.shape}")

    def sample(self, points) -> np.ndarray:
        """Bilinear interpolation at arbitrary points (nan outside the grid)."""
        f = RegularGridInterpolator(
            (self.spec.ys, self.spec.xs), self.values, bounds_error=False, fill_value=np.nan
        )
        pts = np.atleast_2d(points)
        return f(pts[:, ::-1])


def projected_sum(coeffs, ks, xhat, spec: GridSpec, sign: float) -> np.ndarray:
    """sum_m coeffs[m] e^{sign * 2i k_m xhat.z} on the grid, as an (ny, nx) array."""
    ks = np.asarray(ks, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    ex = np.exp(sign * 2j * np.outer(ks, spec.xs) * xhat[0])  # (M, nx)
    ey = np.exp(sign * 2j * np.outer(spec.ys, ks) * xhat[1])  # (ny, M)
    return (ey * coeffs) @ ex


def direct_sum(coeffs, ks, xhat, points, sign: float) -> np.ndarray:
    """Reference point-by-point evaluation of :func:`projected_sum`."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    proj = pts @ np.asarray(xhat, dtype=float)
    return np.exp(sign * 2j * np.outer(proj, ks)) @ np.asarray(coeffs, dtype=complex)


def bojarski_V(u_fwd: complex, u_opp: complex, k: float, gamma_fwd: float = 1.0, gamma_opp: float = 1.0) -> complex:
    """-[u(xhat,-xhat)/g(xhat) + i conj(u(-xhat,xhat))/g(-xhat)] / (2 C2 k^{3/2}).

    Approximates the Fourier transform of the obstacle's indicator at 2k xhat.
    """
    return -(u_fwd / gamma_fwd + 1j * np.conj(u_opp) / gamma_opp) / (2 * C2 * k**1.5)


def _antipode(data: FarFieldDataset) -> np.ndarray:
    l = data.directions.l
    if l % 2:
        raise IndicatorError("opposite directions need an even direction count")
    return (np.arange(l) + l // 2) % l


def indicator_I(
    data: FarFieldDataset,
    gamma,
    spec: GridSpec,
    cal: ConventionCalibration,
) -> IndicatorGrid:
    """Bojarski-type indicator; the stored grid is the real part.

    Per direction xhat = -theta_i the coefficient of e^{-s 2i k xhat.z} is
    -(u(xhat,-xhat)/g(xhat) + i conj(u(-xhat,xhat))/g(-xhat)) dk / (2 C2 k^{1/2}).
    """
    gamma = np.asarray(gamma, dtype=float)
    ks = data.ks
    opp = _antipode(data)
    obs = data.directions.observations()
    acc = np.zeros(spec.shape, dtype=complex)
    used = 0
    for i in range(data.directions.l):
        g_f, g_o = gamma[i], gamma[opp[i]]
        if not (np.isfinite(g_f) and np.isfinite(g_o)) or min(abs(g_f), abs(g_o)) < GAMMA_FLOOR:
            warnings.warn(f"direction {i}: gamma near zero, skipped", RuntimeWarning, stacklevel=2)
            continue
        u_f, u_o = data.values[i, 0], data.values[opp[i], 0]
        coeff = -(u_f / g_f + 1j * np.conj(u_o) / g_o) * data.grid.dk / (2 * C2 * np.sqrt(ks))
        acc += projected_sum(coeff, ks, obs[i, 0], spec, -cal.s)
        used += 1
    if used == 0:
        raise IndicatorError("every direction was skipped")
    acc /= data.directions.l
    re = float(np.linalg.norm(acc.real))
    diag = {"imag_ratio": float(np.linalg.norm(acc.imag) / re) if re > 0 else math.inf, "directions_used": used}
    return IndicatorGrid(spec, acc.real.copy(), "I", diag)


def indicator_T(data: FarFieldDataset, spec: GridSpec, cal: ConventionCalibration) -> IndicatorGrid:
    """Mean over directions of |T_xhat| / sup_grid |T_xhat|, T_xhat = sum_m u_m e^{-s 2i k_m xhat.z} k_m^{-1/2}."""
    ks = data.ks
    obs = data.directions.observations()
    acc = np.zeros(spec.shape)
    used = 0
    for i in range(data.directions.l):
        t = np.abs(projected_sum(data.values[i, 0] / np.sqrt(ks), ks, obs[i, 0], spec, -cal.s))
        sup = float(t.max())
        if sup < SUP_FLOOR:
            warnings.warn(f"direction {i}: indicator vanishes, skipped", RuntimeWarning, stacklevel=2)
            continue
        acc += t / sup
        used += 1
    if used == 0:
        raise IndicatorError("every direction was skipped; no indicator")
    return IndicatorGrid(spec, acc / data.directions.l, "T", {"directions_used": used})


@dataclass(frozen=True)
class SignTest:
    verdict: str
    outer: float
    inner: float


def dn_sign_test(grid: IndicatorGrid, points, normals, offset: float | None = None) -> SignTest:
    """Compare mean indicator values just outside and just inside the boundary estimate."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.size == 0:
        raise IndicatorError("empty boundary estimate")
    nrm = np.asarray(normals, dtype=float).reshape(-1, 2)
    d = 3 * grid.spec.h if offset is None else offset
    outer = np.nanmean(grid.sample(pts + d * nrm))
    inner = np.nanmean(grid.sample(pts - d * nrm))
    if outer < 0 < inner:
        verdict = "dirichlet"
    elif inner < 0 < outer:
        verdict = "neumann"
    else:
        verdict = "inconclusive"
    return SignTest(verdict, float(outer), float(inner))


@dataclass(frozen=True)
class RidgeCloud:
    points: np.ndarray
    normals: np.ndarray

    def __len__(self):
        return len(self.points)


def ridge_extract(
    grid: IndicatorGrid,
    quantile: float = 0.98,
    smooth: float = 1.0,
    background: float = 0.1,
) -> RidgeCloud:
    """Crest points of the indicator.

    The broad halo that tangent lines leave outside a convex obstacle is
    removed first by subtracting a Gaussian blur of width ``background``
    (grid units, not cells).  Cells whose contrast exceeds the ``quantile``
    threshold then survive non-maximum suppression across the ridge, whose
    direction is the Hessian eigenvector with the most negative eigenvalue of
    the lightly smoothed grid.  Normals point away from the centroid of the
    retained cloud.

    Parameters
    ----------
    grid : IndicatorGrid
    quantile : float
        Contrast quantile in (0, 1) used as the candidate threshold.
    smooth : float
        Gaussian width in cells for the Hessian and the suppression test.
    background : float
        Width of the subtracted blur; 0 disables background removal.
    """
    if not 0 < quantile < 1:
        raise IndicatorError("quantile must lie in (0, 1)")
    v = grid.values
    if not np.isfinite(v).all() or v.max() <= v.min():
        raise IndicatorError("flat grid: no ridge")
    f = gaussian_filter(v, smooth) if smooth > 0 else v
    contrast = v - gaussian_filter(v, max(background / grid.spec.h, 2.0)) if background > 0 else v - v.min()
    thr = max(float(np.quantile(contrast, quantile)), 0.0)
    gy, gx = np.gradient(f)
    hyy, hyx = np.gradient(gy)
    _, hxx = np.gradient(gx)
    # across-ridge direction: eigenvector of the most negative Hessian eigenvalue
    tr, det = hxx + hyy, hxx * hyy - hyx**2
    lam = tr / 2 - np.sqrt(np.maximum(tr**2 / 4 - det, 0.0))
    ex, ey = hyx, lam - hxx
    flip = np.hypot(ex, ey) < 1e-300
    ex, ey = np.where(flip, lam - hyy, ex), np.where(flip, hyx, ey)
    norm = np.hypot(ex, ey)
    norm[norm == 0] = 1.0
    ex, ey = ex / norm, ey / norm
    iy, ix = np.nonzero(contrast > thr)
    if iy.size == 0:
        raise IndicatorError("no cells above the threshold")
    fwd = map_coordinates(f, [iy + ey[iy, ix], ix + ex[iy, ix]], order=1, mode="nearest")
    bwd = map_coordinates(f, [iy - ey[iy, ix], ix - ex[iy, ix]], order=1, mode="nearest")
    keep = (f[iy, ix] >= fwd) & (f[iy, ix] >= bwd)
    iy, ix = iy[keep], ix[keep]
    if iy.size == 0:
        raise IndicatorError("non-maximum suppression removed every point")
    pts = np.stack([grid.spec.xs[ix], grid.spec.ys[iy]], axis=1)
    nrm = np.stack([ex[iy, ix], ey[iy, ix]], axis=1)
    centre = pts.mean(axis=0)
    nrm *= np.where(np.sum((pts - centre) * nrm, axis=1) < 0, -1.0, 1.0)[:, None]
    return RidgeCloud(pts, nrm)
