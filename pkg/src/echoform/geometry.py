"""Parametric boundary curves and the reflection geometry built on them.

Every curve is a closed, counterclockwise, 2*pi-periodic map t -> x(t) on
[-pi, pi).  Outward normals are nu(t) = (y'(t), -x'(t)) / |x'(t)| and the
signed curvature is (x'y'' - y'x'') / |x'|^3, positive on convex arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "GeometryError",
    "BoundaryCurve",
    "Disk",
    "Egg",
    "Kite",
    "Trigonometric",
    "HalfPlane",
    "as_direction",
    "parse_curve",
    "curve_point",
    "curve_normal",
    "curve_curvature",
    "reflect_normal",
    "gauss_preimage",
    "reflection_point",
    "illuminated",
]

GAUSS_GRID = 4096
SPEED_FLOOR = 1e-12


def _num(v: float) -> str:
    """Shortest text that parses back to the same float."""
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


class GeometryError(ValueError):
    """Raised for degenerate parametrizations or undefined reflection data."""


def wrap_parameter(t):
    """Map t into [-pi, pi)."""
    return (np.asarray(t, dtype=float) + np.pi) % (2 * np.pi) - np.pi


def as_direction(v) -> np.ndarray:
    """Return ``v`` as a unit 2-vector; angles (scalars) are accepted too."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return np.array([math.cos(float(arr)), math.sin(float(arr))])
    norm = float(np.hypot(arr[0], arr[1]))
    if norm == 0.0:
        raise GeometryError("zero vector is not a direction")
    return arr[:2] / norm


@dataclass(frozen=True)
class BoundaryCurve:
    """Base class; subclasses provide ``_local(t)`` returning (x, x', x'')."""

    shift: tuple[float, float] = field(default=(0.0, 0.0), kw_only=True)

    @property
    def name(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def _local(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def derivatives(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Position, first and second derivative; each of shape ``t.shape + (2,)``."""
        t = wrap_parameter(t)
        x, d1, d2 = self._local(t)
        x = x + np.asarray(self.shift, dtype=float)
        return x, d1, d2

    def point(self, t) -> np.ndarray:
        return self.derivatives(t)[0]

    def speed(self, t) -> np.ndarray:
        _, d1, _ = self.derivatives(t)
        return np.hypot(d1[..., 0], d1[..., 1])

    def normal(self, t) -> np.ndarray:
        _, d1, _ = self.derivatives(t)
        sp = np.hypot(d1[..., 0], d1[..., 1])
        if np.any(sp < SPEED_FLOOR):
            raise GeometryError("singular parametrization: |x'(t)| vanishes")
        return np.stack([d1[..., 1], -d1[..., 0]], axis=-1) / sp[..., None]

    def curvature(self, t) -> np.ndarray:
        _, d1, d2 = self.derivatives(t)
        sp = np.hypot(d1[..., 0], d1[..., 1])
        if np.any(sp < SPEED_FLOOR):
            raise GeometryError("singular parametrization: |x'(t)| vanishes")
        return (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / sp**3

    def translated(self, dx: float, dy: float) -> "BoundaryCurve":
        from dataclasses import replace

        return replace(self, shift=(self.shift[0] + dx, self.shift[1] + dy))

    def length(self, n: int = 2048) -> float:
        t = -np.pi + 2 * np.pi * np.arange(n) / n
        return float(np.sum(self.speed(t)) * 2 * np.pi / n)

    def signed_area(self, n: int = 2048) -> float:
        t = -np.pi + 2 * np.pi * np.arange(n) / n
        x, d1, _ = self.derivatives(t)
        return float(0.5 * np.sum(x[:, 0] * d1[:, 1] - x[:, 1] * d1[:, 0]) * 2 * np.pi / n)

    def descriptor(self) -> str:
        base = self.name
        if self.shift != (0.0, 0.0):
            base += f"@{_num(self.shift[0])},{_num(self.shift[1])}"
        return base


@dataclass(frozen=True)
class Disk(BoundaryCurve):
    radius: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("disk radius must be positive")

    @property
    def name(self) -> str:
        return f"disk:a={_num(self.radius)},cx={_num(self.center[0])},cy={_num(self.center[1])}"

    def _local(self, t):
        a = self.radius
        c, s = np.cos(t), np.sin(t)
        x = np.stack([self.center[0] + a * c, self.center[1] + a * s], axis=-1)
        d1 = np.stack([-a * s, a * c], axis=-1)
        d2 = np.stack([-a * c, -a * s], axis=-1)
        return x, d1, d2


@dataclass(frozen=True)
class Egg(BoundaryCurve):
    """(1.5 cos t, sin t / (1 + 0.2 cos t)); convex."""

    @property
    def name(self) -> str:
        return "egg"

    def _local(self, t):
        c, s = np.cos(t), np.sin(t)
        q = 1.0 + 0.2 * c
        x = np.stack([1.5 * c, s / q], axis=-1)
        d1 = np.stack([-1.5 * s, (c + 0.2) / q**2], axis=-1)
        d2 = np.stack([-1.5 * c, -s * (0.92 - 0.2 * c) / q**3], axis=-1)
        return x, d1, d2


@dataclass(frozen=True)
class Kite(BoundaryCurve):
    """(cos t + 0.65 cos 2t - 0.65, 1.5 sin t); nonconvex."""

    @property
    def name(self) -> str:
        return "kite"

    def _local(self, t):
        c, s = np.cos(t), np.sin(t)
        c2, s2 = np.cos(2 * t), np.sin(2 * t)
        x = np.stack([c + 0.65 * c2 - 0.65, 1.5 * s], axis=-1)
        d1 = np.stack([-s - 1.3 * s2, 1.5 * c], axis=-1)
        d2 = np.stack([-c - 2.6 * c2, -1.5 * s], axis=-1)
        return x, d1, d2


@dataclass(frozen=True)
class Trigonometric(BoundaryCurve):
    """Curve given by Fourier coefficient tables.

    ``xc[m]``/``yc[m]`` multiply cos(m t) for m = 0, 1, ...; ``xs[m]``/``ys[m]``
    multiply sin((m + 1) t).  Clockwise tables are reversed at construction.
    """

    xc: tuple[float, ...] = (0.0, 1.0)
    xs: tuple[float, ...] = ()
    yc: tuple[float, ...] = (0.0,)
    ys: tuple[float, ...] = (1.0,)
    reversed_: bool = field(default=False, repr=False)

    def __post_init__(self):
        if not self.reversed_ and self.signed_area() < 0:
            # t -> -t flips orientation: sin coefficients change sign
            object.__setattr__(self, "xs", tuple(-v for v in self.xs))
            object.__setattr__(self, "ys", tuple(-v for v in self.ys))
            object.__setattr__(self, "reversed_", True)

    @property
    def name(self) -> str:
        def fmt(v):
            return "/".join(_num(c) for c in v) or "0"

        return f"trig:xc={fmt(self.xc)},xs={fmt(self.xs)},yc={fmt(self.yc)},ys={fmt(self.ys)}"

    def _local(self, t):
        out = []
        for cos_c, sin_c in ((self.xc, self.xs), (self.yc, self.ys)):
            v = np.zeros_like(t)
            d1 = np.zeros_like(t)
            d2 = np.zeros_like(t)
            for m, a in enumerate(cos_c):
                v += a * np.cos(m * t)
                d1 += -m * a * np.sin(m * t)
                d2 += -(m**2) * a * np.cos(m * t)
            for j, b in enumerate(sin_c):
                m = j + 1
                v += b * np.sin(m * t)
                d1 += m * b * np.cos(m * t)
                d2 += -(m**2) * b * np.sin(m * t)
            out.append((v, d1, d2))
        (x, x1, x2), (y, y1, y2) = out
        return (np.stack([x, y], -1), np.stack([x1, y1], -1), np.stack([x2, y2], -1))


@dataclass(frozen=True)
class HalfPlane:
    """The open half-plane {z : z . normal > offset}."""

    normal: tuple[float, float]
    offset: float

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return z @ np.asarray(self.normal) > self.offset


def _parse_kv(body: str) -> dict[str, str]:
    out = {}
    for item in filter(None, body.split(",")):
        if "=" not in item:
            raise GeometryError(f"malformed curve parameter {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def parse_curve(text: str) -> BoundaryCurve:
    """Build a curve from a preset name.

    Accepted forms: ``egg``, ``kite``, ``disk:a=1.5,cx=0,cy=0`` and
    ``trig:xc=-0.65/1/0.65,ys=0/1.5``.  An optional ``@dx,dy`` suffix
    translates the curve.
    """
    text = text.strip()
    shift = (0.0, 0.0)
    if "@" in text:
        text, off = text.split("@", 1)
        try:
            dx, dy = (float(v) for v in off.split(","))
        except ValueError as exc:
            raise GeometryError(f"bad translation {off!r}") from exc
        shift = (dx, dy)
    kind, _, body = text.partition(":")
    kind = kind.lower()
    if kind == "egg":
        curve: BoundaryCurve = Egg()
    elif kind == "kite":
        curve = Kite()
    elif kind == "disk":
        kv = _parse_kv(body)
        try:
            curve = Disk(
                radius=float(kv.get("a", 1.0)),
                center=(float(kv.get("cx", 0.0)), float(kv.get("cy", 0.0))),
            )
        except ValueError as exc:
            raise GeometryError(str(exc)) from exc
    elif kind == "trig":
        kv = _parse_kv(body)

        def coeffs(key):
            raw = kv.get(key, "")
            return tuple(float(v) for v in raw.split("/") if v) if raw else ()

        curve = Trigonometric(xc=coeffs("xc"), xs=coeffs("xs"), yc=coeffs("yc"), ys=coeffs("ys"))
    else:
        raise GeometryError(f"unknown curve preset {kind!r}")
    if shift != (0.0, 0.0):
        curve = curve.translated(*shift)
    return curve


def curve_point(curve: BoundaryCurve, t: float) -> np.ndarray:
    return curve.point(float(t))


def curve_normal(curve: BoundaryCurve, t: float) -> np.ndarray:
    return curve.normal(float(t))


def curve_curvature(curve: BoundaryCurve, t: float) -> float:
    return float(curve.curvature(float(t)))


def reflect_normal(xhat, theta) -> np.ndarray:
    """Unit normal (theta - xhat)/|theta - xhat| of the reflecting plane."""
    xhat, theta = as_direction(xhat), as_direction(theta)
    diff = theta - xhat
    norm = float(np.hypot(diff[0], diff[1]))
    if norm < 1e-12:
        raise GeometryError("reflecting plane undefined for xhat == theta")
    return diff / norm


def gauss_preimage(curve: BoundaryCurve, target, grid: int = GAUSS_GRID) -> list[float]:
    """All parameters t in [-pi, pi) whose outward normal equals ``target``.

    Roots of the cross product nu(t) x target are bracketed on a uniform grid
    and refined with Brent's method; roots with nu . target < 0 are dropped.
    """
    target = as_direction(target)

    def cross(t):
        n = curve.normal(t)
        return n[..., 0] * target[1] - n[..., 1] * target[0]

    def dot(t):
        return curve.normal(t) @ target

    ts = -np.pi + 2 * np.pi * np.arange(grid + 1) / grid
    g = cross(ts)
    roots: list[float] = []
    for j in range(grid):
        a, b = ts[j], ts[j + 1]
        ga, gb = g[j], g[j + 1]
        if ga == 0.0:
            if dot(a) > 0:
                roots.append(float(a))
            continue
        if ga * gb < 0:
            r = brentq(cross, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            if dot(r) > 0:
                roots.append(float(r))
    out: list[float] = []
    for r in sorted(float(wrap_parameter(r)) for r in roots):
        if not out or abs(r - out[-1]) > 1e-9:
            out.append(r)
    if len(out) > 1 and abs(out[0] + 2 * np.pi - out[-1]) < 1e-9:
        out.pop()
    if not out:
        raise GeometryError("Gauss map preimage not found; grid too coarse")
    return out


def reflection_point(curve: BoundaryCurve, xhat, theta, return_parameter: bool = False):
    """Specular point y+ with nu(y+) = -phi(xhat, theta).

    Several preimages (nonconvex curves) are resolved by taking the one that
    minimizes y . phi.
    """
    phi = reflect_normal(xhat, theta)
    params = gauss_preimage(curve, -phi)
    pts = curve.point(np.asarray(params))
    best = int(np.argmin(pts @ phi))
    if return_parameter:
        return pts[best], params[best]
    return pts[best]


def illuminated(curve: BoundaryCurve, t, theta) -> bool | np.ndarray:
    """True where nu(t) . theta < 0 (lit side for incidence direction theta)."""
    theta = as_direction(theta)
    res = curve.normal(t) @ theta < 0
    return bool(res) if np.ndim(res) == 0 else res


def polygon_points(curve: BoundaryCurve, n: int) -> np.ndarray:
    t = -np.pi + 2 * np.pi * np.arange(n) / n
    return curve.point(t)


def parameters(n: int) -> np.ndarray:
    """Uniform nodes t_j = -pi + 2 pi j / n."""
    return -np.pi + 2 * np.pi * np.arange(n) / n

