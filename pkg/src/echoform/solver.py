"""Nystrom boundary integral solver for sound-soft, sound-hard and impedance obstacles.

The scattered field is sought as a combined potential

    u^s = (DL - i eta SL) phi,     eta = k,

which leads to

    dirichlet :  (I/2 + K - i eta S) phi                = -u_in
    neumann   :  (T - i eta (K' - I/2)) phi             = -du_in/dnu
    impedance :  neumann operator + i k lam (dirichlet operator)
                                                        = -(du_in/dnu + i k lam u_in)

on the nodes t_j = -pi + pi j / n, j = 0..2n-1.  Logarithmic kernel parts are
integrated with trigonometric interpolation weights; the hypersingular
operator uses Maue's identity

    T phi = d/ds S(dphi/ds) + k^2 nu . S(nu phi)

with d/ds realized by the trigonometric differentiation matrix.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.special import j0, j1, y0, y1

from .geometry import BoundaryCurve
from .scatterer import ScattererSpec

__all__ = [
    "SolverError",
    "QuadratureTooCoarse",
    "SolverBreakdown",
    "required_nodes",
    "BoundaryOperators",
    "boundary_operators",
    "SolveRequest",
    "solve_far_field",
    "far_field_sweep",
    "po_far_field",
]

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329
POINTS_PER_WAVELENGTH = 10
NODE_FLOOR = 64
SWEEP_BUCKET = 64
C2 = -np.exp(0.25j * np.pi) / math.sqrt(2 * math.pi)


class SolverError(RuntimeError):
    pass


class QuadratureTooCoarse(SolverError, ValueError):
    pass


class SolverBreakdown(SolverError):
    pass


def required_nodes(curve: BoundaryCurve, k: float) -> int:
    """Smallest admissible even node count: 10 points per wavelength, at least 64."""
    n = math.ceil(POINTS_PER_WAVELENGTH * k * curve.length() / (2 * math.pi))
    n += n % 2
    return max(NODE_FLOOR, n)


@dataclass(frozen=True)
class _Nodes:
    """k-independent geometric data on 2n equispaced nodes."""

    t: np.ndarray
    x: np.ndarray
    d1: np.ndarray
    speed: np.ndarray
    nu: np.ndarray
    dist: np.ndarray
    diff: np.ndarray  # x_i - x_j
    logterm: np.ndarray  # ln(4 sin^2((t_i - t_j)/2)), zero diagonal
    weights: np.ndarray  # trigonometric log-quadrature weights R_ij
    dmat: np.ndarray  # trigonometric differentiation matrix
    dl_diag: np.ndarray  # limit of the double-layer kernel on the diagonal


@lru_cache(maxsize=4)
def _nodes(curve: BoundaryCurve, size: int) -> _Nodes:
    if size % 2 or size < 4:
        raise ValueError("node count must be an even integer >= 4")
    n = size // 2
    t = -np.pi + np.pi * np.arange(size) / n
    x, d1, d2 = curve.derivatives(t)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    nu = np.stack([d1[:, 1], -d1[:, 0]], axis=1) / speed[:, None]
    diff = x[:, None, :] - x[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, 1.0)

    q = np.arange(size)
    m = np.arange(1, n)
    ang = np.pi * q / n
    row = -(2 * np.pi / n) * (np.cos(np.outer(ang, m)) @ (1.0 / m)) - (np.pi / n**2) * np.cos(n * ang)
    idx = (q[:, None] - q[None, :]) % size
    weights = row[idx]

    dt = np.pi * (q[:, None] - q[None, :]) / n
    with np.errstate(divide="ignore"):
        logterm = np.log(4.0 * np.sin(dt / 2.0) ** 2)
    np.fill_diagonal(logterm, 0.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        dmat = 0.5 * (-1.0) ** idx / np.tan(dt / 2.0)
    np.fill_diagonal(dmat, 0.0)

    dl_diag = (d1[:, 1] * d2[:, 0] - d1[:, 0] * d2[:, 1]) / (4 * np.pi * speed**2)
    return _Nodes(t, x, d1, speed, nu, dist, diff, logterm, weights, dmat, dl_diag)


@dataclass
class BoundaryOperators:
    """Dense Nystrom matrices acting on nodal density values.

    ``S``, ``K`` (double layer), ``Kp`` (adjoint double layer) and ``T``
    (hypersingular, via Maue) all include the arc-length element.
    """

    S: np.ndarray
    K: np.ndarray
    Kp: np.ndarray
    T: np.ndarray
    nodes: _Nodes

    @property
    def size(self) -> int:
        return self.S.shape[0]


def _assemble(curve: BoundaryCurve, k: float, size: int, need_t: bool = True) -> BoundaryOperators:
    g = _nodes(curve, size)
    n = size // 2
    h = np.pi / n
    kr = k * g.dist
    J0, Y0 = j0(kr), y0(kr)
    J1, Y1 = j1(kr), y1(kr)
    eye = np.eye(size, dtype=bool)

    # single layer without arc-length element: A = (i/4) H0(k r)
    a1 = -J0 / (4 * np.pi)
    a = 0.25j * (J0 + 1j * Y0)
    a2 = a - a1 * g.logterm
    a2[eye] = 0.25j - EULER_GAMMA / (2 * np.pi) - np.log(k * g.speed / 2) / (2 * np.pi)
    a1[eye] = -1.0 / (4 * np.pi)
    single = g.weights * a1 + h * a2
    S = single * g.speed[None, :]

    # double layer: (ik/4) n_y.(x - y) H1(kr)/r with n_y unnormalized
    ny = g.nu * g.speed[:, None]
    proj = (g.diff[..., 0] * ny[None, :, 0] + g.diff[..., 1] * ny[None, :, 1]) / g.dist
    l1 = -(k / (4 * np.pi)) * proj * J1
    l2 = 0.25j * k * proj * (J1 + 1j * Y1) - l1 * g.logterm
    l1[eye] = 0.0
    l2[eye] = g.dl_diag
    K = g.weights * l1 + h * l2

    # adjoint: (ik/4) nu_x.(y - x) H1(kr)/r * |x'(tau)|
    projp = -(g.diff[..., 0] * g.nu[:, None, 0] + g.diff[..., 1] * g.nu[:, None, 1]) / g.dist
    projp = projp * g.speed[None, :]
    m1 = -(k / (4 * np.pi)) * projp * J1
    m2 = 0.25j * k * projp * (J1 + 1j * Y1) - m1 * g.logterm
    m1[eye] = 0.0
    m2[eye] = g.dl_diag
    Kp = g.weights * m1 + h * m2

    T = None
    if need_t:
        nn = g.nu @ ny.T  # nu_i . n_j
        curl = g.dmat @ single @ g.dmat / g.speed[:, None]
        T = curl + k**2 * (g.weights * (a1 * nn) + h * (a2 * nn))
    return BoundaryOperators(S=S, K=K, Kp=Kp, T=T, nodes=g)


def boundary_operators(curve: BoundaryCurve, k: float, size: int | None = None) -> BoundaryOperators:
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    size = _check_size(curve, k, size)
    return _assemble(curve, k, size)


def _check_size(curve: BoundaryCurve, k: float, size: int | None) -> int:
    need = required_nodes(curve, k)
    if size is None:
        return need
    if size % 2:
        raise QuadratureTooCoarse(f"node count must be even, got {size}")
    if size < need:
        raise QuadratureTooCoarse(f"{size} nodes below the required {need} at k={k:g}")
    return int(size)


@dataclass
class SolveRequest:
    spec: ScattererSpec
    k: float
    incident: np.ndarray
    observation: np.ndarray
    size: int | None = None

    def __post_init__(self):
        self.incident = np.atleast_2d(np.asarray(self.incident, dtype=float))
        self.observation = np.atleast_2d(np.asarray(self.observation, dtype=float))


def _system(spec: ScattererSpec, k: float, size: int):
    ops = _assemble(spec.curve, k, size, need_t=spec.bc != "dirichlet")
    g = ops.nodes
    eta = k
    half = 0.5 * np.eye(size)
    dir_op = half + ops.K - 1j * eta * ops.S
    if spec.bc == "dirichlet":
        return dir_op, g, None
    neu_op = ops.T - 1j * eta * (ops.Kp - half)
    if spec.bc == "neumann":
        return neu_op, g, None
    lam = np.broadcast_to(np.asarray(spec.profile(g.t), dtype=float), (size,))
    return neu_op + 1j * k * lam[:, None] * dir_op, g, lam


def _rhs(spec: ScattererSpec, k: float, g: _Nodes, lam, incident: np.ndarray) -> np.ndarray:
    uin = np.exp(1j * k * (g.x @ incident.T))
    if spec.bc == "dirichlet":
        return -uin
    dn = 1j * k * (g.nu @ incident.T) * uin
    if spec.bc == "neumann":
        return -dn
    return -(dn + 1j * k * lam[:, None] * uin)


def _far_field_operator(k: float, g: _Nodes, observation: np.ndarray) -> np.ndarray:
    eta = k
    gamma = np.exp(0.25j * np.pi) / math.sqrt(8 * math.pi * k)
    h = 2 * np.pi / g.t.size
    kern = (-1j * k * (observation @ g.nu.T) - 1j * eta) * np.exp(-1j * k * (observation @ g.x.T))
    return gamma * h * kern * g.speed[None, :]


def solve_far_field(req: SolveRequest) -> np.ndarray:
    """Far field u_inf(xhat, theta, k); rows follow observations, columns incidences."""
    if not req.k > 0:
        raise ValueError("wavenumber must be positive")
    size = _check_size(req.spec.curve, req.k, req.size)
    matrix, g, lam = _system(req.spec, req.k, size)
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            lu = lu_factor(matrix, check_finite=True)
        except (LinAlgWarning, np.linalg.LinAlgError, ValueError) as exc:
            raise SolverBreakdown(f"linear system singular at k={req.k:g}: {exc}") from exc
    dens = lu_solve(lu, _rhs(req.spec, req.k, g, lam, req.incident))
    if not np.isfinite(dens).all():
        raise SolverBreakdown(f"non-finite density at k={req.k:g}")
    return _far_field_operator(req.k, g, req.observation) @ dens


def far_field_sweep(
    spec: ScattererSpec,
    ks: Sequence[float],
    incident: np.ndarray,
    observation: np.ndarray,
    size: int | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Solve for every wavenumber; returns an array (len(ks), n_obs, n_inc).

    Without an explicit ``size`` the node count is the required count rounded
    up to a multiple of 64.  With ``threads > 1`` wavenumbers are distributed over a thread pool;
    each solve is independent, so the result does not depend on scheduling.
    """

    def one(k):
        n = size
        if n is None:
            # bucketed node counts let neighbouring wavenumbers share cached geometry
            n = -(-required_nodes(spec.curve, k) // SWEEP_BUCKET) * SWEEP_BUCKET
        try:
            return solve_far_field(SolveRequest(spec, float(k), incident, observation, n))
        except SolverError as exc:
            raise type(exc)(f"{exc} [scatterer {spec.descriptor()}]") from exc

    ks = [float(k) for k in ks]
    if threads <= 1:
        out = [one(k) for k in ks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, ks))
    return np.stack(out)


def po_far_field(spec: ScattererSpec, xhat, k: float, size: int | None = None) -> complex:
    """Kirchhoff (physical optics) backscatter approximation of u_inf(xhat, -xhat, k)."""
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    xhat = np.asarray(xhat, dtype=float)
    xhat = xhat / np.hypot(*xhat)
    curve = spec.curve
    size = size or max(4096, 16 * required_nodes(curve, 2 * k))
    t = -np.pi + 2 * np.pi * np.arange(size) / size
    x, d1, _ = curve.derivatives(t)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    nu = np.stack([d1[:, 1], -d1[:, 0]], axis=1) / speed[:, None]
    c = nu @ xhat
    lit = c > 0  # nu . theta < 0 with theta = -xhat
    if spec.bc == "dirichlet":
        refl = np.ones_like(c)
    elif spec.bc == "neumann":
        refl = -np.ones_like(c)
    else:
        lam = spec.profile(t)
        refl = (lam - c) / (lam + c)
    integrand = refl * (-2j * k * c) * np.exp(-2j * k * (x @ xhat)) * speed
    integral = np.sum(integrand[lit]) * 2 * np.pi / size
    return complex(C2 * k**-0.5 / 2 * integral)
