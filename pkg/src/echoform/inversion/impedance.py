"""Boundary-condition classification and impedance recovery.

Without the boundary, the rotated-pair statistic L compares band sums of
|u| for two pairs sharing a reflecting plane; its leading-order value is
|(lam - c)(lam + 1) / ((lam + c)(lam - 1))| with c = xhat . xhat_j, which
is inverted in closed form.  With the boundary known, the band mean of the
phase-compensated backscatter gives lambda directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import BoundaryCurve, as_direction, reflection_point
from ..synthesis import FarFieldDataset
from .calibration import ConventionCalibration

__all__ = [
    "DegenerateDataError",
    "IllPosedError",
    "RecoveryError",
    "DN_LABEL",
    "IMPEDANCE_LABEL",
    "DIRICHLET_LIMIT",
    "NEUMANN_LIMIT",
    "closed_form_L",
    "L_statistic",
    "default_rule",
    "classify_bc",
    "lambda_candidates",
    "match_lambda",
    "lambda_with_boundary",
    "gamma_tilde",
    "DirectionEstimate",
    "ImpedanceEstimate",
    "estimate_impedance",
]

logger = logging.getLogger(__name__)

DN_LABEL = "dirichlet-or-neumann"
IMPEDANCE_LABEL = "impedance"
L_TOLERANCE = 0.05
DIRICHLET_LIMIT = 12.06
NEUMANN_LIMIT = 0.06
IMAG_TOLERANCE = 0.25


class DegenerateDataError(ValueError):
    pass


class IllPosedError(ValueError):
    pass


class RecoveryError(RuntimeError):
    pass


def closed_form_L(lam: float, c: float) -> float:
    """Leading-order value of L for impedance lam and c = xhat . xhat_j."""
    if math.isinf(lam):
        return 1.0
    return abs((lam - c) * (lam + 1) / ((lam + c) * (lam - 1)))


def L_statistic(data: FarFieldDataset, theta, alpha) -> float:
    """Rotated-pair statistic for base direction ``theta`` (index or vector) and rotation ``alpha``.

    The prefactor |xhat - theta|^{-1/2} (xhat . xhat) / (|xhat_j - theta_j|^{-1/2} xhat . xhat_j)
    multiplies the ratio of summed moduli, rotated pair over backscatter.
    """
    dirs = data.directions
    i = int(theta) if np.ndim(theta) == 0 else dirs.base_index(theta)
    j = dirs.rotation_index(alpha)
    inc, obs = dirs.incidences()[i], dirs.observations()[i]
    xhat, th = obs[0], inc[0]
    xj, thj = obs[j], inc[j]
    den = float(np.abs(data.values[i, 0]).sum())
    num = float(np.abs(data.values[i, j]).sum())
    if den == 0.0:
        raise DegenerateDataError(f"backscatter data vanish for direction {i}")
    pref = (np.linalg.norm(xhat - th) ** -0.5 * (xhat @ xhat)) / (np.linalg.norm(xj - thj) ** -0.5 * (xhat @ xj))
    return float(pref * num / den)


def default_rule(mode: str) -> str:
    """Column rule used when none is given.

    The convex test is strict over directions, so either rotation may pass
    it; the concave test only needs one direction, so both rotations must.
    """
    return "both" if mode == "concave" else "either"


def classify_bc(L_values, mode: str = "convex", rule: str | None = None, tol: float = L_TOLERANCE) -> str:
    """Dirichlet-or-Neumann versus impedance from an (l, 2) table of L values.

    ``convex``: a column passes when every |L - 1| < tol.  ``concave``: a
    column passes when its minimum |L - 1| < tol.  ``rule`` says whether
    ``either`` column, ``both`` columns, or only the ``first`` must pass;
    None picks :func:`default_rule` for the mode.
    """
    rule = rule or default_rule(mode)
    dev = np.abs(np.asarray(L_values, dtype=float).reshape(len(L_values), -1) - 1.0)
    if mode == "convex":
        ok = np.all(dev < tol, axis=0)
    elif mode == "concave":
        ok = np.min(dev, axis=0) < tol
    else:
        raise ValueError(f"unknown classification mode {mode!r}")
    if rule == "either":
        passed = bool(ok.any())
    elif rule == "both":
        passed = bool(ok.all())
    elif rule == "first":
        passed = bool(ok[0])
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return DN_LABEL if passed else IMPEDANCE_LABEL


def lambda_candidates(L: float, c: float) -> tuple[float, float]:
    """The two positive roots of |(lam - c)(lam + 1)/((lam + c)(lam - 1))| = L."""
    L, c = float(L), float(c)
    if not L > 0:
        raise ValueError("L must be positive")
    if L == 1.0:
        raise IllPosedError("L = 1 does not determine lambda")
    out = []
    for b in ((1 + L) / (1 - L) * (1 - c), (1 - L) / (1 + L) * (1 - c)):
        disc = b * b + 4 * c
        if disc < 0:
            raise IllPosedError(f"no real root for L={L:g}, c={c:g}")
        sq = math.sqrt(disc)
        # positive root of lam^2 + b lam - c; the product form avoids cancellation when b >> |c|
        root = 2 * c / (sq + b) if b > 0 else 0.5 * (sq - b)
        if not root > 0:
            raise IllPosedError(f"nonpositive root {root:g} for L={L:g}, c={c:g}")
        out.append(root)
    return out[0], out[1]


def match_lambda(cand1, cand2) -> tuple[float, tuple[int, int]]:
    """Average of the closest (relative distance) candidate pair; returns (value, (s, t)) 1-based."""
    best = None
    for s, a in enumerate(cand1, start=1):
        for t, b in enumerate(cand2, start=1):
            d = abs(a - b) / math.hypot(a, b)
            if best is None or d < best[0]:
                best = (d, 0.5 * (a + b), (s, t))
    return best[1], best[2]


def lambda_with_boundary(
    ks,
    values,
    curve: BoundaryCurve,
    xhat,
    cal: ConventionCalibration,
) -> float:
    """Impedance at the reflection point of (xhat, -xhat) from backscatter data and known geometry.

    H = sqrt(2 kappa) / (M + 1) * sum_m u_m e^{-s 2i k_m y+.xhat}, mapped to
    lambda by the calibrated Mobius relation.  Returns inf or 0 past the
    Dirichlet / Neumann limits.
    """
    xhat = as_direction(xhat)
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=complex)
    y, t = reflection_point(curve, xhat, -xhat, return_parameter=True)
    kappa = float(curve.curvature(t))
    if kappa <= 0:
        raise RecoveryError("reflection point is not strictly convex")
    h = math.sqrt(2 * kappa) * np.mean(values * np.exp(-cal.s * 2j * ks * (y @ xhat)))
    lam = complex(cal.to_lambda(h))
    if not np.isfinite(lam) or abs(lam) > DIRICHLET_LIMIT:
        return math.inf
    if abs(lam) < NEUMANN_LIMIT:
        return 0.0
    if lam.real <= 0 or abs(lam.imag) > IMAG_TOLERANCE * abs(lam):
        raise RecoveryError(f"recovered lambda {lam:.4g} is not a positive real")
    return float(lam.real)


def gamma_tilde(label: str, lam_tilde) -> np.ndarray:
    """(lam - 1)/(lam + 1) for impedance scatterers, 1 otherwise."""
    lam = np.asarray(lam_tilde, dtype=float)
    if label == DN_LABEL:
        return np.ones_like(lam)
    if np.any(lam <= 0):
        raise ValueError("matched lambda values must be positive")
    return (lam - 1) / (lam + 1)


@dataclass
class DirectionEstimate:
    beta: float  # angle of xhat = -theta
    L: tuple[float, float]
    candidates: tuple[tuple[float, float] | None, tuple[float, float] | None]
    lam: float | None
    pick: tuple[int, int] | None = None


@dataclass
class ImpedanceEstimate:
    rows: list[DirectionEstimate]
    label: str
    mode: str
    rule: str
    alphas: tuple
    gamma: np.ndarray = field(repr=False, default=None)

    @property
    def L_table(self) -> np.ndarray:
        return np.array([r.L for r in self.rows])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([np.nan if r.lam is None else r.lam for r in self.rows])

    def to_dict(self) -> dict:
        def num(v):
            return None if v is None or not np.isfinite(v) else float(v)

        return {
            "classification": self.label,
            "mode": self.mode,
            "rule": self.rule,
            "alphas": list(self.alphas),
            "directions": {
                f"{r.beta:.6f}": {
                    "L": [num(v) for v in r.L],
                    "candidates": [None if c is None else [num(v) for v in c] for c in r.candidates],
                    "lambda": num(r.lam),
                    "gamma": num(g),
                }
                for r, g in zip(self.rows, self.gamma)
            },
        }


def estimate_impedance(
    data: FarFieldDataset,
    mode: str = "convex",
    rule: str | None = None,
    tol: float = L_TOLERANCE,
) -> ImpedanceEstimate:
    """Steps 1 and 2 of the reconstruction: L table, classification, matched lambda, gamma."""
    rule = rule or default_rule(mode)
    dirs = data.directions
    if dirs.kind != "A2":
        raise DegenerateDataError("rotated-pair statistics need an A2 direction set")
    alphas = tuple(dirs.params["alphas"])
    obs = dirs.observations()
    table = np.array([[L_statistic(data, i, a) for a in alphas] for i in range(dirs.l)])
    label = classify_bc(table, mode=mode, rule=rule, tol=tol)
    rows = []
    for i in range(dirs.l):
        xhat = obs[i, 0]
        beta = math.atan2(xhat[1], xhat[0])
        cands = []
        for j in (1, 2):
            c = float(xhat @ obs[i, j])
            try:
                cands.append(lambda_candidates(table[i, j - 1], c))
            except IllPosedError:
                cands.append(None)
        lam, pick = None, None
        if label == IMPEDANCE_LABEL:
            if cands[0] is not None and cands[1] is not None:
                lam, pick = match_lambda(cands[0], cands[1])
            elif cands[0] is not None or cands[1] is not None:
                pair = cands[0] or cands[1]
                lam = pair[0]
        rows.append(DirectionEstimate(beta, (float(table[i, 0]), float(table[i, 1])), tuple(cands), lam, pick))
    est = ImpedanceEstimate(rows, label, mode, rule, alphas)
    if label == DN_LABEL:
        est.gamma = np.ones(dirs.l)
    else:
        lam = est.lambdas
        gam = np.full(dirs.l, np.nan)
        ok = np.isfinite(lam)
        gam[ok] = gamma_tilde(label, lam[ok])
        est.gamma = gam
    logger.info("classification %s (mode=%s, rule=%s)", label, mode, rule)
    return est
