"""Direction configurations, multi-frequency far-field datasets and noise.

A dataset stores one complex value per (base direction, rotation, wavenumber),
laid out as an array of shape ``(l, n_rotations, M + 1)``.  The flat record
view enumerates it in exactly that order, which is also the order used for
noise draws and for the on-disk CSV rows.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .geometry import Disk
from .oracle import DiskSpec, disk_far_field_matrix
from .scatterer import ScattererSpec
from .solver import far_field_sweep

__all__ = [
    "DatasetError",
    "DatasetParseError",
    "DatasetIntegrityError",
    "rotation",
    "q_matrix",
    "r_matrix",
    "DirectionPairSet",
    "build_direction_set",
    "parse_direction_set",
    "FrequencyGrid",
    "parse_band",
    "FarFieldDataset",
    "synthesize",
    "add_noise",
    "save_dataset",
    "load_dataset",
]

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
CSV_HEADER = "theta_x,theta_y,obs_x,obs_y,k,re,im"
MATCH_TOL = 1e-9


class DatasetError(ValueError):
    pass


class DatasetParseError(DatasetError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DatasetIntegrityError(DatasetError):
    pass


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def q_matrix(alpha: float) -> np.ndarray:
    """Q_alpha = [[-cos a, sin a], [-sin a, -cos a]] with a = alpha*pi/16."""
    a = alpha * math.pi / 16
    return np.array([[-math.cos(a), math.sin(a)], [-math.sin(a), -math.cos(a)]])


def r_matrix(alpha: float) -> np.ndarray:
    """R_alpha: rotation by -alpha*pi/32."""
    return rotation(-alpha * math.pi / 32)


@dataclass(frozen=True)
class DirectionPairSet:
    """Base directions plus the (Q, R) transforms generating each subset.

    Subset ``r`` pairs base direction ``theta`` with incidence ``R_r theta``
    and observation ``Q_r R_r theta``.  Subset 0 is always the pure
    backscattering set for A2.
    """

    kind: str
    base: np.ndarray  # (l, 2)
    q: tuple  # per-rotation 2x2 arrays
    r: tuple
    labels: tuple[str, ...]
    params: dict = field(default_factory=dict)

    @property
    def l(self) -> int:
        return self.base.shape[0]

    @property
    def n_rotations(self) -> int:
        return len(self.q)

    def incidences(self) -> np.ndarray:
        """(l, n_rot, 2) incident directions."""
        return np.stack([self.base @ r.T for r in self.r], axis=1)

    def observations(self) -> np.ndarray:
        inc = self.incidences()
        return np.stack([inc[:, j] @ q.T for j, q in enumerate(self.q)], axis=1)

    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Flat (xhat, theta) list in (direction, rotation) order."""
        inc, obs = self.incidences(), self.observations()
        return [(obs[i, j], inc[i, j]) for i in range(self.l) for j in range(self.n_rotations)]

    def descriptor(self) -> str:
        if self.kind == "A1":
            return f"A1:l={self.l}:angle={self.params['angle']!r}"
        a1, a2 = self.params["alphas"]
        return f"A2:l={self.l}:alphas={a1:g},{a2:g}"

    def rotation_index(self, alpha) -> int:
        """Subset index for a rotation parameter (A2) ; 0 means backscattering."""
        if self.kind != "A2":
            raise KeyError("rotation parameters exist only for A2 sets")
        alphas = self.params["alphas"]
        for j, a in enumerate(alphas, start=1):
            if a == alpha:
                return j
        raise KeyError(f"alpha={alpha} is not part of this set {alphas}")

    def base_index(self, theta) -> int:
        theta = np.asarray(theta, dtype=float)
        d = np.abs(self.base - theta).max(axis=1)
        i = int(np.argmin(d))
        if d[i] > MATCH_TOL:
            raise KeyError(f"direction {theta} is not a base direction")
        return i


def _base_directions(l: int) -> np.ndarray:
    ang = 2 * np.pi * np.arange(l) / l
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def build_direction_set(l: int, config: str = "A2", angle: float = math.pi, alphas=(8, 10)) -> DirectionPairSet:
    """Build A1 (one fixed rotation, default -I) or A2 (backscatter plus two Q/R subsets)."""
    if not isinstance(l, (int, np.integer)) or l < 4:
        raise DatasetError(f"direction count must be an integer >= 4, got {l!r}")
    base = _base_directions(int(l))
    if config == "A1":
        q = rotation(angle)
        if abs(angle - math.pi) < 1e-15:
            q = -np.eye(2)
        return DirectionPairSet("A1", base, (q,), (np.eye(2),), ("backscatter",), {"angle": float(angle)})
    if config != "A2":
        raise DatasetError(f"unknown direction configuration {config!r}")
    alphas = tuple(float(a) if not float(a).is_integer() else int(a) for a in alphas)
    if len(alphas) != 2:
        raise DatasetError("A2 needs exactly two rotation parameters")
    for a in alphas:
        # R_alpha permutes the base set only if alpha*pi/32 is a multiple of 2*pi/l
        steps = a * l / 64
        if abs(steps - round(steps)) > 1e-12:
            raise DatasetError(f"l={l} is not closed under R_{a:g}; use l divisible by 64")
    qs = (-np.eye(2),) + tuple(q_matrix(a) for a in alphas)
    rs = (np.eye(2),) + tuple(r_matrix(a) for a in alphas)
    labels = ("backscatter",) + tuple(f"alpha={a:g}" for a in alphas)
    return DirectionPairSet("A2", base, qs, rs, labels, {"alphas": alphas})


def parse_direction_set(text: str) -> DirectionPairSet:
    parts = text.split(":")
    kind = parts[0]
    try:
        opts = dict(p.split("=", 1) for p in parts[1:])
        l = int(opts["l"])
        if kind == "A1":
            return build_direction_set(l, "A1", angle=float(opts.get("angle", math.pi)))
        alphas = [float(a) for a in opts.get("alphas", "8,10").split(",")]
        return build_direction_set(l, "A2", alphas=alphas)
    except (KeyError, ValueError) as exc:
        raise DatasetError(f"bad direction descriptor {text!r}: {exc}") from exc


@dataclass(frozen=True)
class FrequencyGrid:
    k_minus: float
    k_plus: float
    dk: float = 0.1

    def __post_init__(self):
        if not (0 < self.k_minus < self.k_plus):
            raise DatasetError(f"need 0 < k_minus < k_plus, got {self.k_minus}, {self.k_plus}")
        if not self.dk > 0:
            raise DatasetError("dk must be positive")
        steps = (self.k_plus - self.k_minus) / self.dk
        if abs(steps - round(steps)) > 1e-6 or round(steps) < 1:
            raise DatasetError(f"band width {self.k_plus - self.k_minus:g} is not a multiple of dk={self.dk:g}")

    @property
    def M(self) -> int:
        return int(round((self.k_plus - self.k_minus) / self.dk))

    @property
    def ks(self) -> np.ndarray:
        return self.k_minus + self.dk * np.arange(self.M + 1)

    def __len__(self):
        return self.M + 1


def parse_band(text: str) -> FrequencyGrid:
    """'a:b' or 'a:b:dk'."""
    try:
        vals = [float(v) for v in text.split(":")]
    except ValueError as exc:
        raise DatasetError(f"bad band {text!r}") from exc
    if len(vals) not in (2, 3):
        raise DatasetError(f"bad band {text!r}: expected k_minus:k_plus[:dk]")
    return FrequencyGrid(*vals)


@dataclass
class FarFieldDataset:
    """Far-field samples on a direction set and frequency grid."""

    scatterer: str
    directions: DirectionPairSet
    grid: FrequencyGrid
    values: np.ndarray  # (l, n_rot, M+1) complex
    delta: float = 0.0
    seed: int | None = None
    engine: str = "bie"

    def __post_init__(self):
        want = (self.directions.l, self.directions.n_rotations, len(self.grid))
        if self.values.shape != want:
            raise DatasetIntegrityError(f"value array {self.values.shape} does not match {want}")

    @property
    def count(self) -> int:
        return self.values.size

    @property
    def ks(self) -> np.ndarray:
        return self.grid.ks

    def manifest(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "scatterer": self.scatterer,
            "directions": self.directions.descriptor(),
            "k_minus": self.grid.k_minus,
            "k_plus": self.grid.k_plus,
            "dk": self.grid.dk,
            "delta": self.delta,
            "seed": self.seed,
            "count": self.count,
            "engine": self.engine,
            "generator": f"echoform {__version__}",
        }

    def series(self, direction: int, rotation: int = 0) -> np.ndarray:
        return self.values[direction, rotation]

    def lookup(self, xhat, theta) -> np.ndarray:
        """Values over the band for an explicit (xhat, theta) pair."""
        inc, obs = self.directions.incidences(), self.directions.observations()
        d = np.maximum(np.abs(inc - np.asarray(theta)).max(axis=-1), np.abs(obs - np.asarray(xhat)).max(axis=-1))
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] > MATCH_TOL:
            raise KeyError(f"pair ({xhat}, {theta}) not in dataset")
        return self.values[i, j]

    def backscatter(self, xhat) -> np.ndarray:
        """u(xhat, -xhat, k) over the band."""
        xhat = np.asarray(xhat, dtype=float)
        return self.lookup(xhat, -xhat)

    def records(self):
        """Yield (theta, xhat, k, value) in canonical order."""
        inc, obs, ks = self.directions.incidences(), self.directions.observations(), self.ks
        for i in range(self.directions.l):
            for j in range(self.directions.n_rotations):
                for m, k in enumerate(ks):
                    yield inc[i, j], obs[i, j], k, self.values[i, j, m]

    def select_rotations(self, rotations: Sequence[int]) -> "FarFieldDataset":
        """Restrict to some subsets; used to turn an A2 dataset into its A1 part."""
        d = self.directions
        sub = DirectionPairSet(
            "A1" if list(rotations) == [0] else d.kind,
            d.base,
            tuple(d.q[j] for j in rotations),
            tuple(d.r[j] for j in rotations),
            tuple(d.labels[j] for j in rotations),
            {"angle": math.pi} if list(rotations) == [0] else dict(d.params),
        )
        return replace(self, directions=sub, values=self.values[:, list(rotations)].copy())


def _unique_directions(dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicate directions (rows) up to 1e-9; returns (unique, inverse index)."""
    key = np.round(dirs / MATCH_TOL).astype(np.int64)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    return dirs[first], inverse.reshape(-1)


def synthesize(
    spec: ScattererSpec,
    pairs: DirectionPairSet,
    grid: FrequencyGrid,
    engine: str = "bie",
    threads: int = 1,
) -> FarFieldDataset:
    """Noise-free far-field data for every pair and wavenumber.

    Each wavenumber needs one factorization that serves every distinct
    incident direction; values for all distinct observation directions are
    then extracted.  ``engine="oracle"`` uses the separation-of-variables
    series and is only available for disks with constant coefficients.
    """
    inc = pairs.incidences().reshape(-1, 2)
    obs = pairs.observations().reshape(-1, 2)
    uinc, iinc = _unique_directions(inc)
    uobs, iobs = _unique_directions(obs)
    ks = grid.ks
    logger.info(
        "synthesizing %s: %d incidences x %d observations x %d wavenumbers (%s)",
        spec.descriptor(), len(uinc), len(uobs), len(ks), engine,
    )
    if engine == "bie":
        full = far_field_sweep(spec, ks, uinc, uobs, threads=threads)
    elif engine == "oracle":
        full = np.stack([disk_far_field_matrix(_disk_spec(spec), uobs, uinc, k) for k in ks])
    else:
        raise DatasetError(f"unknown engine {engine!r}")
    flat = full[:, iobs, iinc]  # (nk, l*n_rot)
    values = flat.T.reshape(pairs.l, pairs.n_rotations, len(ks))
    return FarFieldDataset(spec.descriptor(), pairs, grid, values, engine=engine)


def _disk_spec(spec: ScattererSpec) -> DiskSpec:
    if not isinstance(spec.curve, Disk):
        raise DatasetError("the oracle engine handles disks only")
    lam = None
    if spec.bc == "impedance":
        if not spec.profile.is_constant:
            raise DatasetError("the oracle engine needs a constant impedance")
        lam = float(spec.profile.node.value)
    c = spec.curve
    center = (c.center[0] + c.shift[0], c.center[1] + c.shift[1])
    return DiskSpec(c.radius, center, spec.bc, lam)


def add_noise(data: FarFieldDataset, delta: float, seed: int) -> FarFieldDataset:
    """Multiply each value by 1 + delta (X + iY) with X, Y ~ N(0, 1).

    Draws come from numpy's PCG64 generator seeded with ``seed``; record r
    consumes normals 2r (X) and 2r+1 (Y), records taken in canonical order.
    """
    if not delta >= 0:
        raise DatasetError("noise level must be nonnegative")
    if data.delta:
        raise DatasetError("dataset is already noisy; add noise to the clean data")
    flat = data.values.reshape(-1)
    if delta == 0:
        noisy = flat.copy()
    else:
        z = np.random.default_rng(seed).standard_normal((flat.size, 2))
        noisy = flat * (1.0 + delta * (z[:, 0] + 1j * z[:, 1]))
    return replace(data, values=noisy.reshape(data.values.shape), delta=float(delta), seed=int(seed))


def save_dataset(data: FarFieldDataset, path) -> None:
    lines = [json.dumps(data.manifest(), sort_keys=True), CSV_HEADER]
    for theta, xhat, k, v in data.records():
        lines.append(
            f"{theta[0]:.17g},{theta[1]:.17g},{xhat[0]:.17g},{xhat[1]:.17g},{k:.17g},{v.real:.17g},{v.imag:.17g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path) -> FarFieldDataset:
    text = Path(path).read_text()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetParseError("empty file", 1)
    try:
        man = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetParseError(f"manifest is not JSON: {exc.msg}", 1) from exc
    missing = {"version", "scatterer", "directions", "k_minus", "k_plus", "dk", "delta", "seed", "count"} - set(man)
    if missing:
        raise DatasetParseError(f"manifest lacks {sorted(missing)}", 1)
    if man["version"] != FORMAT_VERSION:
        raise DatasetParseError(f"unsupported format version {man['version']}", 1)
    if len(lines) < 2 or lines[1].strip() != CSV_HEADER:
        raise DatasetParseError("missing CSV header", 2)
    directions = parse_direction_set(man["directions"])
    grid = FrequencyGrid(man["k_minus"], man["k_plus"], man["dk"])
    expected = directions.l * directions.n_rotations * len(grid)
    rows = lines[2:]
    if man["count"] != expected:
        raise DatasetIntegrityError(f"manifest count {man['count']} does not match configuration size {expected}")
    if len(rows) != expected:
        raise DatasetIntegrityError(f"expected {expected} records, found {len(rows)}")
    table = np.empty((expected, 7))
    for r, row in enumerate(rows):
        fields = row.split(",")
        if len(fields) != 7:
            raise DatasetParseError(f"expected 7 fields, found {len(fields)}", r + 3)
        try:
            table[r] = [float(f) for f in fields]
        except ValueError as exc:
            raise DatasetParseError(str(exc), r + 3) from exc
    inc = np.repeat(directions.incidences().reshape(-1, 2), len(grid), axis=0)
    obs = np.repeat(directions.observations().reshape(-1, 2), len(grid), axis=0)
    ks = np.tile(grid.ks, directions.l * directions.n_rotations)
    bad = (np.abs(table[:, 0:2] - inc).max(axis=1) > MATCH_TOL) | (np.abs(table[:, 2:4] - obs).max(axis=1) > MATCH_TOL)
    bad |= np.abs(table[:, 4] - ks) > MATCH_TOL * max(1.0, grid.k_plus)
    if bad.any():
        r = int(np.flatnonzero(bad)[0])
        raise DatasetIntegrityError(f"line {r + 3}: record does not match the manifest's direction/frequency layout")
    values = (table[:, 5] + 1j * table[:, 6]).reshape(directions.l, directions.n_rotations, len(grid))
    return FarFieldDataset(
        man["scatterer"], directions, grid, values,
        delta=float(man["delta"]), seed=man["seed"], engine=man.get("engine", "bie"),
    )
