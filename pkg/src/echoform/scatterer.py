"""Scatterer description: boundary curve plus boundary condition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .expr import ImpedanceProfile
from .geometry import BoundaryCurve, parse_curve

BC_KINDS = ("dirichlet", "neumann", "impedance")


@dataclass(frozen=True)
class ScattererSpec:
    curve: BoundaryCurve
    bc: str = "dirichlet"
    profile: Optional[ImpedanceProfile] = None

    def __post_init__(self):
        if self.bc not in BC_KINDS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.bc == "impedance" and self.profile is None:
            raise ValueError("impedance condition needs a profile")
        if self.bc != "impedance" and self.profile is not None:
            object.__setattr__(self, "profile", None)

    def impedance_at(self, t) -> float:
        """lambda at parameter t; inf for Dirichlet and 0 for Neumann."""
        if self.bc == "dirichlet":
            return float("inf")
        if self.bc == "neumann":
            return 0.0
        return self.profile(t)

    def descriptor(self) -> str:
        text = f"{self.curve.descriptor()};{self.bc}"
        if self.profile is not None:
            text += f";{self.profile.text}"
        return text

    @classmethod
    def from_descriptor(cls, text: str) -> "ScattererSpec":
        parts = text.split(";")
        curve = parse_curve(parts[0])
        bc = parts[1] if len(parts) > 1 else "dirichlet"
        profile = ImpedanceProfile(parts[2]) if len(parts) > 2 and parts[2] else None
        return cls(curve, bc, profile)


def make_scatterer(geometry: str, bc: str = "dirichlet", lam=None) -> ScattererSpec:
    """Convenience constructor from CLI-style strings."""
    curve = parse_curve(geometry)
    profile = None
    if bc == "impedance":
        if lam is None:
            raise ValueError("impedance condition needs --lambda")
        profile = lam if isinstance(lam, ImpedanceProfile) else ImpedanceProfile(lam)
    return ScattererSpec(curve, bc, profile)
