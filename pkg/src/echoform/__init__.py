"""Backscattering far-field simulation and obstacle identification in 2D."""

__version__ = "0.1.0"

from .geometry import BoundaryCurve, Disk, Egg, Kite, Trigonometric, parse_curve  # noqa: E402
from .expr import ImpedanceProfile, parse_profile  # noqa: E402
from .scatterer import ScattererSpec, make_scatterer  # noqa: E402
from .oracle import DiskSpec, disk_far_field  # noqa: E402
from .solver import SolveRequest, solve_far_field, far_field_sweep  # noqa: E402
from .synthesis import (  # noqa: E402
    FarFieldDataset,
    FrequencyGrid,
    build_direction_set,
    synthesize,
    add_noise,
    save_dataset,
    load_dataset,
)

__all__ = [
    "__version__",
    "BoundaryCurve",
    "Disk",
    "Egg",
    "Kite",
    "Trigonometric",
    "parse_curve",
    "ImpedanceProfile",
    "parse_profile",
    "ScattererSpec",
    "make_scatterer",
    "DiskSpec",
    "disk_far_field",
    "SolveRequest",
    "solve_far_field",
    "far_field_sweep",
    "FarFieldDataset",
    "FrequencyGrid",
    "build_direction_set",
    "synthesize",
    "add_noise",
    "save_dataset",
    "load_dataset",
]
