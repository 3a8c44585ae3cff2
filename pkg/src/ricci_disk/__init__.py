"""Boundary-value Ricci flow on the rotationally symmetric disk."""
__version__ = "0.1.0"

from .geometry import RadialMetric, realize_conformal, scalar_curvature
from .flow import SolverConfig, Termination, initialize, normalize, run, step

__all__ = [
    "RadialMetric",
    "SolverConfig",
    "Termination",
    "initialize",
    "normalize",
    "realize_conformal",
    "run",
    "scalar_curvature",
    "step",
]
