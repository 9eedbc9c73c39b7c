"""Spectral asymptotics of random geometric graphs on compact Lie groups and rank-one spaces."""

from .errors import AdvisoryError, ConfigurationError, ConvergenceError, NumericalError, OutOfRangeError
from .rootdata import DominantWeight, RootSystem, build_root_system, volumes
from .geometry import SpaceSpec, parse_space

__version__ = "0.1.0"

__all__ = [
    "AdvisoryError",
    "ConfigurationError",
    "ConvergenceError",
    "NumericalError",
    "OutOfRangeError",
    "DominantWeight",
    "RootSystem",
    "build_root_system",
    "volumes",
    "SpaceSpec",
    "parse_space",
    "__version__",
]
