"""Modelling toolkit for atom-resonant photon pairs.

Covers the chain from hyperfine/Zeeman atomic structure through warm-vapor
dispersion, Faraday and dichroism filters, cavity-enhanced pair combs,
coincidence statistics, biphoton reconstruction and NooN-state sensing.
"""

from atompairs.errors import (
    ConfigError,
    CoverageError,
    FitFailure,
    NumericError,
    ResolutionError,
)

__all__ = [
    "ConfigError",
    "CoverageError",
    "FitFailure",
    "NumericError",
    "ResolutionError",
]

__version__ = "0.1.0"
